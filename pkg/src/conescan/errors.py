"""Exception hierarchy shared by the library and the CLI."""


class ConescanError(Exception):
    """Base class for all errors raised by conescan."""


class NumericalError(ConescanError):
    """A computation could not produce a valid number."""


class GeometryDomainError(NumericalError, ValueError):
    """Requested configuration is geometrically impossible."""


class SingularFitError(NumericalError):
    """Least-squares system is rank deficient (duplicated or too few abscissae)."""


class ContactLostError(NumericalError):
    """The cam tip no longer touches the conic surface inside the search bracket."""

    def __init__(self, message, d=None, bracket=None, residuals=None, time=None):
        super().__init__(message)
        self.d = d
        self.bracket = bracket
        self.residuals = residuals
        self.time = time


class ConvergenceError(NumericalError):
    """Iterative solver hit its iteration limit."""


class RequirementViolation(ConescanError):
    """A plan or program would break a scanning requirement."""

    def __init__(self, name, value, limit):
        super().__init__(f"{name} = {value:g} violates limit {limit:g}")
        self.name = name
        self.value = value
        self.limit = limit


class InputError(ConescanError, ValueError):
    """Malformed user input: config files, CSV data, arguments."""
