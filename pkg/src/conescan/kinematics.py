"""Forward kinematics: cam rotation -> cone contact -> planar tip position."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import pi

import numpy as np

from .errors import ContactLostError, ConvergenceError, GeometryDomainError, InputError
from .geometry import ConicProfile, DesignParams, contact_sf

BISECTION_XTOL = 1e-7
BISECTION_MAX_ITER = 200
BRACKET_FACTOR = 1.2


@dataclass(frozen=True)
class CamState:
    """Cumulative cam rotation and the axial travel it implies."""

    phi: float
    d: float

    @classmethod
    def from_phi(cls, phi: float, params: DesignParams) -> "CamState":
        return cls(phi=phi, d=params.eta * phi / (2.0 * pi))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timestamped planar samples; t in s, x and y in mm."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    scale: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).copy()
        x = np.asarray(self.x, dtype=float).copy()
        y = np.asarray(self.y, dtype=float).copy()
        if t.ndim != 1 or t.shape != x.shape or t.shape != y.shape:
            raise InputError("t, x and y must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputError("trajectory samples must be finite")
        if np.any(np.diff(t) <= 0):
            raise InputError("trajectory times must be strictly increasing")
        for arr in (t, x, y):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.t)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) else 0.0

    def path_length(self) -> float:
        return float(np.hypot(np.diff(self.x), np.diff(self.y)).sum())

    def speed(self) -> np.ndarray:
        """Chord speed between consecutive samples (length n-1)."""
        return np.hypot(np.diff(self.x), np.diff(self.y)) / np.diff(self.t)

    def equals(self, other: "Trajectory") -> bool:
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
        )


def _contact_residual(z, d, profile: ConicProfile, params: DesignParams):
    s, f, *_ = contact_sf(z, d, params)
    return profile(s) - f


def solve_deflection_many(
    d,
    profile: ConicProfile,
    params: DesignParams,
    z_hi: float | None = None,
    xtol: float = BISECTION_XTOL,
    max_iter: int = BISECTION_MAX_ITER,
) -> np.ndarray:
    """Vectorised bisection for the contact condition, see :func:`solve_deflection`."""
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d < 0):
        raise GeometryDomainError("cam travel must be non-negative")
    if z_hi is None:
        z_hi = BRACKET_FACTOR * params.Z
    z_hi = min(z_hi, params.r)
    with np.errstate(invalid="ignore"):
        g_lo = _contact_residual(0.0, d, profile, params)
        g_hi = _contact_residual(z_hi, d, profile, params)
    # Cam has not reached the cone yet: the cone rests at the nominal position.
    resting = g_lo >= 0
    lost = ~resting & ~(g_hi >= 0)
    if np.any(lost):
        i = int(np.flatnonzero(lost)[0])
        raise ContactLostError(
            f"contact lost at d={d[i]:.6g} mm: residual {g_lo[i]:.3g} at z=0 and "
            f"{g_hi[i]:.3g} at z={z_hi:.6g}",
            d=float(d[i]),
            bracket=(0.0, z_hi),
            residuals=(float(g_lo[i]), float(g_hi[i])),
        )

    lo = np.zeros_like(d)
    hi = np.full_like(d, z_hi)
    active = ~resting
    for _ in range(max_iter):
        if not np.any(active & (hi - lo >= xtol)):
            break
        mid = 0.5 * (lo + hi)
        g_mid = _contact_residual(mid, d, profile, params)
        up = g_mid >= 0
        hi = np.where(active & up, mid, hi)
        lo = np.where(active & ~up, mid, lo)
    else:
        raise ConvergenceError(f"bisection did not reach xtol={xtol} in {max_iter} iterations")
    return np.where(resting, 0.0, 0.5 * (lo + hi))


def solve_deflection(
    d: float,
    profile: ConicProfile,
    params: DesignParams = DesignParams(),
    z_hi: float | None = None,
    xtol: float = BISECTION_XTOL,
) -> float:
    """Tip deflection produced by cam travel ``d`` against ``profile``.

    Finds z in [0, z_hi] (default 1.2 Z) where the profile height at the
    contact abscissa equals the geometric contact height. The residual
    increases with z, so bisection on the bracket is safe. If the residual is
    already non-negative at z = 0 the cam has not yet reached the cone and
    0 is returned; if it is still negative at ``z_hi`` the cam has run off
    the cone and :class:`ContactLostError` is raised.
    """
    return float(solve_deflection_many(d, profile, params, z_hi=z_hi, xtol=xtol)[0])


def tip_position(phi, profile: ConicProfile, params: DesignParams = DesignParams(), z_hi=None):
    """Planar tip position for cumulative cam angle ``phi`` (rad).

    The cone cannot roll, so the deflection direction follows the cam angle.
    Accepts scalars or arrays.
    """
    phi_arr = np.asarray(phi, dtype=float)
    if np.any(phi_arr < 0):
        raise GeometryDomainError("cam angle must be non-negative")
    z = solve_deflection_many(params.eta * phi_arr.ravel() / (2.0 * pi), profile, params, z_hi=z_hi)
    z = z.reshape(phi_arr.shape)
    x, y = z * np.cos(phi_arr), z * np.sin(phi_arr)
    if phi_arr.ndim == 0:
        return float(x), float(y)
    return x, y


def integrate_program(knot_t, knot_omega, t):
    """Exact integral of a piecewise-linear angular velocity at times ``t``.

    Knot integrals are trapezoid sums (exact for linear segments); between
    knots the integral is the quadratic of the local linear segment. The
    velocity is zero before the first and after the last knot.
    """
    knot_t = np.asarray(knot_t, dtype=float)
    knot_omega = np.asarray(knot_omega, dtype=float)
    t = np.asarray(t, dtype=float)
    seg = np.diff(knot_t)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (knot_omega[1:] + knot_omega[:-1]) * seg)])
    tc = np.clip(t, knot_t[0], knot_t[-1])
    i = np.clip(np.searchsorted(knot_t, tc, side="right") - 1, 0, len(knot_t) - 2)
    tau = tc - knot_t[i]
    slope = (knot_omega[i + 1] - knot_omega[i]) / seg[i]
    return cum[i] + knot_omega[i] * tau + 0.5 * slope * tau * tau


def simulate_scan(
    program,
    profile: ConicProfile,
    params: DesignParams = DesignParams(),
    dt: float = 0.01,
    include_rewind: bool = False,
    z_hi: float | None = None,
) -> Trajectory:
    """Probe trajectory for a cam program, sampled every ``dt`` seconds.

    Only the forward (imaging) phase is simulated unless ``include_rewind``.
    """
    if not dt > 0:
        raise InputError("dt must be positive")
    t0 = float(program.t[0])
    t_end = float(program.t[-1]) if include_rewind else program.forward_end
    n = int(np.floor((t_end - t0) / dt + 1e-9))
    t = t0 + dt * np.arange(n + 1)
    if t_end - t[-1] > 1e-9 * max(1.0, t_end):
        t = np.append(t, t_end)
    phi = integrate_program(program.t, program.omega_cam, t)
    # Rewind returns to phi = 0 up to round-off.
    phi = np.where((phi < 0) & (phi > -1e-9), 0.0, phi)
    if np.any(phi < 0):
        raise GeometryDomainError("cam program drives the cam behind its start position")
    try:
        x, y = tip_position(phi, profile, params, z_hi=z_hi)
    except ContactLostError as exc:
        i = int(np.searchsorted(params.eta * phi / (2 * pi), exc.d))
        exc.time = float(t[min(i, len(t) - 1)])
        exc.args = (f"{exc.args[0]} (t={exc.time:.3f} s)",)
        raise
    return Trajectory(t, x, y, label="probe", scale=params.scale)


def rescale_trajectory(traj: Trajectory, factor: float) -> Trajectory:
    """Scale positions (not times) by ``factor``.

    Chained rescales are applied to the original coordinates with the
    combined factor held as a fraction, so a round trip such as 5 then 0.2
    returns the input bit for bit.
    """
    if not factor > 0:
        raise InputError("rescale factor must be positive")
    base, total = getattr(traj, "_rescale_base", (traj, Fraction(1)))
    total = total * Fraction(factor).limit_denominator(10**9)
    scale = base.scale * float(total)
    if total == 1:
        out = Trajectory(base.t, base.x, base.y, traj.label, base.scale)
    else:
        k = float(total)
        out = Trajectory(base.t, base.x * k, base.y * k, traj.label, scale)
    object.__setattr__(out, "_rescale_base", (base, total))
    return out
