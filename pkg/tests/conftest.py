import pytest

from conescan import DesignParams, fit_profile, generate_fit_samples

_CRITERIA: dict[int, list[bool]] = {}
_TITLES = {
    1: "tip pose at full deflection",
    2: "radial margin stays positive",
    3: "linearity of the fitted design",
    4: "least-squares fit optimality",
    5: "spiral geometry",
    6: "constant-speed cam program",
    7: "scale invariance",
    8: "mismatch metrics",
    9: "match ratio",
    10: "coverage",
    11: "geometry oracle",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for marker in getattr(report, "criteria", ()):
        _CRITERIA.setdefault(marker, []).append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        results = _CRITERIA.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d} ({_TITLES[n]}): {status}")


@pytest.fixture(scope="session")
def params():
    return DesignParams()


@pytest.fixture(scope="session")
def profile(params):
    return fit_profile(generate_fit_samples(params))
