import numpy as np
import pytest

from spherear.hilbert import SpherePoint

# Acceptance outcomes, keyed by criterion label, filled by the report hook below.
_ACCEPTANCE = {}
_DETAILS = {}


def random_point(rng, d, weights=None):
    return SpherePoint.normalized(rng.standard_normal(d), weights)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the current acceptance criterion."""

    def _set(text):
        _DETAILS[request.node.nodeid] = text

    return _set


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    marker = report.nodeid.split("::")[-1]
    if not marker.startswith("test_ac"):
        return
    label = "AC" + marker[len("test_ac"):].split("_")[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE[label] = (report.outcome, report.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: int(s[2:])):
        outcome, nodeid = _ACCEPTANCE[label]
        status = "PASS" if outcome == "passed" else "FAIL"
        extra = _DETAILS.get(nodeid, "")
        terminalreporter.write_line(f"{label} {status} {nodeid.split('::')[-1]}" + (f" | {extra}" if extra else ""))
