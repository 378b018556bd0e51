import pytest

from bitslicefp.format import FP8
from bitslicefp.verify import run_bitslice

_CRITERIA: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test belongs to")


def bitslice_scalar(op, a, b, spec=FP8, width=8):
    """One element through a full bitslice pipeline."""
    return int(run_bitslice(op, [a], [b], spec, width)[0])


@pytest.fixture
def scalar_op():
    return bitslice_scalar


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcomes in _CRITERIA.items():
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({len(outcomes)} checks)")
