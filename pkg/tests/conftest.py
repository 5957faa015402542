import pytest

_ACCEPTANCE: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _ACCEPTANCE.get(name)
        dur = report.duration + (prev[1] if prev else 0.0)
        outcome = report.outcome if prev is None or prev[0] == "passed" else prev[0]
        _ACCEPTANCE[name] = (outcome, dur)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for func_name, label in CRITERIA:
        outcome, dur = _ACCEPTANCE.get(func_name, ("not run", 0.0))
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{verdict:<5} {label} ({dur:.2f}s)")


@pytest.fixture(autouse=True)
def _mp_precision():
    """High-precision mpmath oracles, isolated per test."""
    import mpmath

    with mpmath.workprec(4096):
        yield


@pytest.fixture
def rng():
    import random

    return random.Random(20240607)
