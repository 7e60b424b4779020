import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skinlab import ModelParams, assemble_obc, build_geometry, obc_spectrum  # noqa: E402


@pytest.fixture(scope="session")
def defaults():
    return ModelParams()


@pytest.fixture(scope="session")
def triangle16(defaults):
    geo = build_geometry("triangle", 16)
    return geo, obc_spectrum(assemble_obc(defaults, geo))


@pytest.fixture(scope="session")
def square16(defaults):
    geo = build_geometry("square", 16)
    return geo, obc_spectrum(assemble_obc(defaults, geo))


_ACCEPTANCE = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome))
    elif report.when == "setup" and report.failed and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], "error"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
