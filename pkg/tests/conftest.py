import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import report  # noqa: E402

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def mnist58():
    from vcdd.data import load_mnist

    return load_mnist(DATA / "mnist58-images-idx3-ubyte.gz", DATA / "mnist58-labels-idx1-ubyte.gz")


def pytest_terminal_summary(terminalreporter):
    reports = [r for key in ("passed", "failed", "error") for r in terminalreporter.stats.get(key, [])]
    ran = any("test_acceptance" in getattr(r, "nodeid", "") for r in reports)
    if not (report.RESULTS or ran):
        return
    terminalreporter.section("acceptance criteria")
    for k in report.CRITERIA:
        terminalreporter.write_line(report.line(k))
