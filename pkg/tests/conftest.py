import pytest

from qsc.config import reference_config
from qsc.pipeline import run_reference


@pytest.fixture(scope="session")
def reference_run():
    """The pinned synthetic run (seed 42): generation, baseline, training, evaluation."""
    return run_reference(reference_config())


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert it."""
    def check(name, ok, detail=""):
        ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'} {name}  {detail}".rstrip())
        assert ok, f"{name}: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
