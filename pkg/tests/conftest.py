import pytest

ACCEPTANCE_RESULTS = []


@pytest.fixture
def record_criterion():
    def record(label, passed, detail):
        ACCEPTANCE_RESULTS.append((label, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
