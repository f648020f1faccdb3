import pytest

# criterion number -> (passed, summary); filled by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, summary = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {summary}")


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, summary: str):
        ACCEPTANCE_RESULTS[number] = (passed, summary)
        print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {summary}")
    return record
