import pytest

CRITERIA = {}


def record(number, passed, detail):
    CRITERIA[number] = (passed, detail)
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"
    print(line)
    return line


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
