import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion; printed in the summary."""

    def record(number, title, passed, detail=""):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}" + (f" :: {detail}" if detail else "")
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
