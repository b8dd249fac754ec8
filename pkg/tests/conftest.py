import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; ``criterion(n, title, ok, detail)`` then asserts ``ok``."""

    def record(n, title, ok, detail=""):
        line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}" + (f" -- {detail}" if detail else "")
        _LINES.append((n, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
