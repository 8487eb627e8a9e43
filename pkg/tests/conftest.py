import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(k, title, ok, detail)`` then assert ``ok``."""
    def record(k, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {k:>2}: {title}" + (f" ({detail})" if detail else "")
        _LINES.append((k, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
