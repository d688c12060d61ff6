import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one line per acceptance criterion; all lines are echoed in the terminal summary."""
    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
