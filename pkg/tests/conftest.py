import pytest

_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line: report(name, status, detail)."""

    def _add(name: str, status: str, detail: str = ""):
        _ACCEPTANCE.append((name, status, detail))

    return _add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status:8s} {name}  {detail}")
