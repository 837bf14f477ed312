import pytest

# (criterion, passed, detail) appended by tests/test_acceptance.py
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Call with (passed, detail); the line is echoed now and again in the summary."""
    name = request.node.name.removeprefix("test_")

    def record(passed: bool, detail: str = "") -> None:
        ACCEPTANCE_LINES.append((name, passed, detail))
        print(f"{'PASS' if passed else 'FAIL'} {name} {detail}".rstrip())
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {name} {detail}".rstrip())
