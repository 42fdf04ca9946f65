import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion and print its status line."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        _RESULTS[number] = (title, bool(ok), detail)
        print(_line(number, title, ok, detail))
        return bool(ok)

    return record


def _line(number, title, ok, detail):
    return f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        terminalreporter.write_line(_line(number, *_RESULTS[number]))
