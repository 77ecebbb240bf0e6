"""Collects one status line per acceptance criterion and prints them after the run."""
import pytest

_LINES: dict[int, list[tuple[bool, str]]] = {}


class CriterionLog:
    def __init__(self, number: int):
        self.number = number

    def __call__(self, ok: bool, detail: str):
        _LINES.setdefault(self.number, []).append((bool(ok), detail))
        return ok


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    return CriterionLog(marker.args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        parts = _LINES[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
