import pytest

_LINES: dict[int, str] = {}


class Criterion:
    """Collects sub-checks of one acceptance criterion and reports a single line."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.parts: list[tuple[str, bool, str]] = []

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.parts.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def ok(self) -> bool:
        return bool(self.parts) and all(ok for _, ok, _ in self.parts)

    def line(self) -> str:
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.parts if not ok]
        status = "PASS" if self.ok else "FAIL"
        tail = f"{len(self.parts)} checks" if self.ok else "failed: " + "; ".join(failed)
        return f"criterion {self.number:2d} {status}  {self.title}: {tail}"

    def finish(self):
        _LINES[self.number] = self.line()
        print(_LINES[self.number])
        assert self.ok, self.line()


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
