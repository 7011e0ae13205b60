from __future__ import annotations

import pytest

_LINES: list = []


class Criterion:
    """Collects clause results for one acceptance criterion and prints a verdict line."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.clauses = []

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.clauses.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.clauses)

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.clauses if not ok]
        tail = f" -- failed: {'; '.join(failed)}" if failed else ""
        return f"{tag} criterion {self.number:2d}: {self.title}{tail}"

    def finish(self):
        line = self.line()
        print(line)
        _LINES.append((self.number, line))
        bad = [c for c in self.clauses if not c[1]]
        assert not bad, line


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_LINES):
        terminalreporter.write_line(line)
