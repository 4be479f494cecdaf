import contextlib

import pytest

_RESULTS = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""
        self.ok = None

    def check(self, ok: bool, detail: str) -> None:
        self.ok = bool(ok)
        self.detail = detail
        assert ok, f"criterion {self.number} ({self.title}): {detail}"


@pytest.fixture
def criterion():
    """Records the outcome of one acceptance criterion for the summary."""
    @contextlib.contextmanager
    def open_(number: int, title: str):
        c = _Criterion(number, title)
        try:
            yield c
        except Exception as exc:
            if c.ok is None or c.ok:
                c.ok = False
                c.detail = c.detail or f"{type(exc).__name__}: {exc}"
            raise
        finally:
            _RESULTS[number] = c

    return open_


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        c = _RESULTS[n]
        verdict = "PASS" if c.ok else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {n:2d}. {c.title}: {c.detail}")
