import time
from contextlib import contextmanager

import pytest

_RESULTS: dict[int, tuple[str, bool, float, str]] = {}


@contextmanager
def _record(number: int, title: str, limit: float | None):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        _RESULTS[number] = (title, False, time.perf_counter() - start, type(exc).__name__)
        raise
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed > limit:
        _RESULTS[number] = (title, False, elapsed, f"over the {limit:g} s limit")
        pytest.fail(f"criterion {number} took {elapsed:.2f} s, limit {limit:g} s")
    _RESULTS[number] = (title, True, elapsed, "")


@pytest.fixture
def criterion():
    """Use as ``with criterion(3, "title", limit=5.0):`` to record a pass/fail line."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, elapsed, note = _RESULTS[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f} s)"
        terminalreporter.write_line(line + (f"  [{note}]" if note else ""))
