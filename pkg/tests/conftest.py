from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from maidlab.catalog import logistics_maid  # noqa: E402
from maidlab.intervention import baseline_cache  # noqa: E402


@pytest.fixture
def logistics():
    return logistics_maid()


@pytest.fixture
def guided_logistics():
    return logistics_maid(with_guidance=True)


@pytest.fixture(autouse=True)
def _fresh_cache():
    baseline_cache.clear()
    yield



@pytest.fixture
def record(request):
    """Report one acceptance line; the terminal summary repeats every line."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def _record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        lines.append((number, line))

    return _record


def pytest_terminal_summary(terminalreporter):
    lines = terminalreporter.config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
