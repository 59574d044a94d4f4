from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "varfrac", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("varfrac")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_VERDICTS: dict = {}


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion; printed at the end of the run."""

    def record(k: int, ok: bool, detail: str) -> bool:
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS[k] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[k])
