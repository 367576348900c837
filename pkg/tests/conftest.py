import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from sglab import build_grid  # noqa: E402

settings.register_profile(
    "lab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("lab")

_GRIDS = {}


def grid(n_r, n_theta=None, radius=1.0):
    """Grids are immutable; share them between tests."""
    key = (n_r, n_theta or n_r, radius)
    if key not in _GRIDS:
        _GRIDS[key] = build_grid(n_r, n_theta or n_r, radius)
    return _GRIDS[key]


ACCEPTANCE = {}


@pytest.fixture
def acceptance_record():
    def record(number, ok, detail):
        ACCEPTANCE[number] = (ok, detail)
        print(f"acceptance {number}: {'PASS' if ok else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
