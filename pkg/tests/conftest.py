# tests/conftest.py

import json

import pytest

from analysis.equilibrium import compute_equilibrium
from models.schemas import GridParams

REF_GRID = {
    'v_nominal': 200.0,
    'droop_gain': 0.2,
    'inductance': 1e-3,
    'capacitance': 0.014,
}
P_REF = 46000.0


@pytest.fixture
def ref_grid():
    """Reference 200 V grid with pure droop (omega = inf)."""
    return GridParams(**REF_GRID)


@pytest.fixture
def with_omega(ref_grid):
    """Factory for reference grid params at a given bandwidth (and optionally capacitance)."""
    def make(omega, **changes):
        return ref_grid.with_updates(lpf_bandwidth=omega, **changes)
    return make


@pytest.fixture
def eq46(ref_grid):
    return compute_equilibrium(ref_grid, P_REF)


@pytest.fixture
def ref_config(tmp_path):
    path = tmp_path / "ref_grid.json"
    path.write_text(json.dumps({**REF_GRID, 'lpf_bandwidth': 'inf', 'power': P_REF}))
    return str(path)
