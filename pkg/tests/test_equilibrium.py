import math

from hypothesis import given, settings
from hypothesis.strategies import floats
from pytest import approx, mark, raises

from analysis.equilibrium import (
    compute_equilibrium, equivalent_lpf, grid_params_from_machine,
    machine_emulation_from_lpf, power_transfer_limit,
)
from analysis.errors import InvalidParameterError, NoEquilibriumError
from models.schemas import GridParams, MachineEmulationParams


def test_reference_operating_point(ref_grid):
    eq = compute_equilibrium(ref_grid, 46000.0)
    assert power_transfer_limit(ref_grid) == 50000.0
    assert eq.v_cap == approx((200.0 + math.sqrt(3200.0)) / 2.0, rel=1e-12)
    assert eq.r_effective == approx(0.358, rel=5e-3)
    assert eq.v_ref == eq.v_cap
    assert eq.current == approx(46000.0 / eq.v_cap)


def test_no_load(ref_grid):
    eq = compute_equilibrium(ref_grid, 0.0)
    assert eq.v_cap == 200.0
    assert eq.current == 0.0
    assert math.isinf(eq.r_effective)
    assert not eq.is_loaded
    assert eq.model_dump(mode='json')['r_effective'] == 'inf'


def test_power_transfer_limit_is_accepted(ref_grid):
    eq = compute_equilibrium(ref_grid, 50000.0)
    assert eq.v_cap == approx(100.0)
    assert eq.r_effective == approx(ref_grid.droop_gain)
    assert eq.r_effective >= ref_grid.droop_gain


def test_above_limit_has_no_equilibrium(ref_grid):
    with raises(NoEquilibriumError) as info:
        compute_equilibrium(ref_grid, 60000.0)
    assert info.value.p_max == 50000.0
    assert info.value.power == 60000.0


@mark.parametrize("power", (-1.0, math.inf, math.nan))
def test_rejects_bad_power(ref_grid, power):
    with raises(InvalidParameterError):
        compute_equilibrium(ref_grid, power)


def test_bandwidth_does_not_move_the_equilibrium(ref_grid):
    droop = compute_equilibrium(ref_grid, 30000.0)
    inertia = compute_equilibrium(ref_grid.with_updates(lpf_bandwidth=125.0), 30000.0)
    assert droop == inertia


@given(floats(min_value=1.0, max_value=1000.0),
       floats(min_value=0.01, max_value=1.0),
       floats(min_value=0.0, max_value=1.0))
def test_droop_fixed_point(v_nominal, droop_gain, fraction):
    p = GridParams(v_nominal=v_nominal, droop_gain=droop_gain, inductance=1e-3)
    power = fraction * power_transfer_limit(p)
    eq = compute_equilibrium(p, power)
    assert eq.v_cap == approx(v_nominal - droop_gain * eq.current, rel=1e-9, abs=1e-9)
    assert eq.v_cap * eq.current == approx(power, rel=1e-9, abs=1e-9)
    assert eq.v_cap >= v_nominal / 2.0 * (1.0 - 1e-12)
    if power > 0:
        assert eq.r_effective >= droop_gain


@settings(max_examples=50)
@given(floats(min_value=0.01, max_value=0.99), floats(min_value=0.01, max_value=0.99))
def test_voltage_falls_with_power(a, b):
    p = GridParams(v_nominal=200.0, droop_gain=0.2, inductance=1e-3)
    lo, hi = sorted((a, b))
    p_max = power_transfer_limit(p)
    assert compute_equilibrium(p, lo * p_max).v_cap >= compute_equilibrium(p, hi * p_max).v_cap


def test_machine_mapping():
    m = MachineEmulationParams(virtual_inertia=5.0 / (716.0 * 200.0), damping_factor=5.0,
                               v_nominal=200.0)
    omega, droop_gain = equivalent_lpf(m)
    assert omega == approx(716.0)
    assert droop_gain == approx(0.2)

    p = grid_params_from_machine(m, inductance=1e-3, capacitance=0.014)
    assert p.lpf_bandwidth == approx(716.0)
    assert p.capacitance == 0.014


@given(floats(min_value=1.0, max_value=1e5),
       floats(min_value=0.01, max_value=1.0),
       floats(min_value=10.0, max_value=1000.0))
def test_machine_mapping_round_trip(omega, droop_gain, v_nominal):
    m = machine_emulation_from_lpf(omega, droop_gain, v_nominal)
    back_omega, back_gain = equivalent_lpf(m)
    assert back_omega == approx(omega, rel=1e-12)
    assert back_gain == approx(droop_gain, rel=1e-12)


def test_machine_mapping_needs_finite_bandwidth():
    with raises(InvalidParameterError):
        machine_emulation_from_lpf(math.inf, 0.2, 200.0)
