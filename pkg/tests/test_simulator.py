import math

import numpy as np
from pydantic import ValidationError
from pytest import approx, fixture, mark, raises

from analysis.equilibrium import compute_equilibrium, machine_emulation_from_lpf
from analysis.errors import (
    BracketError, InvalidParameterError, NoEquilibriumError, VoltageCollapseError,
)
from analysis.simulator import (
    classify, critical_power, ramp_schedule, simulate, simulate_ramp, step_dynamics,
)
from analysis.stability import c0_at, char_poly, eigenvalues
from models.scenario import Perturbation, PowerStep, Scenario, StateVector, Verdict


def scenario(params, schedule, t_end, dt=2e-5, **kwargs):
    steps = [PowerStep(time=t, power=p) for t, p in schedule]
    return Scenario(params=params, power_schedule=steps, t_end=t_end, dt=dt, **kwargs)


@fixture
def inertia716(with_omega):
    return with_omega(716.0)


def test_step_dynamics_zero_at_equilibrium(inertia716):
    eq = compute_equilibrium(inertia716, 46000.0)
    derivative = step_dynamics((eq.v_ref, eq.current, eq.v_cap), 46000.0, inertia716)
    assert derivative == approx((0.0, 0.0, 0.0), abs=1e-8)


def test_step_dynamics_no_load(inertia716):
    assert step_dynamics((200.0, 0.0, 200.0), 0.0, inertia716) == (0.0, 0.0, 0.0)


def test_step_dynamics_hand_evaluation(inertia716):
    _, _, dv = step_dynamics((128.28, 358.6, 120.0), 46000.0, inertia716)
    assert dv == approx((358.6 - 46000.0 / 120.0) / 0.014)
    assert dv == approx(-1766.67, rel=1e-4)


def test_step_dynamics_collapse_guard(inertia716):
    with raises(VoltageCollapseError) as info:
        step_dynamics((200.0, 100.0, 5.0), 46000.0, inertia716)
    assert info.value.v_floor == approx(10.0)


def test_scenario_validation(inertia716):
    with raises(ValidationError):
        scenario(inertia716, [(0.1, 1000.0)], t_end=1.0)
    with raises(ValidationError):
        scenario(inertia716, [(0.0, 1000.0), (0.5, 2000.0), (0.5, 3000.0)], t_end=1.0)
    with raises(ValidationError):
        scenario(inertia716, [(0.0, -1.0)], t_end=1.0)
    with raises(ValidationError):
        scenario(inertia716, [(0.0, 1000.0)], t_end=1e-3, dt=1e-2)
    with raises(ValidationError):
        scenario(inertia716.with_updates(capacitance=None), [(0.0, 1000.0)], t_end=1.0)


@mark.slow
def test_equilibrium_is_preserved(inertia716):
    traj = simulate(scenario(inertia716, [(0.0, 46000.0)], t_end=1.0, dt=1e-5, decimation=100))
    assert traj.verdict == Verdict.CONVERGED
    assert np.max(np.abs(traj.samples[:, 1:] - traj.samples[0, 1:])) < 1e-6
    assert traj.final_deviation < 1e-9


def test_samples_are_uniform_and_decimated(inertia716):
    traj = simulate(scenario(inertia716, [(0.0, 20000.0)], t_end=0.01, dt=1e-5, decimation=10))
    assert traj.samples.shape == (101, 4)
    assert np.allclose(np.diff(traj.t), 1e-4)
    assert traj.decimation == 10
    assert traj.metadata()['dt'] == 1e-5
    assert 'samples' not in traj.metadata()


@mark.slow
def test_step_43_to_45_kw_converges(inertia716):
    traj = simulate(scenario(inertia716, [(0.0, 43000.0), (0.1, 45000.0)], t_end=0.6,
                             decimation=10))
    assert traj.verdict == Verdict.CONVERGED
    assert traj.v_equilibrium == approx(compute_equilibrium(inertia716, 45000.0).v_cap)


@mark.slow
def test_large_inertia_at_20_kw_does_not_converge(with_omega):
    p = with_omega(125.0)
    traj = simulate(scenario(p, [(0.0, 20000.0)], t_end=1.0, initial_offset=0.01,
                             decimation=10))
    assert traj.verdict in (Verdict.OSCILLATION, Verdict.DIVERGED, Verdict.COLLAPSE)


@mark.slow
def test_equilibrium_does_not_depend_on_bandwidth(with_omega):
    finals = []
    for omega in (716.0, 1500.0):
        traj = simulate(scenario(with_omega(omega), [(0.0, 43000.0), (0.1, 45000.0)],
                                 t_end=1.0, decimation=100))
        assert traj.verdict == Verdict.CONVERGED
        finals.append(traj.v[-1])
    assert finals[0] == approx(finals[1], rel=1e-6)


@mark.slow
def test_machine_form_matches_lpf_form(with_omega):
    rng = np.random.default_rng(3)
    for _ in range(100):
        omega = 10 ** rng.uniform(2.0, 3.7)
        p = with_omega(omega, capacitance=rng.uniform(0.015, 0.03))
        first = rng.uniform(10000.0, 35000.0)
        schedule = [(0.0, first), (0.005, first + rng.uniform(-5000.0, 5000.0))]
        machine = machine_emulation_from_lpf(omega, 0.2, 200.0)
        lpf = simulate(scenario(p, schedule, t_end=0.02, dt=1e-5))
        emulated = simulate(scenario(p, schedule, t_end=0.02, dt=1e-5, machine=machine))
        np.testing.assert_allclose(emulated.samples, lpf.samples, rtol=1e-12, atol=0)
        assert emulated.verdict == lpf.verdict


@mark.slow
def test_linear_prediction_matches_simulation(with_omega):
    rng = np.random.default_rng(5)
    for _ in range(100):
        omega = 10 ** rng.uniform(2.5, 3.5)
        power = rng.uniform(0.3, 0.9) * 50000.0
        eq = compute_equilibrium(with_omega(omega), power)
        c0 = c0_at(omega, 1e-3, 0.2, eq.r_effective)
        for factor, converges in ((1.05, True), (0.95, False)):
            p = with_omega(omega, capacitance=factor * c0)
            rate = abs(eigenvalues(char_poly(p, eq)).max_real_part)
            traj = simulate(scenario(p, [(0.0, power)], t_end=12.0 / rate, dt=1e-4,
                                     initial_offset=0.01, decimation=10))
            assert (traj.verdict == Verdict.CONVERGED) is converges, (omega, power, factor)


@mark.slow
@mark.parametrize("omega schedule t_end offset".split(),
                  ((716.0, [(0.0, 43000.0), (0.1, 45000.0)], 0.6, 0.0),
                   (716.0, [(0.0, 46000.0)], 0.2, 0.0),
                   (125.0, [(0.0, 20000.0)], 1.0, 0.01)))


def test_halving_dt_keeps_verdict(with_omega, omega, schedule, t_end, offset):
    verdicts = [
        simulate(scenario(with_omega(omega), schedule, t_end=t_end, dt=dt,
                          initial_offset=offset, decimation=10)).verdict
        for dt in (2e-5, 1e-5)
    ]
    assert verdicts[0] == verdicts[1]


def test_machine_scenario_needs_matching_voltage(inertia716):
    machine = machine_emulation_from_lpf(716.0, 0.2, 400.0)
    with raises(ValidationError):
        scenario(inertia716, [(0.0, 1000.0)], t_end=0.01, machine=machine)


def test_pure_droop_pins_reference(ref_grid):
    traj = simulate(scenario(ref_grid, [(0.0, 30000.0), (0.002, 32000.0)], t_end=0.01, dt=1e-5))
    assert np.allclose(traj.v_ref, 200.0 - 0.2 * traj.i, rtol=1e-12)


def test_seeded_ripple_is_reproducible(inertia716):
    ripple = Perturbation(amplitude=500.0, frequency=100.0, seed=7)
    runs = [simulate(scenario(inertia716, [(0.0, 30000.0)], t_end=0.01, dt=1e-5,
                              perturbation=ripple)) for _ in range(2)]
    assert np.array_equal(runs[0].samples, runs[1].samples)
    assert runs[0].seed == 7
    still = simulate(scenario(inertia716, [(0.0, 30000.0)], t_end=0.01, dt=1e-5))
    assert not np.array_equal(runs[0].samples, still.samples)


def test_collapse_terminates_early(with_omega):
    p = with_omega(716.0, capacitance=0.002)
    traj = simulate(scenario(p, [(0.0, 1000.0)], t_end=0.5, dt=1e-5,
                             initial_state=StateVector(v_ref=200.0, i=0.0, v=12.0)))
    assert traj.verdict == Verdict.COLLAPSE
    assert traj.terminated_early
    assert traj.collapse_time is not None and traj.collapse_time < 0.5


def test_no_equilibrium_start_is_rejected(inertia716):
    with raises(NoEquilibriumError):
        simulate(scenario(inertia716, [(0.0, 60000.0)], t_end=0.01, dt=1e-5))


def _rows(t, v):
    zeros = np.zeros_like(t)
    return np.column_stack([t, zeros, zeros, v])


def test_classify_rules():
    t = np.linspace(0.0, 1.0, 1001)
    v_e = 128.0

    converged, deviation = classify(_rows(t, v_e + 1e-3 * np.exp(-20 * t)), v_e, 200.0)
    assert converged == Verdict.CONVERGED and deviation < 1e-3

    ringing = v_e + 2.0 * np.sin(2 * np.pi * 50 * t)
    assert classify(_rows(t, ringing), v_e, 200.0)[0] == Verdict.OSCILLATION

    runaway = v_e - 150.0 * t
    assert classify(_rows(t, runaway), v_e, 200.0)[0] == Verdict.DIVERGED

    drift = v_e + 5.0 * np.ones_like(t)
    assert classify(_rows(t, drift), v_e, 200.0)[0] == Verdict.DIVERGED

    assert classify(_rows(t, ringing), v_e, 200.0, collapsed=True)[0] == Verdict.COLLAPSE
    verdict, deviation = classify(_rows(t, ringing), None, 200.0)
    assert verdict == Verdict.DIVERGED and math.isinf(deviation)


def test_critical_power_pure_droop(ref_grid):
    assert critical_power(ref_grid, 0.0, 50000.0) == approx(46022.0, abs=50.0)


def test_critical_power_large_finite_bandwidth(with_omega):
    assert critical_power(with_omega(1e6), 0.0, 50000.0) == approx(46022.0, abs=50.0)


def test_critical_power_reaches_transfer_limit(with_omega):
    assert critical_power(with_omega(716.0, capacitance=0.1), 0.0, 50000.0) == \
        approx(50000.0, abs=2.0)


def test_critical_power_large_inertia(with_omega):
    assert critical_power(with_omega(125.0), 0.0, 50000.0) == approx(17400.0, abs=300.0)


def test_critical_power_near_optimal_bandwidth(inertia716):
    value = critical_power(inertia716, 0.0, 50000.0)
    assert 46000.0 < value < 50000.0
    assert c0_at(716.0, 1e-3, 0.2, compute_equilibrium(inertia716, value).r_effective) == \
        approx(0.014, rel=1e-3)


def test_critical_power_bracket_errors(with_omega):
    p = with_omega(125.0)
    with raises(BracketError):
        critical_power(p, 30000.0, 40000.0)
    with raises(BracketError):
        critical_power(p, 0.0, 10000.0)
    with raises(BracketError):
        critical_power(p, 20000.0, 10000.0)


def test_ramp_schedule():
    steps = ramp_schedule(40000.0, 46000.0, 2000.0, 0.2)
    assert [s.power for s in steps] == [40000.0, 42000.0, 44000.0, 46000.0]
    assert [s.time for s in steps] == approx([0.0, 0.2, 0.4, 0.6])
    with raises(InvalidParameterError):
        ramp_schedule(0.0, 1000.0, p_step=0.0)


@mark.slow
def test_ramp_finds_large_inertia_instability(with_omega):
    report = simulate_ramp(with_omega(125.0), 10000.0, 24000.0, p_step=2000.0, dwell=0.3,
                           dt=2e-5)
    assert len(report.steps) == 8
    assert report.predicted_critical_power == approx(17400.0, abs=300.0)
    assert report.observed_instability_power is not None
    assert report.steps[-1].verdict != Verdict.CONVERGED
