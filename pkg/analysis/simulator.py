# analysis/simulator.py

"""Nonlinear time-domain simulation of the source converter feeding a CPL."""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from analysis.equilibrium import compute_equilibrium, power_transfer_limit
from analysis.errors import (
    BracketError, InvalidParameterError, NoEquilibriumError, VoltageCollapseError,
)
from analysis.stability import theorem1_stable
from config import SolverConfig
from models.scenario import (
    PowerStep, RampReport, RampStep, Scenario, Trajectory, Verdict,
)
from models.schemas import GridParams, MachineEmulationParams
from utils.integrators import rk4_step

logger = logging.getLogger(__name__)

State = Tuple[float, float, float]
Dynamics = Callable[[State, float], State]


def _dynamics(params: GridParams, v_floor: float,
              machine: Optional[MachineEmulationParams] = None) -> Dynamics:
    """Bind the plant constants; the returned f(state, P) is the state derivative."""
    v_n = params.v_nominal
    k = params.droop_gain
    l = params.inductance
    c = params.require_capacitance()
    droop_only = params.is_droop_only
    w = params.lpf_bandwidth

    if machine is not None:
        inertia = machine.virtual_inertia * machine.v_nominal
        damping = machine.damping_factor

    def f(state: State, power: float) -> State:
        v_ref, i, v = state
        if v <= v_floor:
            raise VoltageCollapseError(v, v_floor)
        if machine is not None:
            dv_ref = (-damping * (v_ref - v_n) - i) / inertia
        elif droop_only:
            # reference pinned to the droop line v_ref = V_n - K i
            v_ref = v_n - k * i
            dv_ref = 0.0
        else:
            dv_ref = w * (v_n - v_ref) - w * k * i
        return dv_ref, (v_ref - v) / l, (i - power / v) / c

    return f


def v_floor_for(params: GridParams, ratio: Optional[float] = None) -> float:
    """Voltage below which the CPL model P/v is treated as invalid."""
    ratio = SolverConfig.V_FLOOR_RATIO if ratio is None else ratio
    return ratio * params.v_nominal


def step_dynamics(state: State, power: float, params: GridParams,
                  v_floor: Optional[float] = None) -> State:
    """
    State derivative (dv_ref/dt, di/dt, dv/dt) of the virtual-inertia system.

    Args:
        state: (v_ref, i, v)
        power: CPL power [W]
        params: Grid parameters with a capacitance
        v_floor: Collapse threshold (default V_FLOOR_RATIO * V_n)

    Returns:
        Tuple of derivatives

    Raises:
        VoltageCollapseError: v <= v_floor
    """
    floor = v_floor_for(params) if v_floor is None else v_floor
    return _dynamics(params, floor)(tuple(state), power)


def _ripple_phase(scenario: Scenario) -> float:
    ripple = scenario.perturbation
    if ripple.seed is None:
        return ripple.phase
    return float(np.random.default_rng(ripple.seed).uniform(0.0, 2.0 * math.pi))


def _rhs(dynamics: Dynamics, power: float, ripple: Optional[Tuple[float, float, float]]):
    if ripple is None:
        return lambda t, y: dynamics(y, power)
    amplitude, omega, phase = ripple

    def rhs(t: float, y: State) -> State:
        return dynamics(y, power + amplitude * math.sin(omega * t + phase))

    return rhs


def _initial_state(scenario: Scenario) -> State:
    params = scenario.params
    if scenario.initial_state is None:
        eq = compute_equilibrium(params, scenario.power_schedule[0].power)
        state = (eq.v_ref, eq.current, eq.v_cap)
    else:
        state = scenario.initial_state.as_tuple()
    v_ref, i, v = state
    v = v * (1.0 + scenario.initial_offset)
    if params.is_droop_only and scenario.machine is None:
        v_ref = params.v_nominal - params.droop_gain * i
    return v_ref, i, v


def classify(samples: np.ndarray, v_equilibrium: Optional[float], v_nominal: float,
             collapsed: bool = False, settle_from: float = 0.0,
             thresholds: Optional[dict] = None) -> Tuple[Verdict, float]:
    """
    Apply the verdict rules to a block of (t, v_ref, i, v) rows.

    Args:
        samples: Rows of the window to classify
        v_equilibrium: Target capacitor voltage, None when no equilibrium exists
        v_nominal: V_n [V]
        collapsed: The run hit the voltage floor
        settle_from: Time of the last power step; divergence is judged after it
        thresholds: Overrides for SolverConfig.get_classification_params()

    Returns:
        Tuple (verdict, final_deviation)
    """
    rules = {**SolverConfig.get_classification_params(), **(thresholds or {})}
    if len(samples) == 0:
        return Verdict.COLLAPSE, math.inf

    t = samples[:, 0]
    v = samples[:, 3]
    t_start, t_stop = t[0], t[-1]
    tail = v[t >= t_stop - 0.1 * (t_stop - t_start)]

    if v_equilibrium is None:
        return (Verdict.COLLAPSE if collapsed else Verdict.DIVERGED), math.inf

    final_deviation = float(np.max(np.abs(tail - v_equilibrium)) / v_equilibrium)
    if collapsed:
        return Verdict.COLLAPSE, final_deviation
    if final_deviation < rules['converge_tol']:
        return Verdict.CONVERGED, final_deviation

    settled = v[t >= settle_from]
    if np.any(np.abs(settled - v_equilibrium) > rules['diverge_ratio'] * v_nominal):
        return Verdict.DIVERGED, final_deviation
    if np.ptp(tail) > rules['oscillation_tol'] * v_equilibrium:
        return Verdict.OSCILLATION, final_deviation
    # offset without oscillation: drifting away
    return Verdict.DIVERGED, final_deviation


def _equilibrium_voltage(params: GridParams, power: float) -> Optional[float]:
    try:
        return compute_equilibrium(params, power).v_cap
    except NoEquilibriumError:
        return None


def simulate(s: Scenario, thresholds: Optional[dict] = None) -> Trajectory:
    """
    Integrate the nonlinear system with fixed-step RK4.

    Power steps act at the dt grid point nearest their scheduled time. A voltage
    collapse ends the run early and is reported through the verdict.

    Args:
        s: Scenario
        thresholds: Overrides for the verdict rules

    Returns:
        Trajectory

    Raises:
        NoEquilibriumError: equilibrium start requested above P_max
    """
    params = s.params
    v_floor = v_floor_for(params, (thresholds or {}).get('v_floor_ratio'))
    dynamics = _dynamics(params, v_floor, s.machine)
    pin_droop = params.is_droop_only and s.machine is None
    v_n, k = params.v_nominal, params.droop_gain

    ripple = None
    if s.perturbation is not None and s.perturbation.amplitude > 0.0:
        ripple = (s.perturbation.amplitude, 2.0 * math.pi * s.perturbation.frequency,
                  _ripple_phase(s))

    y = _initial_state(s)
    dt = s.dt
    n_steps = int(round(s.t_end / dt))
    changes = dict(s.power_at_step())
    last_change = max(changes)

    samples = np.empty((n_steps // s.decimation + 1, 4))
    samples[0] = (0.0, *y)
    row = 1
    collapsed = False
    collapse_time = None
    rhs = None

    for step in range(n_steps):
        if step in changes:
            rhs = _rhs(dynamics, changes[step], ripple)
        t = step * dt
        try:
            y = rk4_step(rhs, t, y, dt)
        except VoltageCollapseError:
            collapsed = True
            collapse_time = t
            break
        if pin_droop:
            y = (v_n - k * y[1], y[1], y[2])
        if (step + 1) % s.decimation == 0:
            samples[row] = (t + dt, *y)
            row += 1
        if y[2] <= v_floor:
            collapsed = True
            collapse_time = t + dt
            break

    samples = samples[:row]
    if collapsed:
        logger.warning("Voltage collapse at t = %.6g s; trajectory truncated", collapse_time)

    final_power = s.power_schedule[-1].power
    verdict, deviation = classify(
        samples, _equilibrium_voltage(params, final_power), v_n,
        collapsed=collapsed, settle_from=last_change * dt, thresholds=thresholds,
    )
    logger.info("Simulation verdict %s (final deviation %.3g)", verdict.value, deviation)

    return Trajectory(
        samples=samples,
        verdict=verdict,
        final_deviation=deviation,
        v_equilibrium=_equilibrium_voltage(params, final_power),
        dt=dt,
        decimation=s.decimation,
        terminated_early=collapsed,
        collapse_time=collapse_time,
        seed=s.perturbation.seed if s.perturbation is not None else None,
    )


def critical_power(params: GridParams, p_lo: float, p_hi: float,
                   tol: Optional[float] = None) -> float:
    """
    Bisect for the CPL power where the capacitance stops exceeding C0.

    Powers above P_max count as unstable.

    Args:
        params: Grid parameters with a capacitance
        p_lo: Power known to be stable [W]
        p_hi: Power known to be unstable [W]
        tol: Final bracket width [W] (default SolverConfig.BISECT_TOL)

    Returns:
        float: Predicted instability power [W]

    Raises:
        BracketError: the bracket does not straddle the boundary
    """
    tol = SolverConfig.BISECT_TOL if tol is None else tol
    params.require_capacitance()
    if not 0.0 <= p_lo < p_hi:
        raise BracketError(f"Need 0 <= p_lo < p_hi, got [{p_lo}, {p_hi}]")

    def stable(power: float) -> bool:
        try:
            return theorem1_stable(params, compute_equilibrium(params, power))
        except NoEquilibriumError:
            return False

    if not stable(p_lo):
        raise BracketError(f"p_lo = {p_lo:g} W is not stable")
    if stable(p_hi):
        raise BracketError(f"p_hi = {p_hi:g} W is still stable")

    lo, hi = p_lo, p_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
        logger.debug("critical_power bracket [%.3f, %.3f]", lo, hi)
    return 0.5 * (lo + hi)


def ramp_schedule(p_start: float, p_stop: float, p_step: float = 2000.0,
                  dwell: float = 0.2) -> List[PowerStep]:
    """
    Staircase of CPL power: p_start, p_start + p_step, ... up to p_stop.

    Args:
        p_start: First power level [W]
        p_stop: Last power level not to exceed [W]
        p_step: Increment [W]
        dwell: Hold time per level [s]

    Returns:
        List of PowerStep
    """
    if p_step <= 0 or dwell <= 0:
        raise InvalidParameterError("p_step and dwell must be > 0")
    if p_stop < p_start:
        raise InvalidParameterError("p_stop must be >= p_start")
    n_levels = int(math.floor((p_stop - p_start) / p_step + 1e-9)) + 1
    return [PowerStep(time=n * dwell, power=p_start + n * p_step) for n in range(n_levels)]


def simulate_ramp(params: GridParams, p_start: float, p_stop: float,
                  p_step: float = 2000.0, dwell: float = 0.2,
                  dt: Optional[float] = None, initial_offset: float = 0.0) -> RampReport:
    """
    Raise the CPL power in steps and judge every dwell window separately.

    Args:
        params: Grid parameters with a capacitance
        p_start: First power level [W]
        p_stop: Highest power level [W]
        p_step: Increment [W] (default 2 kW)
        dwell: Hold time per level [s]
        dt: Integration step (default SolverConfig.DT)
        initial_offset: Relative offset of the initial capacitor voltage

    Returns:
        RampReport: per-step verdicts, the first non-converging power and the
        bisection prediction when it can be bracketed
    """
    schedule = ramp_schedule(p_start, p_stop, p_step, dwell)
    scenario = Scenario(
        params=params,
        power_schedule=schedule,
        t_end=len(schedule) * dwell,
        dt=SolverConfig.DT if dt is None else dt,
        initial_offset=initial_offset,
    )
    trajectory = simulate(scenario)
    t = trajectory.t

    steps = []
    observed = None
    for level in schedule:
        start, end = level.time, level.time + dwell
        window = trajectory.samples[(t >= start) & (t <= end + 0.5 * scenario.dt)]
        collapsed = trajectory.terminated_early and trajectory.collapse_time <= end
        verdict, deviation = classify(
            window, _equilibrium_voltage(params, level.power), params.v_nominal,
            collapsed=collapsed, settle_from=start,
        )
        steps.append(RampStep(power=level.power, start=start, end=end,
                              verdict=verdict, final_deviation=deviation))
        if observed is None and verdict != Verdict.CONVERGED:
            observed = level.power

    predicted = None
    try:
        predicted = critical_power(params, p_start, power_transfer_limit(params))
    except BracketError as exc:
        logger.info("No analytic critical power in range: %s", exc)

    return RampReport(steps=steps, observed_instability_power=observed,
                      predicted_critical_power=predicted)
