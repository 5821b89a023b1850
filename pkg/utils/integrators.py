# utils/integrators.py

"""Fixed-step 4th order Runge-Kutta integration on tuple states."""
import math
from typing import Callable, Sequence, Tuple

State = Tuple[float, ...]
RHS = Callable[[float, State], State]


def rk4_step(fn: RHS, t: float, y: State, h: float) -> State:
    """
    Advance y by one classic RK4 step.

    Args:
        fn: Right-hand side f(t, y) returning a tuple of derivatives
        t: Current time
        y: Current state
        h: Step length

    Returns:
        State at t + h
    """
    half = 0.5 * h
    k1 = fn(t, y)
    k2 = fn(t + half, tuple(a + half * b for a, b in zip(y, k1)))
    k3 = fn(t + half, tuple(a + half * b for a, b in zip(y, k2)))
    k4 = fn(t + h, tuple(a + h * b for a, b in zip(y, k3)))
    sixth = h / 6.0
    return tuple(
        a + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )


def integrate(fn: RHS, y0: State, t_end: float, h: float) -> State:
    """Integrate from t = 0 to t_end with a fixed step; t_end must be a multiple of h."""
    n_steps = int(round(t_end / h))
    y = tuple(y0)
    for k in range(n_steps):
        y = rk4_step(fn, k * h, y, h)
    return y


def _distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.sqrt(sum((x - z) ** 2 for x, z in zip(a, b)))


def convergence_ratio(fn: RHS, y0: State, t_end: float, h: float) -> float:
    """
    Measure the observed order of the integrator by successive step halving.

    For a 4th order method the ratio |y_h - y_h/2| / |y_h/2 - y_h/4| tends to 16.

    Args:
        fn: Right-hand side
        y0: Initial state
        t_end: Integration horizon
        h: Coarsest step

    Returns:
        float: Error ratio per halving of the step
    """
    coarse = integrate(fn, y0, t_end, h)
    medium = integrate(fn, y0, t_end, h / 2.0)
    fine = integrate(fn, y0, t_end, h / 4.0)
    return _distance(coarse, medium) / _distance(medium, fine)
