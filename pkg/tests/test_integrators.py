import math

from pytest import approx

from utils.integrators import convergence_ratio, integrate, rk4_step


def decay(t, y):
    return (-y[0],)


def test_single_step_matches_taylor():
    h = 0.1
    (y,) = rk4_step(decay, 0.0, (1.0,), h)
    assert y == approx(1 - h + h ** 2 / 2 - h ** 3 / 6 + h ** 4 / 24, rel=1e-14)


def test_integrate_exponential():
    (y,) = integrate(decay, (1.0,), 1.0, 1e-3)
    assert y == approx(math.exp(-1.0), rel=1e-12)


def test_time_dependent_rhs():
    (y,) = integrate(lambda t, y: (math.cos(t),), (0.0,), 1.0, 1e-2)
    assert y == approx(math.sin(1.0), rel=1e-9)


def test_fourth_order_convergence():
    assert convergence_ratio(decay, (1.0,), 1.0, 0.05) == approx(16.0, rel=0.05)
