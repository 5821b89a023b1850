import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis.strategies import floats
from pytest import approx, mark, raises

from analysis.equilibrium import compute_equilibrium, power_transfer_limit
from analysis.errors import InvalidParameterError
from analysis.stability import (
    assess_stability, capacitance_thresholds, char_poly, droop_limit_stable,
    eigenvalues, jacobian, routh_verdict, theorem1_stable, thresholds_at,
)
from models.schemas import CharPoly, GridParams


def test_jacobian_entries(with_omega, eq46):
    p = with_omega(715.0)
    j = jacobian(p, eq46)
    assert j[0, 0] == -715.0
    assert j[0, 1] == approx(-715.0 * 0.2)
    assert j[2, 2] == approx(1.0 / (eq46.r_effective * 0.014))
    assert j[2, 2] == approx(199.5, rel=2e-3)
    assert j[1, 2] * j[2, 1] == approx(-1.0 / (1e-3 * 0.014))


def test_jacobian_rejects_droop_and_no_load(ref_grid, with_omega, eq46):
    with raises(InvalidParameterError):
        jacobian(ref_grid, eq46)
    p = with_omega(716.0)
    with raises(InvalidParameterError):
        char_poly(p, compute_equilibrium(p, 0.0))
    with raises(InvalidParameterError):
        routh_verdict(p, compute_equilibrium(p, 0.0))


def test_char_poly_reference(with_omega, eq46):
    cp = char_poly(with_omega(715.0), eq46)
    assert cp.a0 == approx(2.254e7, rel=5e-3)


def _expanded_det_coefficients(j):
    # det(lambda I - J) = lambda^3 - tr(J) lambda^2 + (sum of principal 2x2 minors) lambda - det(J)
    minors = sum(np.linalg.det(j[np.ix_(idx, idx)]) for idx in ([0, 1], [0, 2], [1, 2]))
    return [-np.trace(j), minors, -np.linalg.det(j)]


@mark.parametrize("omega", (1.0, 125.0, 715.5, 1e4, 1e5))
def test_char_poly_matches_determinant(with_omega, eq46, omega):
    p = with_omega(omega)
    cp = char_poly(p, eq46)
    expected = _expanded_det_coefficients(jacobian(p, eq46))
    assert [cp.a2, cp.a1, cp.a0] == approx(expected, rel=1e-9)


def test_char_poly_roots_match_numpy(with_omega, eq46):
    p = with_omega(716.0)
    cp = char_poly(p, eq46)
    roots = sorted(np.roots([1.0, cp.a2, cp.a1, cp.a0]), key=lambda z: (z.real, z.imag))
    expected = sorted(np.linalg.eigvals(jacobian(p, eq46)), key=lambda z: (z.real, z.imag))
    assert np.allclose(roots, expected, rtol=1e-9)


def test_zero_eigenvalue_at_power_transfer_limit(with_omega):
    p = with_omega(716.0)
    eq = compute_equilibrium(p, power_transfer_limit(p))
    assert char_poly(p, eq).a0 == approx(0.0, abs=1e-6)
    verdict = routh_verdict(p, eq)
    assert verdict.marginal
    assert not verdict.stable


@mark.parametrize("omega power expected".split(),
                  ((715.0, 45000.0, True),
                   (125.0, 46000.0, False),
                   (715.0, 46000.0, True)))
def test_routh_verdict_examples(with_omega, omega, power, expected):
    p = with_omega(omega)
    verdict = routh_verdict(p, compute_equilibrium(p, power))
    assert verdict.stable is expected
    assert not verdict.marginal


def test_routh_matches_hurwitz_terms(with_omega, eq46):
    for omega in (50.0, 125.0, 400.0, 716.0, 5000.0):
        p = with_omega(omega)
        verdict = routh_verdict(p, eq46)
        terms = char_poly(p, eq46).hurwitz_terms()
        assert verdict.stable == all(t > 0 for t in terms)


def test_thresholds_reference(with_omega, eq46):
    r = eq46.r_effective
    c_base = 1e-3 / (0.2 * r)

    at_opt = capacitance_thresholds(with_omega(2.0 * r / 1e-3), eq46)
    assert at_opt.c0 == approx(0.0116, rel=1e-2)

    at_125 = capacitance_thresholds(with_omega(125.0), eq46)
    assert at_125.c0 == approx(0.0321, rel=2e-3)

    at_max = capacitance_thresholds(with_omega(r / 1e-3), eq46)
    assert at_max.c0 == approx(c_base, rel=1e-9)


def test_thresholds_ignore_capacitance(with_omega, eq46):
    a = capacitance_thresholds(with_omega(716.0, capacitance=None), eq46)
    b = capacitance_thresholds(with_omega(716.0, capacitance=0.5), eq46)
    assert a == b


def test_thresholds_droop_limit(eq46):
    th = thresholds_at(math.inf, 1e-3, 0.2, eq46.r_effective)
    assert th.c2 == 0.0 and th.c0_minus == 0.0
    assert th.c1 == th.c0 == approx(1e-3 / (0.2 * eq46.r_effective))


@mark.parametrize("omega capacitance expected".split(),
                  ((716.0, 0.014, True),
                   (125.0, 0.014, False)))
def test_theorem1_examples(with_omega, eq46, omega, capacitance, expected):
    assert theorem1_stable(with_omega(omega, capacitance=capacitance), eq46) is expected


def test_theorem1_is_strict_at_c0(with_omega, eq46):
    c0 = capacitance_thresholds(with_omega(716.0), eq46).c0
    assert not theorem1_stable(with_omega(716.0, capacitance=c0), eq46)


def test_theorem1_no_load_is_stable(with_omega):
    p = with_omega(125.0, capacitance=1e-5)
    assert theorem1_stable(p, compute_equilibrium(p, 0.0))


@mark.parametrize("omega", (716.0, math.inf))
def test_transfer_limit_is_not_stable(with_omega, omega):
    p = with_omega(omega, capacitance=0.1)
    eq = compute_equilibrium(p, power_transfer_limit(p))
    assert not theorem1_stable(p, eq)
    assert not assess_stability(p, eq).stable
    if math.isinf(omega):
        assert not droop_limit_stable(p, eq)
    else:
        verdict = routh_verdict(p, eq)
        assert verdict.marginal and not verdict.stable


def test_eigenvalues_factored_cubic():
    triple = eigenvalues(CharPoly(a2=-6.0, a1=11.0, a0=-6.0))
    assert sorted(z.real for z in triple.as_complex()) == approx([1.0, 2.0, 3.0], abs=1e-12)
    assert all(root.im == 0.0 for root in triple.roots)
    assert triple.max_real_part == approx(3.0)


def test_eigenvalues_conjugate_pair_and_zero():
    roots = sorted(eigenvalues(CharPoly(a2=0.0, a1=1.0, a0=0.0)).as_complex(),
                   key=lambda z: z.imag)
    assert roots[0] == approx(-1j, abs=1e-12)
    assert roots[1] == approx(0j, abs=1e-12)
    assert roots[2] == approx(1j, abs=1e-12)


@mark.parametrize("a2 a1 a0".split(),
                  ((0.0, 1e-200, 0.0),
                   (-3.46e-129, 0.0, 0.0)))
def test_eigenvalues_tiny_coefficients(a2, a1, a0):
    triple = eigenvalues(CharPoly(a2=a2, a1=a1, a0=a0))
    assert len(triple.roots) == 3
    assert abs(triple.max_real_part) < 1e-100


def test_eigenvalues_reference_unstable(with_omega, eq46):
    p = with_omega(125.0)
    assert eigenvalues(char_poly(p, eq46)).max_real_part > 0.0


def test_assess_stability_shape(with_omega, eq46):
    report = assess_stability(with_omega(716.0), eq46)
    data = report.model_dump(mode='json')
    assert list(data) == ['stable', 'marginal', 'f2', 'f1', 'f0',
                          'c2', 'c1', 'c0_minus', 'c0', 'eigs']
    assert len(data['eigs']) == 3
    assert set(data['eigs'][0]) == {'re', 'im'}
    assert report.stable


def test_assess_stability_pure_droop(ref_grid, eq46):
    report = assess_stability(ref_grid, eq46)
    assert report.stable
    assert len(report.eigs) == 2
    assert report.c0 == approx(1e-3 / (0.2 * eq46.r_effective))
    assert all(e.re < 0 for e in report.eigs)
    assert droop_limit_stable(ref_grid, eq46)


def test_assess_stability_pure_droop_unstable(ref_grid, eq46):
    p = ref_grid.with_updates(capacitance=0.012)
    report = assess_stability(p, eq46)
    assert not report.stable
    assert not droop_limit_stable(p, eq46)
    assert max(e.re for e in report.eigs) > 0


@mark.parametrize("omega", (125.0, math.inf))
def test_assess_stability_no_load(with_omega, omega):
    p = with_omega(omega)
    report = assess_stability(p, compute_equilibrium(p, 0.0))
    assert report.stable and not report.marginal
    assert all(e.re < 0 for e in report.eigs)


def _thresholds_far_from(c, th, band=1e-3):
    return all(abs(c - ref) > band * abs(ref) for ref in th.as_list() if ref != 0.0)


@settings(max_examples=300, deadline=None)
@given(floats(min_value=10.0, max_value=1000.0),
       floats(min_value=0.01, max_value=1.0),
       floats(min_value=-5.0, max_value=-2.0),
       floats(min_value=-5.0, max_value=-1.0),
       floats(min_value=0.0, max_value=5.0),
       floats(min_value=0.01, max_value=0.99))
def test_oracle_agreement(v_nominal, droop_gain, log_l, log_c, log_w, fraction):
    p = GridParams(v_nominal=v_nominal, droop_gain=droop_gain, inductance=10 ** log_l,
                   capacitance=10 ** log_c, lpf_bandwidth=10 ** log_w)
    eq = compute_equilibrium(p, fraction * power_transfer_limit(p))
    th = capacitance_thresholds(p, eq)
    assume(_thresholds_far_from(p.capacitance, th))

    routh = routh_verdict(p, eq).stable
    oracle = max(np.linalg.eigvals(jacobian(p, eq)).real) < 0.0
    closed_form = eigenvalues(char_poly(p, eq)).max_real_part < 0.0
    assert routh == oracle == closed_form
    assert theorem1_stable(p, eq) == routh


@settings(max_examples=300, deadline=None)
@given(floats(min_value=0.01, max_value=1.0),
       floats(min_value=-5.0, max_value=-2.0),
       floats(min_value=0.0, max_value=5.0),
       floats(min_value=0.01, max_value=0.99))
def test_threshold_orderings(droop_gain, log_l, log_w, fraction):
    p = GridParams(v_nominal=200.0, droop_gain=droop_gain, inductance=10 ** log_l,
                   lpf_bandwidth=10 ** log_w)
    eq = compute_equilibrium(p, fraction * power_transfer_limit(p))
    th = capacitance_thresholds(p, eq)
    slack = 1e-9 * th.c0
    assert th.c0_minus <= th.c2 + slack
    assert th.c2 <= th.c0 + slack
    assert th.c1 < th.c0
