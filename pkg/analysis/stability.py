# analysis/stability.py

"""Small-signal stability: Jacobian, characteristic polynomial, Routh-Hurwitz and thresholds."""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from analysis.errors import InvalidParameterError, InvariantViolationError
from config import SolverConfig
from models.schemas import (
    CharPoly, EigenTriple, Eigenvalue, Equilibrium, GridParams, RouthVerdict,
    StabilityReport, Thresholds,
)
from utils.cubic import (
    evaluate_monic_cubic, residual_scale, solve_monic_cubic, solve_monic_quadratic,
)

logger = logging.getLogger(__name__)


def _require_linearizable(p: GridParams, eq: Equilibrium) -> None:
    if p.is_droop_only:
        raise InvalidParameterError(
            "The third-order model needs a finite LPF bandwidth; "
            "use assess_stability or theorem1_stable for pure droop"
        )
    if not eq.is_loaded:
        raise InvalidParameterError("R_e is infinite at P = 0; the CPL linearization needs P > 0")


def jacobian_matrix(omega: float, droop_gain: float, inductance: float,
                    capacitance: float, r_effective: float) -> np.ndarray:
    """Jacobian of the state (v_ref, i, v) from raw constants."""
    return np.array([
        [-omega, -omega * droop_gain, 0.0],
        [1.0 / inductance, 0.0, -1.0 / inductance],
        [0.0, 1.0 / capacitance, 1.0 / (r_effective * capacitance)],
    ])


def jacobian(p: GridParams, eq: Equilibrium) -> np.ndarray:
    """
    Jacobian of the virtual-inertia system at an equilibrium.

    Args:
        p: Grid parameters with finite LPF bandwidth and a capacitance
        eq: Equilibrium at P > 0

    Returns:
        np.ndarray: 3x3 matrix over the state (v_ref, i, v)
    """
    _require_linearizable(p, eq)
    return jacobian_matrix(p.lpf_bandwidth, p.droop_gain, p.inductance,
                           p.require_capacitance(), eq.r_effective)


def char_poly(p: GridParams, eq: Equilibrium) -> CharPoly:
    """
    Monic characteristic polynomial of the Jacobian.

    Args:
        p: Grid parameters with finite LPF bandwidth and a capacitance
        eq: Equilibrium at P > 0

    Returns:
        CharPoly: (a2, a1, a0) of lambda^3 + a2 lambda^2 + a1 lambda + a0
    """
    _require_linearizable(p, eq)
    w, k, l = p.lpf_bandwidth, p.droop_gain, p.inductance
    c = p.require_capacitance()
    r = eq.r_effective
    lcr = l * c * r
    return CharPoly(
        a2=w - 1.0 / (r * c),
        a1=(r + w * k * c * r - w * l) / lcr,
        a0=(w * r - w * k) / lcr,
    )


def routh_values(omega: float, droop_gain: float, inductance: float, capacitance: float,
                 r_effective: float) -> Tuple[Tuple[float, float, float], Tuple[float, float, float]]:
    """
    Evaluate f2, f1, f0 together with the magnitude of their terms.

    Returns:
        Tuple (values, scales); a value is numerically zero when it is small
        compared with its scale.
    """
    w, k, l, c, r = omega, droop_gain, inductance, capacitance, r_effective
    t2 = (w * r * c, 1.0)
    t1 = (r, w * k * c * r, w * l)
    t0 = (w * w * k * c * c * r * r, w * w * l * c * r, w * l, r)
    values = (
        t2[0] - t2[1],
        t1[0] + t1[1] - t1[2],
        t0[0] - t0[1] + t0[2] - t0[3],
    )
    scales = (sum(t2), sum(t1), sum(t0))
    return values, scales


def routh_verdict(p: GridParams, eq: Equilibrium,
                  rel_tol: Optional[float] = None) -> RouthVerdict:
    """
    Routh-Hurwitz verdict through the expanded criterion f2, f1, f0 > 0.

    A value within rel_tol of zero (relative to its terms), or R_e = K (a zero
    eigenvalue), marks the verdict marginal and not stable.

    Args:
        p: Grid parameters with finite LPF bandwidth and a capacitance
        eq: Equilibrium at P > 0
        rel_tol: Marginal tolerance (default SolverConfig.REL_TOL)

    Returns:
        RouthVerdict
    """
    _require_linearizable(p, eq)
    tol = SolverConfig.REL_TOL if rel_tol is None else rel_tol
    values, scales = routh_values(p.lpf_bandwidth, p.droop_gain, p.inductance,
                                  p.require_capacitance(), eq.r_effective)
    marginal = any(abs(v) <= tol * s for v, s in zip(values, scales))
    marginal = marginal or _at_transfer_limit(eq, p.droop_gain, tol)
    stable = all(v > 0.0 for v in values) and not marginal
    if marginal:
        logger.warning("Marginal Routh-Hurwitz verdict at P = %g W", eq.power)
    return RouthVerdict(f2=values[0], f1=values[1], f0=values[2], stable=stable, marginal=marginal)


def _at_transfer_limit(eq: Equilibrium, droop_gain: float, tol: float) -> bool:
    return eq.r_effective - droop_gain <= tol * droop_gain


def thresholds_at(omega: float, inductance: float, droop_gain: float, r_effective: float,
                  rel_tol: Optional[float] = None) -> Thresholds:
    """
    Capacitance thresholds C2, C1, C0-, C0 for one bandwidth and operating point.

    An infinite omega returns the pure-droop limits (C2 = C0- = 0, C1 = C0 = L/(K R_e)).

    Args:
        omega: LPF bandwidth [rad/s], may be +inf
        inductance: L [H]
        droop_gain: K [Ohm]
        r_effective: R_e [Ohm], finite and >= K
        rel_tol: Tolerance for the ordering checks

    Returns:
        Thresholds

    Raises:
        InvariantViolationError: negative discriminant or broken ordering
    """
    tol = SolverConfig.REL_TOL if rel_tol is None else rel_tol
    l, k, r = inductance, droop_gain, r_effective
    c_base = l / (k * r)

    if math.isinf(omega):
        return Thresholds(c2=0.0, c1=c_base, c0_minus=0.0, c0=c_base)

    tau = 1.0 / omega
    # L^2 - 4K(L tau - R_e tau^2), regrouped so that R_e >= K keeps it non-negative
    disc = (l - 2.0 * k * tau) ** 2 + 4.0 * k * (r - k) * tau * tau
    if disc < 0.0:
        raise InvariantViolationError(f"Negative C0 discriminant {disc:g} (R_e < K?)")

    c0 = (l + math.sqrt(disc)) / (2.0 * k * r)
    # Product of the roots of f0(C) avoids cancellation in the smaller root.
    c0_minus = (omega * l - r) / (omega * omega * k * r * r * c0)
    c2 = tau / r
    c1 = c_base - tau / k

    slack = tol * c0
    if not (c0_minus <= c2 + slack and c2 <= c0 + slack):
        raise InvariantViolationError(
            f"Threshold ordering C0- <= C2 <= C0 broken: {c0_minus:g}, {c2:g}, {c0:g}"
        )
    if c1 > c0 + slack:
        raise InvariantViolationError(f"Threshold ordering C1 <= C0 broken: {c1:g} > {c0:g}")

    return Thresholds(c2=c2, c1=c1, c0_minus=c0_minus, c0=c0)


def c0_at(omega: float, inductance: float, droop_gain: float, r_effective: float) -> float:
    """Minimum stabilizing capacitance C0 without building a Thresholds record."""
    l, k, r = inductance, droop_gain, r_effective
    if math.isinf(omega):
        return l / (k * r)
    tau = 1.0 / omega
    disc = (l - 2.0 * k * tau) ** 2 + 4.0 * k * (r - k) * tau * tau
    return (l + math.sqrt(disc)) / (2.0 * k * r)


def capacitance_thresholds(p: GridParams, eq: Equilibrium,
                           rel_tol: Optional[float] = None) -> Thresholds:
    """
    Capacitance thresholds at the parameters' bandwidth; the capacitance itself is ignored.

    Args:
        p: Grid parameters (capacitance may be unset)
        eq: Equilibrium at P > 0
        rel_tol: Tolerance for the ordering checks

    Returns:
        Thresholds
    """
    if not eq.is_loaded:
        raise InvalidParameterError("Thresholds need P > 0 (finite R_e)")
    return thresholds_at(p.lpf_bandwidth, p.inductance, p.droop_gain, eq.r_effective, rel_tol)


def theorem1_stable(p: GridParams, eq: Equilibrium) -> bool:
    """
    Single-constraint local stability test C > C0.

    With pure droop C0 is its limit L/(K R_e); with no load every C is stable.
    At R_e = K (P = P_max) a zero eigenvalue makes the point not stable.
    """
    c = p.require_capacitance()
    if not eq.is_loaded:
        return True
    if _at_transfer_limit(eq, p.droop_gain, SolverConfig.REL_TOL):
        return False
    return c > c0_at(p.lpf_bandwidth, p.inductance, p.droop_gain, eq.r_effective)


def droop_limit_stable(p: GridParams, eq: Equilibrium) -> bool:
    """Pure droop stability: C > L/(K R_e) and R_e > K."""
    c = p.require_capacitance()
    if not eq.is_loaded:
        return True
    if _at_transfer_limit(eq, p.droop_gain, SolverConfig.REL_TOL):
        return False
    return c > p.inductance / (p.droop_gain * eq.r_effective)


def eigenvalues(cp: CharPoly, tol: Optional[float] = None) -> EigenTriple:
    """
    Roots of the characteristic cubic by closed form plus one Newton polish.

    Args:
        cp: Characteristic polynomial
        tol: Residual tolerance for the sanity check (default SolverConfig.EIG_TOL)

    Returns:
        EigenTriple
    """
    tol = SolverConfig.EIG_TOL if tol is None else tol
    roots = solve_monic_cubic(cp.a2, cp.a1, cp.a0)
    for z in roots:
        residual = abs(evaluate_monic_cubic(cp.a2, cp.a1, cp.a0, z))
        if residual > tol * residual_scale(cp.a2, cp.a1, cp.a0, z):
            logger.warning("Eigenvalue %s has residual %.3g above tolerance", z, residual)
    return _triple(roots)


def _triple(roots) -> EigenTriple:
    return EigenTriple(
        roots=[Eigenvalue.from_complex(z) for z in roots],
        max_real_part=max(z.real for z in roots),
    )


def _droop_eigenvalues(p: GridParams, eq: Equilibrium) -> EigenTriple:
    """Roots of the second-order pure-droop system (the filter pole is absent)."""
    c = p.require_capacitance()
    l, k = p.inductance, p.droop_gain
    inv_rc = 0.0 if not eq.is_loaded else 1.0 / (eq.r_effective * c)
    ratio = 0.0 if not eq.is_loaded else k / eq.r_effective
    return _triple(solve_monic_quadratic(k / l - inv_rc, (1.0 - ratio) / (l * c)))


def _no_load_char_poly(p: GridParams) -> CharPoly:
    w, k, l = p.lpf_bandwidth, p.droop_gain, p.inductance
    c = p.require_capacitance()
    return CharPoly(a2=w, a1=(1.0 + w * k * c) / (l * c), a0=w / (l * c))


def _near_any(value: float, references: List[float], band: float) -> bool:
    return any(abs(value - ref) <= band * abs(ref) for ref in references if ref != 0.0)


def assess_stability(p: GridParams, eq: Equilibrium,
                     rel_tol: Optional[float] = None) -> StabilityReport:
    """
    Full small-signal report: verdict, thresholds and eigenvalues.

    Pure droop and no-load operating points are reported through their limits:
    f-values are normalized (f2/omega, f1/omega, f0/omega^2 for pure droop;
    f2/R_e, f1/R_e, f0/R_e^2 without load) so that only their signs carry meaning.

    Args:
        p: Grid parameters with a capacitance
        eq: Equilibrium
        rel_tol: Marginal tolerance (default SolverConfig.REL_TOL)

    Returns:
        StabilityReport
    """
    tol = SolverConfig.REL_TOL if rel_tol is None else rel_tol
    c = p.require_capacitance()
    w, k, l = p.lpf_bandwidth, p.droop_gain, p.inductance

    if not eq.is_loaded:
        if p.is_droop_only:
            f_values = (c, k * c, k * c * c)
            eigs = _droop_eigenvalues(p, eq)
            limits = Thresholds(c2=0.0, c1=0.0, c0_minus=0.0, c0=0.0)
        else:
            f_values = (w * c, 1.0 + w * k * c, w * w * k * c * c)
            eigs = eigenvalues(_no_load_char_poly(p))
            limits = Thresholds(c2=0.0, c1=-1.0 / (w * k), c0_minus=0.0, c0=0.0)
        return StabilityReport(
            stable=True, marginal=False,
            f2=f_values[0], f1=f_values[1], f0=f_values[2],
            **limits.model_dump(), eigs=eigs.roots,
        )

    r = eq.r_effective
    thresholds = thresholds_at(w, l, k, r, tol)

    if p.is_droop_only:
        f_values = (r * c, k * c * r - l, c * r * (k * c * r - l))
        marginal = (_near_any(c, [thresholds.c0], tol)
                    or _at_transfer_limit(eq, k, tol))
        stable = droop_limit_stable(p, eq) and not marginal
        eigs = _droop_eigenvalues(p, eq)
        return StabilityReport(
            stable=stable, marginal=marginal,
            f2=f_values[0], f1=f_values[1], f0=f_values[2],
            **thresholds.model_dump(), eigs=eigs.roots,
        )

    verdict = routh_verdict(p, eq, tol)
    eigs = eigenvalues(char_poly(p, eq))
    return StabilityReport(
        stable=verdict.stable, marginal=verdict.marginal,
        f2=verdict.f2, f1=verdict.f1, f0=verdict.f0,
        **thresholds.model_dump(), eigs=eigs.roots,
    )
