# analysis/theorem_check.py

"""Numerical check of the argument reducing the Routh-Hurwitz conditions to C > C0."""
import logging
import math
from typing import Iterable, List, Optional

import numpy as np

from analysis.errors import InvalidParameterError
from analysis.stability import routh_values
from config import SolverConfig
from models.schemas import Equilibrium, GridParams, ProofReport

logger = logging.getLogger(__name__)


def default_tau_samples(n: int = 41) -> List[float]:
    """Log-spaced filter time constants tau = 1/omega from 1e-5 s to 1e-1 s."""
    return np.logspace(-5, -1, n).tolist()


def g_of_tau(tau: float, inductance: float, droop_gain: float, r_effective: float) -> float:
    """
    Gap g(tau) = C0(tau) - C1(tau) between the binding and the f1 threshold.

    Evaluated in a cancellation-free form so that g stays accurate near tau = 0.
    """
    l, k, r = inductance, droop_gain, r_effective
    sqrt_d = math.sqrt((l - 2.0 * k * tau) ** 2 + 4.0 * k * (r - k) * tau * tau)
    numerator = r * sqrt_d + r * l - 2.0 * k * l + 2.0 * k * r * tau
    return tau * numerator / (k * r * (sqrt_d + l))


def g_prime_of_tau(tau: float, inductance: float, droop_gain: float, r_effective: float) -> float:
    """Derivative g'(tau)."""
    l, k, r = inductance, droop_gain, r_effective
    sqrt_d = math.sqrt((l - 2.0 * k * tau) ** 2 + 4.0 * k * (r - k) * tau * tau)
    if sqrt_d == 0.0:
        # R_e = K and tau = L/(2K): kink between the one-sided slopes 0 and 2/K
        return 1.0 / k
    return (2.0 * tau * r - l) / (r * sqrt_d) + 1.0 / k


def theorem1_proof_check(p: GridParams, eq: Equilibrium,
                         tau_samples: Optional[Iterable[float]] = None,
                         rel_tol: Optional[float] = None) -> ProofReport:
    """
    Sample the quantities the single-constraint argument relies on.

    Checks at every tau: g(tau) > 0 (only g >= 0 when R_e = K, where g vanishes on
    [0, L/(2R_e)]), g'(tau) >= 0, and f0(C2) = K - R_e <= 0. Also reports g(0) and
    g'(0) = 1/K - 1/R_e.

    Args:
        p: Grid parameters (bandwidth and capacitance are not used)
        eq: Equilibrium at P > 0
        tau_samples: Time constants in (0, tau_max]; defaults to default_tau_samples()
        rel_tol: Tolerance (default SolverConfig.REL_TOL)

    Returns:
        ProofReport: Sampled curves, violation count and first violating tau
    """
    if not eq.is_loaded:
        raise InvalidParameterError("The proof check needs P > 0 (finite R_e)")
    tol = SolverConfig.REL_TOL if rel_tol is None else rel_tol
    taus = default_tau_samples() if tau_samples is None else [float(t) for t in tau_samples]
    if any(t <= 0.0 or not math.isfinite(t) for t in taus):
        raise InvalidParameterError("tau samples must be finite and > 0")

    l, k, r = p.inductance, p.droop_gain, eq.r_effective
    c_base = l / (k * r)
    strict = r > k * (1.0 + tol)

    g_values, g_primes, f0_values = [], [], []
    violations = 0
    first_violation = None

    for tau in taus:
        g = g_of_tau(tau, l, k, r)
        g_prime = g_prime_of_tau(tau, l, k, r)
        c2 = tau / r
        (_, _, f0), (_, _, f0_scale) = routh_values(1.0 / tau, k, l, c2, r)

        bad_g = g <= 0.0 if strict else g < -tol * c_base
        bad_g_prime = g_prime < -tol / k
        bad_f0 = f0 > tol * f0_scale
        if bad_g or bad_g_prime or bad_f0:
            violations += 1
            if first_violation is None:
                first_violation = tau
                logger.warning("Proof check violated at tau = %g (g = %g, g' = %g, f0(C2) = %g)",
                               tau, g, g_prime, f0)

        g_values.append(g)
        g_primes.append(g_prime)
        f0_values.append(f0)

    return ProofReport(
        tau=taus,
        g=g_values,
        g_prime=g_primes,
        f0_at_c2=f0_values,
        g_at_zero=g_of_tau(0.0, l, k, r),
        g_prime_at_zero=g_prime_of_tau(0.0, l, k, r),
        strict=strict,
        violations=violations,
        first_violation=first_violation,
    )
