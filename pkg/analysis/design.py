# analysis/design.py

"""Virtual inertia sizing: baseline, optimal, maximum and large-inertia regimes."""
import logging
import math
from typing import Dict, Optional

from analysis.errors import InvalidParameterError, InvariantViolationError
from analysis.stability import c0_at
from config import SolverConfig
from models.schemas import BandwidthWindow, Equilibrium, InertiaDesign
from utils.number_utils import NumberUtils

logger = logging.getLogger(__name__)

REGIMES = ('droop', 'light', 'moderate', 'large')

# Below omega_opt / 5 the large-inertia approximation stays within about 10 %.
APPROXIMATION_WINDOW = 5.0


def design_for(eq: Equilibrium, inductance: float, droop_gain: float,
               rel_tol: Optional[float] = None) -> InertiaDesign:
    """
    Size virtual inertia for one operating point.

    Args:
        eq: Equilibrium at P > 0
        inductance: L [H]
        droop_gain: K [Ohm]
        rel_tol: Tolerance for the invariant checks (default SolverConfig.REL_TOL)

    Returns:
        InertiaDesign: C_base = L/(K R_e), omega_opt = 2 R_e/L,
        C_opt = L(1 + sqrt(1 - K/R_e))/(2 K R_e), omega_max = R_e/L

    Raises:
        InvalidParameterError: P = 0, where every bandwidth is stable and C_base degenerates to 0
        InvariantViolationError: one of the design invariants failed
    """
    if not eq.is_loaded:
        raise InvalidParameterError("Inertia design needs P > 0; at no load C_base is 0")
    tol = SolverConfig.REL_TOL if rel_tol is None else rel_tol
    l, k, r = inductance, droop_gain, eq.r_effective

    c_base = l / (k * r)
    omega_opt = 2.0 * r / l
    c_opt = l * (1.0 + math.sqrt(max(1.0 - k / r, 0.0))) / (2.0 * k * r)
    omega_max = r / l

    if c_opt > c_base * (1.0 + tol):
        raise InvariantViolationError(f"C_opt = {c_opt:g} exceeds C_base = {c_base:g}")
    if not NumberUtils.rel_close(2.0 * omega_max, omega_opt, tol):
        raise InvariantViolationError("omega_max must be half of omega_opt")
    if not NumberUtils.rel_close(c0_at(omega_max, l, k, r), c_base, tol):
        raise InvariantViolationError("C0(omega_max) must equal C_base")

    return InertiaDesign(
        c_base=c_base,
        omega_opt=omega_opt,
        c_opt=c_opt,
        omega_max=omega_max,
        large_inertia_gain=1.0 / math.sqrt(k * r),
    )


def large_inertia_capacitance(omega: float, droop_gain: float, r_effective: float) -> float:
    """
    Approximate C0 when R_e/omega^2 dominates: 1/(omega sqrt(K R_e)).

    Only meaningful for small omega; tends to 0 as omega grows, where the exact C0
    tends to C_base instead.
    """
    if omega <= 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    if math.isinf(omega):
        return 0.0
    return 1.0 / (omega * math.sqrt(droop_gain * r_effective))


def large_inertia_error(omega: float, eq: Equilibrium, inductance: float,
                        droop_gain: float) -> Dict[str, float]:
    """
    Large-inertia approximation next to the exact C0.

    Args:
        omega: LPF bandwidth [rad/s]
        eq: Equilibrium at P > 0
        inductance: L [H]
        droop_gain: K [Ohm]

    Returns:
        Dict with 'approx', 'exact' and 'relative_error' (|approx - exact| / exact)
    """
    if not eq.is_loaded:
        raise InvalidParameterError("Needs P > 0 (finite R_e)")
    r = eq.r_effective
    approx = large_inertia_capacitance(omega, droop_gain, r)
    exact = c0_at(omega, inductance, droop_gain, r)
    omega_opt = 2.0 * r / inductance
    if omega > omega_opt / APPROXIMATION_WINDOW:
        logger.warning("omega = %g is above omega_opt/%g; the large-inertia "
                       "approximation is not reliable there", omega, APPROXIMATION_WINDOW)
    return {
        'approx': approx,
        'exact': exact,
        'relative_error': abs(approx - exact) / exact,
    }


def bandwidth_window(capacitance: float, eq: Equilibrium, inductance: float,
                     droop_gain: float) -> BandwidthWindow:
    """
    LPF bandwidths for which a fixed capacitance satisfies C > C0(omega).

    f0 read as a quadratic in omega is (K C^2 R_e^2 - L C R_e) omega^2 + L omega - R_e.
    Its smaller positive root is the lowest admissible bandwidth, i.e. the
    largest virtual inertia the bus carries; above C_base there is no upper limit.

    Args:
        capacitance: Bus capacitance C [F]
        eq: Equilibrium at P > 0
        inductance: L [H]
        droop_gain: K [Ohm]

    Returns:
        BandwidthWindow: empty when C <= C_opt
    """
    if capacitance <= 0:
        raise InvalidParameterError(f"capacitance must be > 0, got {capacitance}")
    if not eq.is_loaded:
        return BandwidthWindow(capacitance=capacitance, omega_lo=0.0, omega_hi=math.inf)

    l, k, r, c = inductance, droop_gain, eq.r_effective, capacitance
    a = c * r * (k * c * r - l)
    disc = l * l + 4.0 * a * r
    if disc <= 0.0:
        return BandwidthWindow(capacitance=c)

    root = math.sqrt(disc)
    omega_lo = 2.0 * r / (l + root)
    omega_hi = math.inf if a >= 0.0 else (l + root) / (-2.0 * a)
    if omega_hi <= omega_lo:
        return BandwidthWindow(capacitance=c)
    return BandwidthWindow(capacitance=c, omega_lo=omega_lo, omega_hi=omega_hi)


def classify_inertia(omega: float, design: InertiaDesign) -> str:
    """
    Name the virtual inertia regime of a bandwidth.

    Returns:
        'droop' (omega = inf), 'light' (omega > omega_opt), 'moderate'
        (omega_max <= omega <= omega_opt) or 'large' (omega < omega_max,
        where C0 exceeds C_base)
    """
    if omega <= 0:
        raise InvalidParameterError(f"omega must be > 0, got {omega}")
    if math.isinf(omega):
        return 'droop'
    if omega > design.omega_opt:
        return 'light'
    if omega >= design.omega_max:
        return 'moderate'
    return 'large'
