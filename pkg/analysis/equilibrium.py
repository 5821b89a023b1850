# analysis/equilibrium.py

"""Equilibrium of the droop/virtual-inertia source feeding a constant power load."""
import logging
import math
from typing import Optional, Tuple

from analysis.errors import InvalidParameterError, NoEquilibriumError
from models.schemas import Equilibrium, GridParams, MachineEmulationParams

logger = logging.getLogger(__name__)


def equivalent_lpf(m: MachineEmulationParams) -> Tuple[float, float]:
    """
    Map machine-emulation virtual inertia onto the LPF form.

    Args:
        m: Emulated inertia C_v, damping D_b and nominal voltage V_n

    Returns:
        Tuple (lpf_bandwidth, droop_gain) with omega = D_b/(C_v V_n) and K = 1/D_b
    """
    if m.virtual_inertia <= 0 or m.damping_factor <= 0 or m.v_nominal <= 0:
        raise InvalidParameterError("Machine-emulation parameters must be positive")
    omega = m.damping_factor / (m.virtual_inertia * m.v_nominal)
    droop_gain = 1.0 / m.damping_factor
    return omega, droop_gain


def machine_emulation_from_lpf(lpf_bandwidth: float, droop_gain: float,
                               v_nominal: float) -> MachineEmulationParams:
    """
    Inverse of equivalent_lpf: D_b = 1/K, C_v = D_b/(omega V_n).

    Args:
        lpf_bandwidth: Finite LPF bandwidth [rad/s]
        droop_gain: Droop gain K [Ohm]
        v_nominal: Nominal voltage [V]

    Returns:
        MachineEmulationParams: Equivalent emulated machine
    """
    if not math.isfinite(lpf_bandwidth) or lpf_bandwidth <= 0:
        raise InvalidParameterError(
            f"Machine emulation needs a finite positive bandwidth, got {lpf_bandwidth}"
        )
    if droop_gain <= 0 or v_nominal <= 0:
        raise InvalidParameterError("Droop gain and nominal voltage must be positive")
    damping = 1.0 / droop_gain
    return MachineEmulationParams(
        virtual_inertia=damping / (lpf_bandwidth * v_nominal),
        damping_factor=damping,
        v_nominal=v_nominal,
    )


def grid_params_from_machine(m: MachineEmulationParams, inductance: float,
                             capacitance: Optional[float] = None) -> GridParams:
    """Build LPF-form grid parameters from a machine-emulation controller."""
    omega, droop_gain = equivalent_lpf(m)
    return GridParams(
        v_nominal=m.v_nominal,
        droop_gain=droop_gain,
        inductance=inductance,
        capacitance=capacitance,
        lpf_bandwidth=omega,
    )


def power_transfer_limit(p: GridParams) -> float:
    """Largest CPL power with a droop equilibrium: P_max = V_n^2 / (4K)."""
    return p.v_nominal ** 2 / (4.0 * p.droop_gain)


def compute_equilibrium(p: GridParams, power: float) -> Equilibrium:
    """
    Compute the high-voltage equilibrium for a CPL drawing `power`.

    The LPF bandwidth does not enter: virtual inertia leaves equilibria unchanged.
    P = P_max is accepted (marginal existence, R_e = K).

    Args:
        p: Grid parameters
        power: CPL power [W], 0 <= power <= P_max

    Returns:
        Equilibrium: Operating point (R_e = +inf when power is 0)

    Raises:
        InvalidParameterError: power is negative or not finite
        NoEquilibriumError: power exceeds P_max
    """
    if not math.isfinite(power) or power < 0:
        raise InvalidParameterError(f"CPL power must be finite and >= 0, got {power}")

    v_n, k = p.v_nominal, p.droop_gain
    p_max = power_transfer_limit(p)
    if power > p_max:
        raise NoEquilibriumError(power, p_max)

    disc = max(v_n * v_n - 4.0 * power * k, 0.0)
    v_e = (v_n + math.sqrt(disc)) / 2.0

    if power == 0.0:
        current = 0.0
        r_e = math.inf
    else:
        current = power / v_e
        r_e = v_e * v_e / power
        # Rounding can leave R_e a hair below K at P = P_max.
        r_e = max(r_e, k)

    if power == p_max:
        logger.debug("Equilibrium at the power transfer limit (R_e = K = %g)", k)

    return Equilibrium(v_cap=v_e, current=current, v_ref=v_e, r_effective=r_e, power=power)
