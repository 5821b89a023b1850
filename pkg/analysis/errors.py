# analysis/errors.py

"""Exceptions raised by the analysis package."""
from typing import Optional


class GridAnalysisError(ValueError):
    """Base class for analysis errors."""


class InvalidParameterError(GridAnalysisError):
    """Inputs outside the admissible domain of an operation."""


class NoEquilibriumError(GridAnalysisError):
    """The CPL power exceeds the power transfer limit."""

    def __init__(self, power: float, p_max: float):
        self.power = power
        self.p_max = p_max
        super().__init__(
            f"No equilibrium: P = {power:g} W exceeds the power transfer limit "
            f"P_max = {p_max:g} W"
        )


class VoltageCollapseError(GridAnalysisError):
    """Capacitor voltage fell to the floor where the CPL model is invalid."""

    def __init__(self, v: float, v_floor: float, t: Optional[float] = None):
        self.v = v
        self.v_floor = v_floor
        self.t = t
        where = f" at t = {t:g} s" if t is not None else ""
        super().__init__(f"Voltage collapse{where}: v = {v:g} V <= v_floor = {v_floor:g} V")


class BracketError(GridAnalysisError):
    """A bisection bracket does not straddle the stability boundary."""


class InvariantViolationError(GridAnalysisError):
    """An internal invariant failed; indicates a bug upstream."""
