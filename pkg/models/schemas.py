# models/schemas.py

"""Pydantic models for grid parameters and analysis results."""
import math
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from utils.number_utils import NumberUtils


class FrozenModel(BaseModel):
    """Immutable value type."""
    model_config = ConfigDict(frozen=True)


class GridParams(FrozenModel):
    """Physical and control constants of the representative DC grid."""
    v_nominal: float = Field(gt=0, allow_inf_nan=False)
    droop_gain: float = Field(gt=0, allow_inf_nan=False)
    inductance: float = Field(gt=0, allow_inf_nan=False)
    capacitance: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    # +inf selects plain droop control (no virtual inertia)
    lpf_bandwidth: float = Field(default=math.inf, gt=0)

    @field_validator('lpf_bandwidth', mode='before')
    @classmethod
    def _parse_bandwidth(cls, value):
        if isinstance(value, (str, int, float)):
            return NumberUtils.parse_float(value)
        return value

    @field_serializer('lpf_bandwidth', when_used='json')
    def _dump_bandwidth(self, value: float) -> Union[float, str]:
        return NumberUtils.dump_float(value)

    @property
    def is_droop_only(self) -> bool:
        return math.isinf(self.lpf_bandwidth)

    def require_capacitance(self) -> float:
        """
        Get the bus capacitance, failing if it was left unspecified.

        Returns:
            float: Capacitance [F]
        """
        if self.capacitance is None:
            from analysis.errors import InvalidParameterError
            raise InvalidParameterError("This operation needs the bus capacitance C")
        return self.capacitance

    def with_updates(self, **changes) -> 'GridParams':
        """Return a validated copy with some fields replaced."""
        return GridParams.model_validate({**self.model_dump(), **changes})


class MachineEmulationParams(FrozenModel):
    """Virtual inertia emulating a DC machine: C_v V_n dv_ref/dt = -D_b (v_ref - V_n) - i."""
    virtual_inertia: float = Field(gt=0, allow_inf_nan=False)
    damping_factor: float = Field(gt=0, allow_inf_nan=False)
    v_nominal: float = Field(gt=0, allow_inf_nan=False)


class Equilibrium(FrozenModel):
    """Steady-state operating point for a CPL power P."""
    v_cap: float
    current: float
    v_ref: float
    r_effective: float  # +inf at P = 0
    power: float

    @field_serializer('r_effective', when_used='json')
    def _dump_r_effective(self, value: float) -> Union[float, str]:
        return NumberUtils.dump_float(value)

    @property
    def is_loaded(self) -> bool:
        return self.power > 0.0


class CharPoly(FrozenModel):
    """Coefficients of lambda^3 + a2 lambda^2 + a1 lambda + a0."""
    a2: float = Field(allow_inf_nan=False)
    a1: float = Field(allow_inf_nan=False)
    a0: float = Field(allow_inf_nan=False)

    def hurwitz_terms(self) -> tuple:
        """The three Routh-Hurwitz expressions (a2, a1, a2*a1 - a0)."""
        return self.a2, self.a1, self.a2 * self.a1 - self.a0


class RouthVerdict(FrozenModel):
    """Values of f2, f1, f0 and the resulting verdict."""
    f2: float
    f1: float
    f0: float
    stable: bool
    marginal: bool = False


class Thresholds(FrozenModel):
    """Capacitance bounds from the Routh-Hurwitz conditions [F]."""
    c2: float
    c1: float
    c0_minus: float
    c0: float

    def as_list(self) -> List[float]:
        return [self.c2, self.c1, self.c0_minus, self.c0]


class Eigenvalue(FrozenModel):
    re: float
    im: float

    @classmethod
    def from_complex(cls, z: complex) -> 'Eigenvalue':
        return cls(re=z.real, im=z.imag)

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


class EigenTriple(FrozenModel):
    """Roots of the characteristic polynomial."""
    roots: List[Eigenvalue]
    max_real_part: float

    def as_complex(self) -> List[complex]:
        return [root.as_complex() for root in self.roots]


class StabilityReport(FrozenModel):
    """Verdict, thresholds and eigenvalues in one JSON-ready record."""
    stable: bool
    marginal: bool
    f2: float
    f1: float
    f0: float
    c2: float
    c1: float
    c0_minus: float
    c0: float
    eigs: List[Eigenvalue]


class InertiaDesign(FrozenModel):
    """Virtual inertia sizing for one operating point."""
    c_base: float
    omega_opt: float
    c_opt: float
    omega_max: float
    # 1/sqrt(K R_e); C_large(omega) = large_inertia_gain / omega
    large_inertia_gain: float = Field(exclude=True)

    def c_large(self, omega: float) -> float:
        """Large-inertia approximation of C0 at bandwidth omega (valid for small omega)."""
        return self.large_inertia_gain / omega


class BandwidthWindow(FrozenModel):
    """LPF bandwidths for which a given capacitance satisfies C > C0(omega)."""
    capacitance: float
    omega_lo: Optional[float] = None
    omega_hi: Optional[float] = None

    @field_serializer('omega_hi', when_used='json')
    def _dump_omega_hi(self, value: Optional[float]):
        return None if value is None else NumberUtils.dump_float(value)

    @property
    def empty(self) -> bool:
        return self.omega_lo is None

    def contains(self, omega: float) -> bool:
        if self.empty:
            return False
        return self.omega_lo < omega < self.omega_hi


class ProofReport(FrozenModel):
    """Sampled curves and checks for the single-constraint stability theorem."""
    tau: List[float]
    g: List[float]
    g_prime: List[float]
    f0_at_c2: List[float]
    g_at_zero: float
    g_prime_at_zero: float
    strict: bool
    violations: int
    first_violation: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0
