# models/sweep.py

"""Pydantic models for parameter sweeps and the verification gate."""
import math
from enum import Enum
from typing import List, Literal, Optional

import numpy as np
from pydantic import Field, model_validator

from models.schemas import FrozenModel, GridParams
from utils.number_utils import NumberUtils

AxisName = Literal['omega', 'capacitance', 'power']
AxisScale = Literal['linear', 'log']


class SweepAxis(FrozenModel):
    """One swept quantity."""
    name: AxisName
    scale: AxisScale = 'linear'
    min: float = Field(allow_inf_nan=False)
    max: float = Field(allow_inf_nan=False)
    n_points: int = Field(ge=2)

    @model_validator(mode='after')
    def _check(self) -> 'SweepAxis':
        if not self.min < self.max:
            raise ValueError(f"axis {self.name}: min must be < max")
        if self.scale == 'log' and self.min <= 0:
            raise ValueError(f"axis {self.name}: log scale needs min > 0")
        if self.name in ('omega', 'capacitance') and self.min <= 0:
            raise ValueError(f"axis {self.name}: values must be > 0")
        if self.name == 'power' and self.min < 0:
            raise ValueError("axis power: values must be >= 0")
        return self

    def values(self) -> List[float]:
        if self.scale == 'log':
            return np.geomspace(self.min, self.max, self.n_points).tolist()
        return np.linspace(self.min, self.max, self.n_points).tolist()

    @classmethod
    def parse(cls, text: str) -> 'SweepAxis':
        """
        Parse an axis written as NAME:SCALE:MIN:MAX:N.

        Examples:
            omega:log:10:1e5:1000
            capacitance:linear:0.005:0.04:50
        """
        parts = text.split(':')
        if len(parts) != 5:
            raise ValueError(f"axis must look like NAME:SCALE:MIN:MAX:N, got {text!r}")
        name, scale, lo, hi, n = parts
        return cls(name=name, scale=scale, min=NumberUtils.parse_float(lo),
                   max=NumberUtils.parse_float(hi), n_points=int(n))


class SweepGrid(FrozenModel):
    """Swept axes plus the fixed remainder of the operating point."""
    axis1: SweepAxis
    axis2: Optional[SweepAxis] = None
    fixed: GridParams
    power: float = Field(default=0.0, ge=0, allow_inf_nan=False)

    @model_validator(mode='after')
    def _check(self) -> 'SweepGrid':
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("the two sweep axes must differ")
        return self


class CurveRow(FrozenModel):
    """One bandwidth of the C0(omega) curve [F]."""
    omega: float
    c2: float
    c1: float
    c0_minus: float
    c0: float
    c_base: float


class CellVerdict(str, Enum):
    STABLE = 'stable'
    MARGINAL = 'marginal'
    UNSTABLE = 'unstable'
    NO_EQUILIBRIUM = 'no-equilibrium'


class MapCell(FrozenModel):
    x: float
    y: float
    verdict: CellVerdict
    oracle_stable: Optional[bool] = None

    @property
    def oracle_agrees(self) -> Optional[bool]:
        if self.oracle_stable is None or self.verdict in (CellVerdict.MARGINAL,
                                                          CellVerdict.NO_EQUILIBRIUM):
            return None
        return self.oracle_stable == (self.verdict == CellVerdict.STABLE)


class StabilityMap(FrozenModel):
    """Row-major raster: axis1 varies slowest."""
    axis1: SweepAxis
    axis2: SweepAxis
    cells: List[MapCell]

    def verdict_grid(self) -> List[List[CellVerdict]]:
        n = self.axis2.n_points
        return [[cell.verdict for cell in self.cells[row * n:(row + 1) * n]]
                for row in range(self.axis1.n_points)]

    def oracle_disagreements(self) -> int:
        return sum(1 for cell in self.cells if cell.oracle_agrees is False)


class VerificationReport(FrozenModel):
    """Counts from the randomized property suites; every count must be zero."""
    seed: int
    samples: int
    oracle_disagreements: int
    theorem_disagreements: int
    ordering_violations: int
    proof_violations: int
    residual_failures: int
    rk4_order_ratio: float = math.nan

    @property
    def passed(self) -> bool:
        counts = (self.oracle_disagreements, self.theorem_disagreements,
                  self.ordering_violations, self.proof_violations, self.residual_failures)
        order_ok = 8.0 <= self.rk4_order_ratio <= 32.0
        return all(count == 0 for count in counts) and order_ok
