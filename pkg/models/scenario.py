# models/scenario.py

"""Pydantic models for time-domain simulation."""
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import ConfigDict, Field, model_validator

from config import SolverConfig
from models.schemas import FrozenModel, GridParams, MachineEmulationParams


class PowerStep(FrozenModel):
    """CPL power applied from `time` onwards."""
    time: float = Field(ge=0, allow_inf_nan=False)
    power: float = Field(ge=0, allow_inf_nan=False)


class Perturbation(FrozenModel):
    """Sinusoidal ripple added to the CPL power (pulsating point-of-load draw)."""
    amplitude: float = Field(ge=0, allow_inf_nan=False)  # [W]
    frequency: float = Field(gt=0, allow_inf_nan=False)  # [Hz]
    phase: float = 0.0  # [rad]
    seed: Optional[int] = None  # draws a random phase when set


class StateVector(FrozenModel):
    v_ref: float
    i: float
    v: float

    def as_tuple(self) -> tuple:
        return self.v_ref, self.i, self.v


class Scenario(FrozenModel):
    """A simulation run: plant, power schedule and integration settings."""
    params: GridParams
    # When set, the reference dynamics are integrated in machine-emulation form.
    machine: Optional[MachineEmulationParams] = None
    power_schedule: List[PowerStep] = Field(min_length=1)
    t_end: float = Field(gt=0, allow_inf_nan=False)
    dt: float = Field(default_factory=lambda: SolverConfig.DT, gt=0, allow_inf_nan=False)
    # None starts at the equilibrium of the first scheduled power.
    initial_state: Optional[StateVector] = None
    # Relative offset applied to the initial capacitor voltage.
    initial_offset: float = Field(default=0.0, gt=-1.0, allow_inf_nan=False)
    perturbation: Optional[Perturbation] = None
    decimation: int = Field(default=1, ge=1)

    @model_validator(mode='after')
    def _check(self) -> 'Scenario':
        if self.params.capacitance is None:
            raise ValueError("scenario params need a capacitance")
        times = [step.time for step in self.power_schedule]
        if times[0] != 0.0:
            raise ValueError("the power schedule must start at t = 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("power schedule times must be strictly increasing")
        if self.dt > self.t_end:
            raise ValueError("dt must not exceed t_end")
        if self.machine is not None and self.machine.v_nominal != self.params.v_nominal:
            raise ValueError("machine and grid nominal voltages differ")
        return self

    def power_at_step(self) -> List[tuple]:
        """Schedule as (step index, power) pairs aligned to the dt grid."""
        return [(int(round(step.time / self.dt)), step.power) for step in self.power_schedule]


class Verdict(str, Enum):
    CONVERGED = 'ConvergedToEquilibrium'
    OSCILLATION = 'SustainedOscillation'
    DIVERGED = 'Diverged'
    COLLAPSE = 'VoltageCollapse'


class Trajectory(FrozenModel):
    """Sampled (t, v_ref, i, v) rows with the terminal verdict."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray = Field(exclude=True)  # shape (n, 4)
    verdict: Verdict
    final_deviation: float
    v_equilibrium: Optional[float] = None
    dt: float
    decimation: int = 1
    terminated_early: bool = False
    collapse_time: Optional[float] = None
    seed: Optional[int] = None

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def v_ref(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def i(self) -> np.ndarray:
        return self.samples[:, 2]

    @property
    def v(self) -> np.ndarray:
        return self.samples[:, 3]

    def metadata(self) -> dict:
        """JSON sidecar content."""
        return self.model_dump(mode='json')


class RampStep(FrozenModel):
    """Outcome of one dwell window of a power ramp."""
    power: float
    start: float
    end: float
    verdict: Verdict
    final_deviation: float


class RampReport(FrozenModel):
    steps: List[RampStep]
    observed_instability_power: Optional[float] = None
    predicted_critical_power: Optional[float] = None
