# models/__init__.py

from .schemas import (
    BandwidthWindow, CharPoly, EigenTriple, Eigenvalue, Equilibrium, GridParams,
    InertiaDesign, MachineEmulationParams, ProofReport, RouthVerdict,
    StabilityReport, Thresholds,
)
from .scenario import (
    Perturbation, PowerStep, RampReport, RampStep, Scenario, StateVector,
    Trajectory, Verdict,
)
from .sweep import (
    CellVerdict, CurveRow, MapCell, StabilityMap, SweepAxis, SweepGrid,
    VerificationReport,
)

__all__ = [
    'BandwidthWindow', 'CharPoly', 'EigenTriple', 'Eigenvalue', 'Equilibrium',
    'GridParams', 'InertiaDesign', 'MachineEmulationParams', 'ProofReport',
    'RouthVerdict', 'StabilityReport', 'Thresholds',
    'Perturbation', 'PowerStep', 'RampReport', 'RampStep', 'Scenario',
    'StateVector', 'Trajectory', 'Verdict',
    'CellVerdict', 'CurveRow', 'MapCell', 'StabilityMap', 'SweepAxis',
    'SweepGrid', 'VerificationReport',
]
