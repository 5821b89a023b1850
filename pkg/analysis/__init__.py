# analysis/__init__.py

from .errors import (
    BracketError, GridAnalysisError, InvalidParameterError, InvariantViolationError,
    NoEquilibriumError, VoltageCollapseError,
)
from .equilibrium import (
    compute_equilibrium, equivalent_lpf, grid_params_from_machine,
    machine_emulation_from_lpf, power_transfer_limit,
)
from .stability import (
    assess_stability, capacitance_thresholds, char_poly, droop_limit_stable,
    eigenvalues, jacobian, routh_verdict, theorem1_stable,
)
from .theorem_check import theorem1_proof_check
from .design import (
    bandwidth_window, classify_inertia, design_for, large_inertia_capacitance,
    large_inertia_error,
)
from .simulator import critical_power, ramp_schedule, simulate, simulate_ramp, step_dynamics
from .sweep import SweepRunner
from .verification import run_verification

__version__ = "0.1.0"

__all__ = [
    'BracketError', 'GridAnalysisError', 'InvalidParameterError',
    'InvariantViolationError', 'NoEquilibriumError', 'VoltageCollapseError',
    'compute_equilibrium', 'equivalent_lpf', 'grid_params_from_machine',
    'machine_emulation_from_lpf', 'power_transfer_limit',
    'assess_stability', 'capacitance_thresholds', 'char_poly', 'droop_limit_stable',
    'eigenvalues', 'jacobian', 'routh_verdict', 'theorem1_stable',
    'theorem1_proof_check',
    'bandwidth_window', 'classify_inertia', 'design_for',
    'large_inertia_capacitance', 'large_inertia_error',
    'critical_power', 'ramp_schedule', 'simulate', 'simulate_ramp', 'step_dynamics',
    'SweepRunner', 'run_verification',
]
