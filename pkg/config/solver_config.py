"""Numerical settings for the stability analysis and the simulator."""
import os
from dotenv import load_dotenv

load_dotenv()


class SolverConfig:
    """Solver tolerances and simulation defaults."""

    REL_TOL = float(os.getenv('VI_STAB_REL_TOL', 1e-9))
    MARGINAL_BAND = float(os.getenv('VI_STAB_MARGINAL_BAND', 1e-3))
    EIG_TOL = float(os.getenv('VI_STAB_EIG_TOL', 1e-8))

    DT = float(os.getenv('VI_STAB_DT', 1e-6))
    V_FLOOR_RATIO = float(os.getenv('VI_STAB_V_FLOOR_RATIO', 0.05))
    CONVERGE_TOL = float(os.getenv('VI_STAB_CONVERGE_TOL', 1e-3))
    DIVERGE_RATIO = float(os.getenv('VI_STAB_DIVERGE_RATIO', 0.5))
    OSCILLATION_TOL = float(os.getenv('VI_STAB_OSCILLATION_TOL', 1e-3))

    BISECT_TOL = float(os.getenv('VI_STAB_BISECT_TOL', 1.0))

    @classmethod
    def get_classification_params(cls) -> dict:
        """
        Get the trajectory verdict thresholds as a dictionary.

        Returns:
            dict: Thresholds used by the simulator's verdict rules
        """
        return {
            'converge_tol': cls.CONVERGE_TOL,
            'diverge_ratio': cls.DIVERGE_RATIO,
            'oscillation_tol': cls.OSCILLATION_TOL,
            'v_floor_ratio': cls.V_FLOOR_RATIO,
        }
