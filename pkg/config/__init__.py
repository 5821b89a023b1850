# config/__init__.py

from .solver_config import SolverConfig
from .sweep_config import get_thread_count, get_output_dir
from .logging_config import configure_logging

__all__ = ['SolverConfig', 'get_thread_count', 'get_output_dir', 'configure_logging']
