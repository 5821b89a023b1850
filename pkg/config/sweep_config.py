# config/sweep_config.py

"""Sweep parallelism and output location."""
import os


def get_thread_count() -> int:
    """
    Number of worker threads for grid sweeps.

    VI_STAB_THREADS caps the pool; 0 or unset means one thread per CPU.
    """
    raw = os.getenv("VI_STAB_THREADS", "0").strip() or "0"
    requested = int(raw)
    if requested < 0:
        raise ValueError(f"VI_STAB_THREADS must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def get_output_dir() -> str:
    """Get the default directory for CSV/JSON artifacts."""
    return os.getenv("VI_STAB_OUTPUT_DIR", "results")
