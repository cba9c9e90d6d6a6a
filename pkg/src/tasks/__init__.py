"""Units of work that can run in worker processes."""

from .sweep_tasks import init_worker, run_sweep, run_sweep_point

__all__ = ["init_worker", "run_sweep", "run_sweep_point"]
