"""Sweep worker.

Each point trains one model into its own run directory and evaluates the
best snapshot, so points share no state and can run in separate processes.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..core.logging_config import bind_context, configure_logging, get_logger
from ..core.tracing import init_tracing
from ..repositories.matrix_repository import DatasetRepository
from ..schemas.evaluation import SweepRow
from ..schemas.training import SweepPoint, train_config_for
from ..services.baseline_service import fit_model
from ..services.ranking_service import evaluate
from ..services.report_service import sweep_rows

logger = get_logger("tasks.sweep")


def init_worker() -> None:
    """Process-pool initializer: logging and tracing per worker process."""
    configure_logging()
    init_tracing(role="sweep-worker")


def flat_number(value: float) -> int | float:
    return int(value) if float(value).is_integer() else value


def run_sweep_point(point: SweepPoint) -> list[SweepRow]:
    bind_context(command="sweep", param=point.param, value=point.value)
    values = {**point.config, point.param: flat_number(point.value)}
    cfg = train_config_for(point.model_kind, values)
    data = DatasetRepository().load(Path(point.data_dir))
    logger.info("sweep_point_started", run_dir=point.run_dir)
    result = fit_model(
        point.model_kind,
        data.train,
        data.val,
        cfg,
        run_dir=Path(point.run_dir),
        source={"data_dir": point.data_dir, "sweep_param": point.param},
    )
    heldout = data.val if point.split == "val" else data.test
    table = evaluate(
        result.params, heldout, point.r_list, batch_size=cfg.eval_batch_size
    )
    logger.info("sweep_point_finished", best_epoch=result.log.best_epoch)
    return sweep_rows(point.value, table)


def run_sweep(points: Sequence[SweepPoint], workers: int = 1) -> list[SweepRow]:
    """Rows of every point in input order; ``workers > 1`` uses processes."""
    if workers <= 1 or len(points) <= 1:
        return [row for point in points for row in run_sweep_point(point)]
    with ProcessPoolExecutor(max_workers=workers, initializer=init_worker) as pool:
        results = list(pool.map(run_sweep_point, points))
    return [row for rows in results for row in rows]
