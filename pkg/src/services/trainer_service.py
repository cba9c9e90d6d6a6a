"""Alternating training: network descent with codes fixed, then ADMM.

Per batch the sparse codes of the sampled rows are solved first (codes
restart at zero, the dictionary persists), the network takes one Adam step
on the composite loss with S and A fixed, and every ``admm_every`` batches
the codes and the dictionary are refreshed on that batch's latent codes.
Each epoch ends with a validation pass that drives early stopping and the
best-snapshot checkpoint.

Random streams are derived from ``cfg.seed``: ``seed`` initialises the
network, ``seed + 1`` the dictionary and ``seed + 2`` everything drawn
during training (shuffles, dropout masks, latent noise, prior samples).
"""

from __future__ import annotations

import math
import time
from collections.abc import Mapping
from pathlib import Path
from typing import Any, NamedTuple, Protocol

import numpy as np
from numpy.typing import NDArray

from ..core.logging_config import get_logger
from ..core.metrics import TrainingMetrics
from ..core.tracing import get_tracer
from ..models.click_matrix import ClickMatrix, HeldoutPair
from ..models.network import MlpParams
from ..models.sparse_code import SparseCodeState
from ..repositories.checkpoint_repository import Checkpoint, CheckpointRepository
from ..repositories.run_log_repository import RunLogRepository
from ..schemas.objective import LossBreakdown, ObjectiveConfig
from ..schemas.sparse import AdmmReport
from ..schemas.training import (
    AdmmRecord,
    EpochRecord,
    ModelKind,
    StepRecord,
    TrainConfig,
    TrainLog,
)
from .exceptions import ConfigError, DataError, DivergenceError
from .network_service import backward, forward, init_params, predict_scores
from .objective_service import TotalLoss, total_loss
from .optimizer_service import Adam
from .ranking_service import evaluate
from .sparse_code_service import init_sparse, reset_codes, update_a, update_s

Array = NDArray[np.float64]

logger = get_logger(__name__)

__all__ = [
    "AwaeStepper",
    "StepOutcome",
    "TrainResult",
    "load_best",
    "loss_and_grads",
    "make_batches",
    "predict_scores",
    "run_training",
    "train",
]


class TrainResult(NamedTuple):
    params: MlpParams
    sparse: SparseCodeState | None
    log: TrainLog


class StepOutcome(NamedTuple):
    breakdown: LossBreakdown
    admm: list[tuple[str, AdmmReport]]


class Stepper(Protocol):
    """One optimizer step per call; owns the parameters it updates."""

    params: MlpParams

    def step(self, x: Array, rng: np.random.Generator, step: int) -> StepOutcome: ...

    def snapshot(self) -> tuple[MlpParams, SparseCodeState | None]: ...

    def extras(self) -> dict[str, Array]: ...


def guard_finite(breakdown: LossBreakdown, step: int) -> None:
    values = breakdown.model_dump()
    bad = [name for name, value in values.items() if not math.isfinite(value)]
    if bad:
        logger.error("training_diverged", step=step, terms=bad)
        raise DivergenceError(bad, step)


def loss_and_grads(
    params: MlpParams,
    x: Array,
    objective: ObjectiveConfig,
    *,
    s_batch: Array | None = None,
    a: Array | None = None,
    prior_batch: Array | None = None,
    rng: np.random.Generator | None = None,
    input_dropout: float = 0.0,
    noise_std: float = 0.0,
    training: bool = False,
) -> tuple[TotalLoss, dict[str, Array]]:
    """Composite loss of one batch and the gradient of every tensor."""
    tape = forward(
        params,
        x,
        input_dropout=input_dropout,
        noise_std=noise_std,
        rng=rng,
        training=training,
    )
    total = total_loss(
        x,
        tape,
        objective,
        output_activation=params.output_activation,
        s_batch=s_batch,
        a=a,
        prior_batch=prior_batch,
    )
    return total, backward(params, tape, total.grad_output, total.grad_z)


class AwaeStepper:
    """Network step with the codes fixed, then the ADMM refresh."""

    def __init__(
        self, params: MlpParams, cfg: TrainConfig, sparse: SparseCodeState | None
    ) -> None:
        self.params = params
        self.cfg = cfg
        self.sparse = sparse
        self.optimizer = Adam(params, cfg.lr, cfg.betas, cfg.eps)
        self.batches = 0

    def _update_s(self, z: Array) -> AdmmReport:
        assert self.sparse is not None
        obj = self.cfg.objective
        self.sparse, report = update_s(
            self.sparse,
            z,
            obj.lambda1,
            obj.lambda2,
            self.cfg.admm_max_iters,
            self.cfg.admm_tol,
        )
        return report

    def step(self, x: Array, rng: np.random.Generator, step: int) -> StepOutcome:
        cfg, obj = self.cfg, self.cfg.objective
        tape = forward(
            self.params,
            x,
            input_dropout=cfg.input_dropout,
            noise_std=cfg.noise_std,
            rng=rng,
            training=True,
        )
        prior = rng.standard_normal(tape.z.shape) if obj.alpha > 0 else None
        reports: list[tuple[str, AdmmReport]] = []
        s_batch = a = None
        if self.sparse is not None:
            self.sparse = reset_codes(self.sparse, len(x))
            reports.append(("s", self._update_s(tape.z)))
            s_batch, a = self.sparse.s, self.sparse.a
        total = total_loss(
            x,
            tape,
            obj,
            output_activation=self.params.output_activation,
            s_batch=s_batch,
            a=a,
            prior_batch=prior,
        )
        guard_finite(total.breakdown, step)
        grads = backward(self.params, tape, total.grad_output, total.grad_z)
        self.params = self.optimizer.step(self.params, grads)
        self.params.check_finite()
        self.batches += 1
        if self.sparse is not None and self.batches % cfg.admm_every == 0:
            reports.append(("s", self._update_s(tape.z)))
            self.sparse, report = update_a(
                self.sparse, tape.z, obj.lambda1, cfg.admm_max_iters, cfg.admm_tol
            )
            reports.append(("a", report))
        return StepOutcome(total.breakdown, reports)

    def snapshot(self) -> tuple[MlpParams, SparseCodeState | None]:
        return self.params.copy(), self.sparse

    def extras(self) -> dict[str, Array]:
        return {"a": self.sparse.a} if self.sparse is not None else {}


def make_batches(order: NDArray[np.int64], batch_size: int) -> list[NDArray[np.int64]]:
    """Consecutive chunks; a trailing single row joins the previous chunk."""
    batches = [order[i : i + batch_size] for i in range(0, len(order), batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


def run_training(
    stepper: Stepper,
    train_matrix: ClickMatrix,
    val: HeldoutPair,
    cfg: TrainConfig,
    *,
    model_kind: ModelKind,
    rng: np.random.Generator,
    run_dir: Path | None = None,
    source: Mapping[str, Any] | None = None,
) -> tuple[TrainLog, tuple[MlpParams, SparseCodeState | None]]:
    """Epoch loop shared by every model kind."""
    if train_matrix.n_users < 2:
        raise DataError("training needs at least 2 users")
    metric, k = cfg.early_stop
    metric_key = f"{metric}@{k}"
    log = TrainLog()
    metrics = TrainingMetrics(model_kind)
    run_log = RunLogRepository(run_dir) if run_dir is not None else None
    checkpoints = CheckpointRepository()
    if run_log is not None:
        run_log.start(cfg.to_flat(), {"model": model_kind, **(source or {})})

    best = stepper.snapshot()
    best_value = -math.inf
    since_best = 0
    global_step = 0
    with get_tracer().start_as_current_span("trainer.train") as span:
        span.set_attribute("model_kind", model_kind)
        span.set_attribute("train_users", train_matrix.n_users)
        for epoch in range(1, cfg.max_epochs + 1):
            started = time.perf_counter()
            with get_tracer().start_as_current_span("trainer.epoch") as epoch_span:
                epoch_span.set_attribute("epoch", epoch)
                steps: list[StepRecord] = []
                admm: list[AdmmRecord] = []
                order = rng.permutation(train_matrix.n_users)
                for index in make_batches(order, cfg.batch_size):
                    outcome = stepper.step(train_matrix.dense(index), rng, global_step)
                    steps.append(StepRecord.of(epoch, global_step, outcome.breakdown))
                    metrics.observe_step(outcome.breakdown)
                    for target, report in outcome.admm:
                        admm.append(
                            AdmmRecord(
                                epoch=epoch,
                                step=global_step,
                                target=target,
                                iterations=report.iterations,
                                primal_residual=report.primal_residual,
                                dual_residual=report.dual_residual,
                                converged=report.converged,
                            )
                        )
                        metrics.observe_admm(target, report.iterations)
                        if not report.converged:
                            logger.warning(
                                "admm_not_converged",
                                epoch=epoch,
                                step=global_step,
                                target=target,
                                iterations=report.iterations,
                                primal_residual=report.primal_residual,
                                dual_residual=report.dual_residual,
                            )
                    global_step += 1

                table = evaluate(
                    stepper.params, val, [k], batch_size=cfg.eval_batch_size
                )
                value = table.get(metric, k)
                improved = value > best_value
                if improved:
                    best_value = value
                    best = stepper.snapshot()
                    log.best_epoch = epoch
                    since_best = 0
                    if run_log is not None:
                        checkpoints.save(
                            Checkpoint(best[0], stepper.extras()),
                            run_log.checkpoint_dir(epoch),
                        )
                        run_log.mark_best(epoch)
                else:
                    since_best += 1

                seconds = time.perf_counter() - started
                record = EpochRecord(
                    epoch=epoch, metric=metric_key, value=value, improved=improved
                )
                log.steps.extend(steps)
                log.admm.extend(admm)
                log.epochs.append(record)
                log.seconds_per_epoch.append(seconds)
                metrics.observe_epoch(epoch, metric_key, value)
                if run_log is not None:
                    run_log.append_steps(steps)
                    run_log.append_admm(admm)
                    run_log.append_epoch(record, seconds)
                    metrics.write(run_log.run_dir)
                logger.info(
                    "epoch_finished",
                    epoch=epoch,
                    mean_loss=float(np.mean([s.total for s in steps])),
                    metric=metric_key,
                    value=value,
                    improved=improved,
                    seconds=round(seconds, 3),
                )
            if since_best >= cfg.patience:
                logger.info(
                    "early_stop",
                    epoch=epoch,
                    best_epoch=log.best_epoch,
                    best_value=best_value,
                )
                break
    return log, best


def check_config(cfg: TrainConfig, train_matrix: ClickMatrix) -> None:
    if cfg.latent_dim > train_matrix.n_items:
        raise ConfigError(
            f"latent_dim={cfg.latent_dim} exceeds n_items={train_matrix.n_items}",
            "latent_dim",
        )


def train(
    train_matrix: ClickMatrix,
    val: HeldoutPair,
    cfg: TrainConfig,
    *,
    run_dir: Path | None = None,
    source: Mapping[str, Any] | None = None,
    model_kind: ModelKind = "awae",
) -> TrainResult:
    """Fit the autoencoder; returns the best-validation snapshot."""
    check_config(cfg, train_matrix)
    params = init_params(
        train_matrix.n_items,
        cfg.latent_dim,
        cfg.seed,
        hidden_dim=cfg.hidden_dim,
        output_activation=cfg.objective.output_activation,
        normalize_input=cfg.normalize_input,
        model_kind=model_kind,
    )
    sparse = None
    if cfg.objective.delta > 0:
        sparse = init_sparse(
            min(cfg.batch_size, train_matrix.n_users),
            cfg.atoms,
            cfg.latent_dim,
            cfg.seed + 1,
            rho=cfg.admm_rho,
        )
    logger.info(
        "training_started",
        model_kind=model_kind,
        users=train_matrix.n_users,
        items=train_matrix.n_items,
        latent_dim=cfg.latent_dim,
        sparse_coding=sparse is not None,
    )
    stepper = AwaeStepper(params, cfg, sparse)
    log, (best_params, best_sparse) = run_training(
        stepper,
        train_matrix,
        val,
        cfg,
        model_kind=model_kind,
        rng=np.random.default_rng(cfg.seed + 2),
        run_dir=run_dir,
        source=source,
    )
    return TrainResult(best_params, best_sparse, log)


def load_best(run_dir: Path) -> Checkpoint:
    """The checkpoint the run's ``best`` marker points at."""
    return CheckpointRepository().load(RunLogRepository(run_dir).best_checkpoint())
