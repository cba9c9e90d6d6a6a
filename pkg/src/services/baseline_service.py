"""Reference recommenders: item popularity, Mult-DAE and Mult-VAE.

The two autoencoders reuse the aWAE network and epoch loop. Mult-DAE is
the aWAE objective with every regularizer switched off; Mult-VAE swaps
the latent regularizers for an annealed Gaussian KL term.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..core.logging_config import get_logger
from ..models.click_matrix import ClickMatrix, HeldoutPair
from ..models.network import MlpParams, VaeParams
from ..models.sparse_code import SparseCodeState
from ..schemas.evaluation import MetricTable
from ..schemas.objective import LossBreakdown
from ..schemas.training import ModelKind, TrainConfig, VaeTrainConfig
from .exceptions import ShapeError
from .network_service import (
    decode,
    decoder_backward,
    encode,
    encoder_backward,
    init_params,
)
from .objective_service import gaussian_kl, reconstruction
from .optimizer_service import Adam
from .ranking_service import evaluate_scorer
from .trainer_service import (
    StepOutcome,
    TrainResult,
    check_config,
    guard_finite,
    run_training,
    train,
)

Array = NDArray[np.float64]

logger = get_logger(__name__)


# -- popularity ---------------------------------------------------------------


def popularity_scores(train_matrix: ClickMatrix, foldin_rows: Array) -> Array:
    """Training click count of every item; fold-in items masked to -inf."""
    rows = np.asarray(foldin_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != train_matrix.n_items:
        raise ShapeError("foldin_rows", ("n", train_matrix.n_items), rows.shape)
    counts = train_matrix.item_counts().astype(np.float64)
    scores = np.tile(counts, (rows.shape[0], 1))
    scores[rows > 0] = -np.inf
    return scores


def evaluate_popularity(
    train_matrix: ClickMatrix,
    heldout: HeldoutPair,
    r_list: Sequence[int],
    *,
    batch_size: int = 1000,
    per_user: bool = False,
) -> MetricTable:
    return evaluate_scorer(
        lambda rows: popularity_scores(train_matrix, rows),
        heldout,
        r_list,
        batch_size=batch_size,
        per_user=per_user,
    )


# -- Mult-DAE -----------------------------------------------------------------


def dae_config(cfg: TrainConfig) -> TrainConfig:
    """Same run settings with the multinomial cost and no regularizers."""
    objective = cfg.objective.model_copy(
        update={
            "cost_kind": "multinomial",
            "beta": 0.0,
            "alpha": 0.0,
            "delta": 0.0,
            "gamma": 0.0,
        }
    )
    return cfg.model_copy(update={"objective": objective})


def train_mult_dae(
    train_matrix: ClickMatrix,
    val: HeldoutPair,
    cfg: TrainConfig,
    *,
    run_dir: Path | None = None,
    source: Mapping[str, Any] | None = None,
) -> TrainResult:
    return train(
        train_matrix,
        val,
        dae_config(cfg),
        run_dir=run_dir,
        source=source,
        model_kind="dae",
    )


# -- Mult-VAE -----------------------------------------------------------------


def kl_weight(step: int, cap: float, anneal_steps: int) -> float:
    """Linear warm-up of the KL weight, held at ``cap`` afterwards."""
    return cap * min(1.0, step / anneal_steps)


def vae_loss_and_grads(
    params: VaeParams,
    x: Array,
    eps: Array,
    beta_t: float,
    cfg: TrainConfig,
    *,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> tuple[LossBreakdown, dict[str, Array]]:
    """Reparameterized loss ``rec + beta_t * KL`` and its gradients.

    The KL term is reported in the ``smv`` column of the breakdown.
    """
    h = params.latent_dim
    tape = encode(
        params,
        x,
        input_dropout=cfg.input_dropout if training else 0.0,
        rng=rng,
        training=training,
    )
    if eps.shape != (tape.n, h):
        raise ShapeError("eps", (tape.n, h), eps.shape)
    mu, logvar = tape.enc_out[:, :h], tape.enc_out[:, h:]
    sigma = np.exp(0.5 * logvar)
    tape = decode(params, replace(tape, z=mu + sigma * eps, noise=sigma * eps))
    rec = reconstruction(x, tape, cfg.objective)
    kl, d_mu_kl, d_logvar_kl = gaussian_kl(mu, logvar)
    dec_grads, d_z = decoder_backward(params, tape, rec.grad)
    d_mu = d_z + beta_t * d_mu_kl
    d_logvar = d_z * eps * 0.5 * sigma + beta_t * d_logvar_kl
    enc_grads = encoder_backward(params, tape, np.hstack([d_mu, d_logvar]))
    breakdown = LossBreakdown(
        reconstruction=rec.value,
        smv=kl,
        mi=0.0,
        sparse=0.0,
        total=rec.value + beta_t * kl,
    )
    return breakdown, {**enc_grads, **dec_grads}


class VaeStepper:
    """One Adam step on the annealed VAE objective per batch."""

    def __init__(self, params: VaeParams, cfg: VaeTrainConfig) -> None:
        self.params: MlpParams = params
        self.cfg = cfg
        self.optimizer = Adam(params, cfg.lr, cfg.betas, cfg.eps)
        self.updates = 0

    def step(self, x: Array, rng: np.random.Generator, step: int) -> StepOutcome:
        params = self.params
        assert isinstance(params, VaeParams)
        beta_t = kl_weight(self.updates, params.kl_anneal_cap, params.anneal_steps)
        eps = rng.standard_normal((x.shape[0], params.latent_dim))
        breakdown, grads = vae_loss_and_grads(
            params, x, eps, beta_t, self.cfg, rng=rng, training=True
        )
        guard_finite(breakdown, step)
        self.params = self.optimizer.step(params, grads)
        self.params.check_finite()
        self.updates += 1
        return StepOutcome(breakdown, [])

    def snapshot(self) -> tuple[MlpParams, SparseCodeState | None]:
        return self.params.copy(), None

    def extras(self) -> dict[str, Array]:
        return {}


def train_mult_vae(
    train_matrix: ClickMatrix,
    val: HeldoutPair,
    cfg: VaeTrainConfig,
    *,
    run_dir: Path | None = None,
    source: Mapping[str, Any] | None = None,
) -> TrainResult:
    """Fit Mult-VAE; scoring decodes the posterior mean."""
    objective = cfg.objective.model_copy(update={"cost_kind": "multinomial"})
    cfg = cfg.model_copy(update={"objective": objective})
    check_config(cfg, train_matrix)
    params = init_params(
        train_matrix.n_items,
        cfg.latent_dim,
        cfg.seed,
        hidden_dim=cfg.hidden_dim,
        params_cls=VaeParams,
        normalize_input=cfg.normalize_input,
        kl_anneal_cap=cfg.kl_anneal_cap,
        anneal_steps=cfg.anneal_steps,
    )
    assert isinstance(params, VaeParams)
    logger.info(
        "training_started",
        model_kind="vae",
        users=train_matrix.n_users,
        items=train_matrix.n_items,
        latent_dim=cfg.latent_dim,
        kl_anneal_cap=cfg.kl_anneal_cap,
    )
    log, (best_params, _) = run_training(
        VaeStepper(params, cfg),
        train_matrix,
        val,
        cfg,
        model_kind="vae",
        rng=np.random.default_rng(cfg.seed + 2),
        run_dir=run_dir,
        source=source,
    )
    return TrainResult(best_params, None, log)


def fit_model(
    model_kind: ModelKind,
    train_matrix: ClickMatrix,
    val: HeldoutPair,
    cfg: TrainConfig,
    *,
    run_dir: Path | None = None,
    source: Mapping[str, Any] | None = None,
) -> TrainResult:
    """Dispatch on the model kind; ``vae`` needs a VaeTrainConfig."""
    if model_kind == "awae":
        return train(train_matrix, val, cfg, run_dir=run_dir, source=source)
    if model_kind == "dae":
        return train_mult_dae(train_matrix, val, cfg, run_dir=run_dir, source=source)
    if not isinstance(cfg, VaeTrainConfig):
        cfg = VaeTrainConfig.model_validate(cfg.model_dump())
    return train_mult_vae(train_matrix, val, cfg, run_dir=run_dir, source=source)
