from __future__ import annotations

import numpy as np
import pytest

from src.models.click_matrix import ClickMatrix, HeldoutPair
from src.models.network import VaeParams
from src.schemas.training import TrainConfig, VaeTrainConfig
from src.services.baseline_service import (
    dae_config,
    evaluate_popularity,
    fit_model,
    kl_weight,
    popularity_scores,
    train_mult_dae,
    train_mult_vae,
    vae_loss_and_grads,
)
from src.services.exceptions import ShapeError
from src.services.network_service import init_params
from src.services.trainer_service import load_best, train
from tests.gradcheck import numeric_grad, rel_error


def _vae_config(tiny_config, **values):
    flat = tiny_config.to_flat()
    flat.update(values)
    return VaeTrainConfig.from_flat(flat)


def test_popularity_scores_mask_foldin():
    train_matrix = ClickMatrix.from_rows([[0, 1], [1, 2], [1]], 4)
    scores = popularity_scores(train_matrix, np.array([[0, 1.0, 0, 0]]))
    assert scores.tolist() == [[1.0, -np.inf, 1.0, 0.0]]
    with pytest.raises(ShapeError):
        popularity_scores(train_matrix, np.zeros((1, 3)))


def test_popularity_ranking():
    train_matrix = ClickMatrix.from_rows([[0, 1], [1, 2], [1, 2], [3]], 5)
    heldout = HeldoutPair(
        foldin=ClickMatrix.from_rows([[1], [4]], 5),
        heldout_truth=ClickMatrix.from_rows([[2], [0]], 5),
        user_index=np.array([0, 1]),
    )
    table = evaluate_popularity(train_matrix, heldout, [1, 2])
    # user 0 ranks 2, 0, 3; user 1 ranks 1, 2, 0
    assert table.get("recall", 1) == 0.5
    assert table.get("recall", 2) == 0.5


def test_dae_is_awae_without_regularizers(tiny_config, synthetic_split):
    _, parts = synthetic_split
    cfg = dae_config(tiny_config)
    assert (cfg.objective.beta, cfg.objective.alpha, cfg.objective.delta) == (0, 0, 0)
    assert cfg.batch_size == tiny_config.batch_size

    dae = train_mult_dae(parts.train, parts.val, tiny_config)
    awae = train(parts.train, parts.val, cfg)
    assert dae.sparse is None
    assert dae.params.model_kind == "dae"
    assert dae.log.steps == awae.log.steps
    for name, tensor in dae.params.tensors().items():
        assert np.array_equal(tensor, awae.params.tensors()[name])


def test_kl_weight_schedule():
    assert kl_weight(0, 0.2, 100) == 0.0
    assert kl_weight(50, 0.2, 100) == pytest.approx(0.1)
    assert kl_weight(100, 0.2, 100) == pytest.approx(0.2)
    assert kl_weight(10_000, 0.2, 100) == pytest.approx(0.2)


def test_vae_gradient_with_fixed_noise(rng):
    params = init_params(7, 3, seed=4, hidden_dim=5, params_cls=VaeParams)
    assert isinstance(params, VaeParams)
    cfg = VaeTrainConfig.from_flat({"latent_dim": 3, "hidden_dim": 5})
    x = rng.integers(0, 2, size=(4, 7)).astype(float)
    x[:, 0] = 1.0
    eps = rng.standard_normal((4, 3))

    def value() -> float:
        breakdown, _ = vae_loss_and_grads(params, x, eps, 0.3, cfg)
        return breakdown.total

    breakdown, grads = vae_loss_and_grads(params, x, eps, 0.3, cfg)
    assert breakdown.total == pytest.approx(
        breakdown.reconstruction + 0.3 * breakdown.smv
    )
    for name, tensor in params.tensors().items():
        assert rel_error(grads[name], numeric_grad(value, tensor)) < 1e-4, name


def test_vae_noise_shape_is_checked():
    params = init_params(7, 3, seed=4, hidden_dim=5, params_cls=VaeParams)
    assert isinstance(params, VaeParams)
    with pytest.raises(ShapeError):
        vae_loss_and_grads(
            params, np.ones((2, 7)), np.zeros((2, 4)), 0.1, TrainConfig()
        )


def test_vae_training_and_checkpoint(tiny_config, synthetic_split, run_root):
    _, parts = synthetic_split
    cfg = _vae_config(tiny_config, anneal_steps=10, kl_anneal_cap=0.5)
    result = train_mult_vae(parts.train, parts.val, cfg, run_dir=run_root / "vae")
    assert isinstance(result.params, VaeParams)
    assert result.params.kl_anneal_cap == 0.5
    assert all(step.mi == 0.0 and step.sparse == 0.0 for step in result.log.steps)
    assert result.log.steps[0].total == result.log.steps[0].reconstruction

    loaded = load_best(run_root / "vae").params
    assert isinstance(loaded, VaeParams)
    assert np.array_equal(loaded.enc_w2, result.params.enc_w2)


def test_fit_model_dispatch(tiny_config, synthetic_split):
    _, parts = synthetic_split
    cfg = TrainConfig.from_flat({**tiny_config.to_flat(), "max_epochs": 1})
    for kind in ("awae", "dae", "vae"):
        result = fit_model(kind, parts.train, parts.val, cfg)
        assert result.params.model_kind == kind
        assert len(result.log.epochs) == 1
