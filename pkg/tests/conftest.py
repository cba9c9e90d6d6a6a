"""Shared pytest fixtures.

Seeding env vars here BEFORE any ``src.*`` import is critical: Settings
is built from os.environ when the first import touches it, so run
artifacts would otherwise land in the working directory and spans would
try to reach a collector.
"""

from __future__ import annotations

import os

import numpy as np
import pytest


def _seed_test_env() -> None:
    defaults = {
        "AWAE_LOG_LEVEL": "WARNING",
        "AWAE_LOG_FORMAT": "json",
        # Don't talk to a collector from unit tests.
        "AWAE_TRACING_ENABLED": "false",
        "AWAE_METRICS_TEXTFILE": "true",
    }
    for key, value in defaults.items():
        os.environ.setdefault(key, value)


_seed_test_env()


@pytest.fixture(autouse=True)
def _reset_settings_cache():
    """Tests that mutate env vars need the @lru_cache'd Settings to refresh."""
    from src.core.config import get_settings

    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def run_root(tmp_path, monkeypatch):
    """Point AWAE_RUN_ROOT at a per-test directory."""
    root = tmp_path / "runs"
    monkeypatch.setenv("AWAE_RUN_ROOT", str(root))
    from src.core.config import get_settings

    get_settings.cache_clear()
    return root


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def synthetic_split():
    """Small clustered dataset, split 80/10/10 with 80% fold-in."""
    from src.services.data_service import split, synthesize

    matrix = synthesize(200, 60, 4, 12, seed=0)
    return matrix, split(matrix, seed=0)


@pytest.fixture
def tiny_config():
    """Narrow network and few epochs; fast enough for unit tests."""
    from src.schemas.training import TrainConfig

    return TrainConfig.from_flat(
        {
            "batch_size": 40,
            "max_epochs": 3,
            "latent_dim": 8,
            "hidden_dim": 16,
            "lr": 0.01,
            "input_dropout": 0.2,
            "early_stop_metric": "ndcg@10",
            "patience": 5,
            "alpha": 0.05,
            "beta": 1.0,
            "delta": 0.1,
            "admm_max_iters": 50,
            "admm_tol": 1e-4,
        }
    )
