"""On-disk formats: key=value files, matrix directories, checkpoints, run logs."""

from __future__ import annotations

import struct

import numpy as np
import pytest

from src.models.click_matrix import ClickMatrix
from src.models.network import VaeParams
from src.repositories import (
    Checkpoint,
    CheckpointRepository,
    DatasetRepository,
    MatrixRepository,
    PreparedData,
    RunLogRepository,
)
from src.repositories.base import parse_kv, read_kv, write_kv
from src.repositories.checkpoint_repository import decode_tensor, encode_tensor
from src.schemas.objective import LossBreakdown
from src.schemas.training import AdmmRecord, EpochRecord, StepRecord
from src.services.data_service import split, summarize, synthesize
from src.services.exceptions import DataError, NotFoundError, ParseError
from src.services.network_service import init_params


def test_kv_roundtrip_sorted(tmp_path):
    path = tmp_path / "config"
    write_kv(path, {"b": 2, "a": True, "c": None, "d": (0.9, 0.999)})
    assert path.read_text().splitlines() == ["a=true", "b=2", "c=none", "d=0.9,0.999"]
    assert read_kv(path) == {"a": "true", "b": "2", "c": "none", "d": "0.9,0.999"}


def test_parse_kv_skips_comments_and_names_bad_line():
    assert parse_kv("# comment\n\nlr = 0.01\n") == {"lr": "0.01"}
    with pytest.raises(ParseError) as info:
        parse_kv("lr=0.1\nnot a pair\n")
    assert info.value.details["line"] == 2


def test_matrix_directory_roundtrip(tmp_path):
    matrix = ClickMatrix.from_rows(
        [[2, 0], [], [1]],
        3,
        user_ids=["a", "b", "c"],
        item_ids=["x", "y", "z"],
        meta={"seed": "4"},
    )
    repo = MatrixRepository()
    repo.save(matrix, tmp_path / "m")
    assert (tmp_path / "m" / "rows").read_text() == "0 2\n\n1\n"
    loaded = repo.load(tmp_path / "m")
    assert loaded.equals(matrix)
    assert loaded.meta == {"seed": "4"}


def test_matrix_load_checks_nnz(tmp_path):
    repo = MatrixRepository()
    repo.save(ClickMatrix.from_rows([[0, 1]], 2), tmp_path / "m")
    (tmp_path / "m" / "rows").write_text("0\n")
    with pytest.raises(DataError):
        repo.load(tmp_path / "m")


def test_matrix_load_missing_directory(tmp_path):
    with pytest.raises(NotFoundError):
        MatrixRepository().load(tmp_path / "nope")


def test_dataset_roundtrip(tmp_path):
    matrix = synthesize(60, 20, 2, 6, seed=1)
    parts = split(matrix, seed=2)
    repo = DatasetRepository()
    repo.save(PreparedData(*parts), tmp_path / "data")
    repo.save_summary(summarize(matrix, *parts), tmp_path / "data")
    loaded = repo.load(tmp_path / "data")
    assert loaded.train.equals(parts.train)
    for before, after in ((parts.val, loaded.val), (parts.test, loaded.test)):
        assert after.foldin.equals(before.foldin)
        assert after.heldout_truth.equals(before.heldout_truth)
        assert np.array_equal(after.user_index, before.user_index)
    assert repo.load_summary(tmp_path / "data").n_users == 60
    assert repo.exists(tmp_path / "data")


def test_tensor_encoding_layout():
    blob = encode_tensor(np.array([[1.0, 2.0, 3.0]]))
    assert struct.unpack("<QQ", blob[:16]) == (1, 3)
    assert struct.unpack("<3d", blob[16:]) == (1.0, 2.0, 3.0)
    assert np.array_equal(decode_tensor(blob), [[1.0, 2.0, 3.0]])
    with pytest.raises(DataError):
        decode_tensor(blob[:-8])


def test_checkpoint_roundtrip_is_bit_exact(tmp_path):
    params = init_params(7, 3, seed=0, hidden_dim=5, output_activation="sigmoid")
    extras = {"a": np.random.default_rng(0).normal(size=(2, 3))}
    repo = CheckpointRepository()
    repo.save(Checkpoint(params, extras), tmp_path / "ck")
    loaded = repo.load(tmp_path / "ck")
    for name, tensor in params.tensors().items():
        assert loaded.params.tensors()[name].tobytes() == tensor.tobytes()
    assert loaded.params.output_activation == "sigmoid"
    assert loaded.params.normalize_input is True
    assert np.array_equal(loaded.extras["a"], extras["a"])


def test_checkpoint_restores_vae_params(tmp_path):
    params = init_params(
        6, 2, seed=1, hidden_dim=4, params_cls=VaeParams, kl_anneal_cap=0.3
    )
    repo = CheckpointRepository()
    repo.save(Checkpoint(params, {}), tmp_path / "ck")
    loaded = repo.load(tmp_path / "ck").params
    assert isinstance(loaded, VaeParams)
    assert loaded.kl_anneal_cap == 0.3
    assert loaded.enc_w2.shape == (4, 4)


def test_run_log_tables_and_best_marker(tmp_path):
    run = RunLogRepository(tmp_path / "run")
    run.start({"lr": 0.001, "betas": (0.9, 0.999)}, {"model": "awae"})
    breakdown = LossBreakdown(
        reconstruction=1.5, smv=0.25, mi=0.0, sparse=0.1, total=1.85
    )
    run.append_steps([StepRecord.of(1, 0, breakdown), StepRecord.of(1, 1, breakdown)])
    run.append_admm(
        [
            AdmmRecord(
                epoch=1,
                step=0,
                target="s",
                iterations=3,
                primal_residual=1e-7,
                dual_residual=2e-7,
                converged=True,
            )
        ]
    )
    run.append_epoch(
        EpochRecord(epoch=1, metric="ndcg@10", value=0.5, improved=True), 0.1
    )
    run.mark_best(1)
    run.checkpoint_dir(1).mkdir()

    steps = run.read_table("steps")
    assert list(steps["step"]) == [0, 1]
    assert steps["total"].iloc[0] == 1.85
    assert (tmp_path / "run" / "admm.csv").read_text().splitlines()[1].endswith(
        ",true"
    )
    assert run.read_config()["betas"] == "0.9,0.999"
    assert run.best_checkpoint() == tmp_path / "run" / "epoch_1"


def test_run_log_start_clears_stale_best(tmp_path):
    run = RunLogRepository(tmp_path / "run")
    run.start({}, {})
    run.mark_best(3)
    run.start({}, {})
    with pytest.raises(NotFoundError):
        run.best_checkpoint()
