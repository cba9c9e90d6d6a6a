"""End-to-end command runs through ``main``."""

from __future__ import annotations

import pandas as pd
import pytest
from openpyxl import load_workbook

from src.cli import main

TRAIN_FLAGS = [
    "--set",
    "max_epochs=2",
    "--set",
    "latent_dim=6",
    "--set",
    "hidden_dim=12",
    "--set",
    "batch_size=32",
    "--set",
    "admm_max_iters=20",
]


def _stdout_kv(text: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def dataset(tmp_path, capsys):
    out = tmp_path / "data"
    code = main(
        [
            "prepare",
            str(out),
            "--synthetic",
            "--users",
            "150",
            "--items",
            "40",
            "--clusters",
            "4",
            "--clicks",
            "8",
        ]
    )
    assert code == 0
    capsys.readouterr()
    return out


@pytest.fixture
def trained_run(dataset, run_root, capsys):
    run_dir = run_root / "awae"
    code = main(["train", str(dataset), "--run-dir", str(run_dir), *TRAIN_FLAGS])
    assert code == 0
    capsys.readouterr()
    return run_dir


def test_prepare_writes_splits_and_summary(tmp_path, capsys):
    out = tmp_path / "prepared"
    code = main(["prepare", str(out), "--synthetic", "--users", "50", "--items", "20"])
    assert code == 0
    summary = _stdout_kv(capsys.readouterr().out)
    assert summary["n_users"] == "50"
    assert int(summary["n_train_users"]) + int(summary["n_heldout_users"]) == 50
    for part in ("train", "val", "test"):
        assert (out / part).is_dir()


def test_synthesize_then_prepare_from_file(tmp_path, capsys):
    clicks = tmp_path / "clicks.csv"
    assert main(["synthesize", str(clicks), "--users", "60", "--items", "20"]) == 0
    assert "interactions" in capsys.readouterr().out
    assert list(pd.read_csv(clicks).columns) == ["user", "item", "value"]
    code = main(["prepare", str(tmp_path / "data"), "--input", str(clicks)])
    assert code == 0
    assert _stdout_kv(capsys.readouterr().out)["n_items"] == "20"


def test_train_prints_run_summary(dataset, run_root, capsys):
    code = main(["train", str(dataset), *TRAIN_FLAGS])
    assert code == 0
    printed = _stdout_kv(capsys.readouterr().out)
    assert printed["run_dir"] == str(run_root / "awae_0")
    assert printed["best_epoch"] in {"1", "2"}
    assert (run_root / "awae_0" / "best").is_file()


def test_evaluate_uses_the_recorded_dataset(trained_run, tmp_path, capsys):
    out = tmp_path / "report" / "metrics"
    code = main(["evaluate", str(trained_run), "--r", "5,10", "--out", str(out)])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,R,mean,n_users"
    assert [line.split(",")[:2] for line in lines[1:]] == [
        ["recall", "5"],
        ["ndcg", "5"],
        ["recall", "10"],
        ["ndcg", "10"],
    ]
    assert (tmp_path / "report" / "metrics.json").is_file()


def test_compare_with_popularity(trained_run, dataset, tmp_path, capsys):
    xlsx = tmp_path / "compare.xlsx"
    code = main(
        [
            "compare",
            f"awae={trained_run}",
            "pop=popularity",
            "--data",
            str(dataset),
            "--r",
            "10",
            "--xlsx",
            str(xlsx),
        ]
    )
    assert code == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "model,metric,R,mean,n_users"
    assert [row.split(",")[0] for row in rows[1:]] == ["awae", "awae", "pop", "pop"]
    sheet = load_workbook(xlsx)["Comparison"]
    assert [sheet["A4"].value, sheet["A5"].value] == ["awae", "pop"]


def test_sweep_runs_one_point_per_value(dataset, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = main(
        [
            "sweep",
            str(dataset),
            "--param",
            "latent_dim",
            "--values",
            "8,4",
            "--run-root",
            str(tmp_path / "sweep"),
            "--out",
            str(out),
            *TRAIN_FLAGS,
        ]
    )
    assert code == 0
    frame = pd.read_csv(out)
    assert frame["param_value"].tolist() == [4.0, 4.0, 8.0, 8.0]
    assert (tmp_path / "sweep" / "latent_dim_4" / "best").is_file()
    assert capsys.readouterr().out.startswith("param_value,metric,R,mean")


def test_config_errors_exit_with_one(dataset, capsys):
    assert main(["train", str(dataset), "--set", "learning_rate=1"]) == 1
    assert "learning_rate" in capsys.readouterr().err
    assert main(["train", str(dataset), "--set", "batch_size"]) == 1
    code = main(["prepare", str(dataset), "--synthetic", "--protocol", "ml20m"])
    assert code == 1


def test_usage_errors_exit_with_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["evaluate", "run", "--r", "ten"])
    assert exc.value.code == 1


def test_data_errors_exit_with_two(tmp_path, run_root, capsys):
    assert main(["train", str(tmp_path / "missing")]) == 2
    assert capsys.readouterr().err.startswith("error: ")
    bad = tmp_path / "bad.csv"
    bad.write_text("user,item,value\nu1,i1,-3\n", encoding="utf-8")
    assert main(["prepare", str(tmp_path / "out"), "--input", str(bad)]) == 2
