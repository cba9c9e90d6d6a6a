"""Ingestion filters, user-level splits and the synthetic generator."""

from __future__ import annotations

import numpy as np
import pytest

from src.models.click_matrix import ClickMatrix
from src.schemas.data import IngestThresholds
from src.services.data_service import (
    cluster_blocks,
    export_interactions,
    ingest,
    ingest_file,
    split,
    summarize,
    synthesize,
)
from src.services.exceptions import (
    ConfigError,
    DataError,
    EmptyDatasetError,
    NotFoundError,
    ParseError,
)


def _random_ratings(rng: np.random.Generator, n_users=60, n_items=40, n=1500):
    users = rng.integers(0, n_users, size=n)
    items = rng.integers(0, n_items, size=n)
    values = rng.choice([0.5, 1.0, 2.0, 3.0, 4.0, 4.5, 5.0], size=n)
    return [(f"u{u}", f"i{i}", float(v)) for u, i, v in zip(users, items, values)]


def test_ingest_collapses_duplicates():
    matrix = ingest([("u1", "i1", 5), ("u1", "i1", 5)])
    assert (matrix.n_users, matrix.n_items, matrix.nnz) == (1, 1, 1)
    assert matrix.dense().tolist() == [[1.0]]


def test_ingest_assigns_sorted_contiguous_indices():
    matrix = ingest([("b", "y"), ("a", "z"), ("a", "x")])
    assert matrix.user_ids == ("a", "b")
    assert matrix.item_ids == ("x", "y", "z")
    assert matrix.row(0).tolist() == [0, 2]
    assert matrix.row(1).tolist() == [1]


def test_ml20m_protocol_keeps_users_with_five_items(rng):
    records = _random_ratings(rng)
    thresholds = IngestThresholds.for_protocol("ml20m")
    matrix = ingest(records, **thresholds.model_dump())
    assert matrix.user_click_counts.min() >= 5
    kept_values = {(u, i) for u, i, v in records if v >= 4}
    for i, row in enumerate(matrix.rows()):
        for j in row:
            assert (matrix.user_ids[i], matrix.item_ids[j]) in kept_values


def test_fixed_point_filter_satisfies_both_thresholds(rng):
    records = _random_ratings(rng, n_users=80, n_items=30, n=2000)
    matrix = ingest(records, min_item_audience=20, min_user_clicks=10)
    assert matrix.item_counts().min() >= 20
    assert matrix.user_click_counts.min() >= 10


def test_lastfm_preset_and_override():
    preset = IngestThresholds.for_protocol("lastfm")
    assert preset.min_item_audience == 50
    assert preset.min_user_clicks == 20
    override = IngestThresholds.for_protocol("lastfm", min_user_clicks=3)
    assert override.min_user_clicks == 3
    assert override.min_item_audience == 50


def test_ingest_everything_filtered_raises():
    with pytest.raises(EmptyDatasetError):
        ingest([("u1", "i1", 1.0)], min_value=4)


def test_ingest_malformed_record_names_position():
    with pytest.raises(ParseError) as info:
        ingest([("u1", "i1", 1.0), ("u2",)])
    assert info.value.details["line"] == 2


def test_ingest_file_tab_separated_without_value(tmp_path):
    path = tmp_path / "clicks.tsv"
    path.write_text("user\titem\nu1\ti1\nu1\ti2\nu2\ti2\n", encoding="utf-8")
    matrix = ingest_file(path)
    assert matrix.n_users == 2
    assert matrix.nnz == 3


def test_ingest_file_bad_value_names_line(tmp_path):
    path = tmp_path / "clicks.csv"
    path.write_text("user,item,value\nu1,i1,5\nu2,i1,abc\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        ingest_file(path)
    assert info.value.details["line"] == 3


def test_ingest_file_missing(tmp_path):
    with pytest.raises(NotFoundError):
        ingest_file(tmp_path / "absent.csv")


def test_ingest_is_idempotent_through_export(tmp_path, rng):
    matrix = ingest(_random_ratings(rng), min_value=3)
    path = export_interactions(matrix, tmp_path / "out.csv")
    again = ingest_file(path)
    assert again.equals(matrix)


def test_split_ten_users_exact_ratio():
    matrix = ClickMatrix.from_rows([[0, 1, 2]] * 10, 4)
    result = split(matrix, (0.8, 0.1, 0.1), 0.8, seed=3)
    assert result.train.n_users == 8
    assert result.val.n_users == 1
    assert result.test.n_users == 1
    assert result.train.n_items == 4


def test_split_five_clicks_gives_four_foldin():
    matrix = ClickMatrix.from_rows([[0, 1, 2, 3, 4]] * 10, 6)
    result = split(matrix, seed=0)
    assert result.val.foldin.user_click_counts.tolist() == [4]
    assert result.val.heldout_truth.user_click_counts.tolist() == [1]


def test_split_is_deterministic_and_conserves_clicks():
    matrix = synthesize(100, 40, 4, 10, seed=5)
    first = split(matrix, seed=11)
    second = split(matrix, seed=11)
    assert first.train.equals(second.train)
    for a, b in ((first.val, second.val), (first.test, second.test)):
        assert a.foldin.equals(b.foldin)
        assert a.heldout_truth.equals(b.heldout_truth)
        assert np.array_equal(a.user_index, b.user_index)
        totals = a.foldin.user_click_counts + a.heldout_truth.user_click_counts
        assert np.array_equal(totals, matrix.user_click_counts[a.user_index])


def test_split_partitions_users():
    matrix = synthesize(50, 20, 2, 5, seed=0)
    result = split(matrix, seed=1)
    n_train = result.train.n_users
    held = np.concatenate([result.val.user_index, result.test.user_index])
    assert n_train + len(held) == 50
    assert len(set(held.tolist())) == len(held)


def test_split_drops_single_click_heldout_users():
    rows = [[0, 1]] * 6 + [[2]] * 4
    ids = [f"u{i}" for i in range(10)]
    matrix = ClickMatrix.from_rows(rows, 3, user_ids=ids)
    result = split(matrix, seed=0)
    held = [i for i, uid in enumerate(ids) if uid not in result.train.user_ids]
    splittable = [i for i in held if len(rows[i]) >= 2]
    assert result.val.n_users + result.test.n_users == len(splittable)
    for pair in (result.val, result.test):
        assert np.all(matrix.user_click_counts[pair.user_index] >= 2)


def test_split_rejects_bad_ratios():
    matrix = ClickMatrix.from_rows([[0, 1]] * 10, 2)
    with pytest.raises(ConfigError):
        split(matrix, (0.5, 0.1, 0.1))
    with pytest.raises(ConfigError):
        split(matrix, foldin_fraction=1.0)


def test_split_too_few_users():
    matrix = ClickMatrix.from_rows([[0, 1]] * 3, 2)
    with pytest.raises(DataError):
        split(matrix, seed=0)


def test_synthesize_exact_click_counts():
    matrix = synthesize(200, 100, 4, 20, seed=0)
    assert matrix.n_users == 200
    assert np.all(matrix.user_click_counts == 20)


def test_synthesize_single_cluster_and_determinism():
    a = synthesize(30, 10, 1, 4, seed=2)
    b = synthesize(30, 10, 1, 4, seed=2)
    assert a.equals(b)
    assert np.all(a.user_click_counts == 4)


def test_synthesize_block_mass():
    n_items, n_clusters, clicks = 100, 4, 20
    matrix = synthesize(200, n_items, n_clusters, clicks, seed=0)
    blocks = [set(b.tolist()) for b in cluster_blocks(n_items, n_clusters)]
    fractions = []
    for row in matrix.rows():
        best = max(len(blocks[c] & set(row.tolist())) for c in range(n_clusters))
        fractions.append(best / clicks)
    expected = 0.8 + 0.2 * 25 / 100
    assert abs(np.mean(fractions) - expected) <= 0.05


def test_synthesize_rejects_impossible_counts():
    with pytest.raises(ConfigError):
        synthesize(10, 5, 2, 6)
    with pytest.raises(ConfigError):
        synthesize(10, 5, 6, 2)


def test_summarize_counts():
    matrix = synthesize(100, 30, 3, 6, seed=0)
    parts = split(matrix, seed=0)
    summary = summarize(matrix, *parts)
    assert summary.n_users == 100
    assert summary.n_interactions == 600
    assert summary.density == pytest.approx(600 / 3000)
    assert summary.n_heldout_users == parts.val.n_users + parts.test.n_users
