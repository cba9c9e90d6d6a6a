"""Interaction ingestion, user-level splitting and synthetic click data.

All randomness comes from ``numpy.random.default_rng(seed)`` so that the
same inputs and seed always give byte-identical matrices.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import NamedTuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..core.logging_config import get_logger
from ..core.tracing import get_tracer
from ..models.click_matrix import ClickMatrix, HeldoutPair
from ..schemas.data import DatasetSummary, IngestThresholds, Interaction, SplitSettings
from .exceptions import (
    ConfigError,
    DataError,
    EmptyDatasetError,
    NotFoundError,
    ParseError,
)

logger = get_logger(__name__)

_PANDAS_LINE = re.compile(r"line (\d+)")

Record = Interaction | tuple[object, object] | tuple[object, object, float]


class SplitResult(NamedTuple):
    train: ClickMatrix
    val: HeldoutPair
    test: HeldoutPair


# -- ingestion ---------------------------------------------------------------


def _as_interaction(record: Record, position: int) -> Interaction:
    if isinstance(record, Interaction):
        return record
    try:
        user, item, *rest = record
        return Interaction(user=user, item=item, value=rest[0] if rest else 1.0)
    except (ValueError, TypeError, ValidationError) as exc:
        raise ParseError(f"malformed record {record!r}", position) from exc


def ingest(
    records: Iterable[Record],
    min_value: float = 0.0,
    min_user_clicks: int = 0,
    min_item_audience: int = 0,
) -> ClickMatrix:
    """Binarize and filter raw interactions into a click matrix.

    Users and items are indexed in sorted order of their identifiers.
    """
    thresholds = _thresholds(min_value, min_user_clicks, min_item_audience)
    rows = [
        _as_interaction(record, position).model_dump()
        for position, record in enumerate(records, start=1)
    ]
    frame = pd.DataFrame(rows, columns=["user", "item", "value"])
    return _ingest_frame(frame, thresholds)


def ingest_file(
    path: Path | str, thresholds: IngestThresholds | None = None
) -> ClickMatrix:
    """Read ``user,item[,value]`` text (comma or tab, header required)."""
    frame = read_interactions(Path(path))
    return _ingest_frame(frame, thresholds or IngestThresholds())


def read_interactions(path: Path) -> pd.DataFrame:
    if not path.is_file():
        raise NotFoundError("interaction file", str(path))
    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
    if not header.strip():
        raise ParseError("missing header row user,item[,value]", 1)
    sep = "\t" if "\t" in header else ","
    try:
        frame = pd.read_csv(
            path, sep=sep, dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except pd.errors.ParserError as exc:
        match = _PANDAS_LINE.search(str(exc))
        raise ParseError(
            "wrong number of fields", int(match.group(1)) if match else None
        ) from exc
    frame.columns = [str(c).strip().lower() for c in frame.columns]
    if "user" not in frame.columns or "item" not in frame.columns:
        raise ParseError("header must name the columns user,item[,value]", 1)
    users = frame["user"].str.strip()
    items = frame["item"].str.strip()
    blank = (users == "") | (items == "")
    if blank.any():
        raise ParseError("empty user or item identifier", int(blank.idxmax()) + 2)
    if "value" in frame.columns:
        raw = frame["value"].str.strip()
        values = pd.to_numeric(raw, errors="coerce")
        bad = values.isna() | ~np.isfinite(values.fillna(0.0)) | (values < 0)
        if bad.any():
            first = int(bad.idxmax())
            raise ParseError(f"bad value {raw[first]!r}", first + 2)
    else:
        values = pd.Series(1.0, index=frame.index)
    logger.info("interactions_read", path=str(path), records=len(frame), sep=sep)
    return pd.DataFrame(
        {"user": users, "item": items, "value": values.astype(np.float64)}
    )


def _thresholds(
    min_value: float, min_user_clicks: int, min_item_audience: int
) -> IngestThresholds:
    try:
        return IngestThresholds(
            min_value=min_value,
            min_user_clicks=min_user_clicks,
            min_item_audience=min_item_audience,
        )
    except ValidationError as exc:
        raise ConfigError(f"invalid thresholds: {exc.errors()[0]['msg']}") from exc


def _ingest_frame(frame: pd.DataFrame, thresholds: IngestThresholds) -> ClickMatrix:
    with get_tracer().start_as_current_span("data.ingest") as span:
        span.set_attribute("records", len(frame))
        kept = frame.loc[frame["value"] >= thresholds.min_value, ["user", "item"]]
        kept = kept.drop_duplicates()
        passes = 0
        while True:
            passes += 1
            before = len(kept)
            if thresholds.min_item_audience:
                audience = kept.groupby("item")["user"].transform("size")
                kept = kept[audience >= thresholds.min_item_audience]
            if thresholds.min_user_clicks:
                clicks = kept.groupby("user")["item"].transform("size")
                kept = kept[clicks >= thresholds.min_user_clicks]
            logger.info(
                "ingest_filter_pass",
                filter_pass=passes,
                interactions=len(kept),
                dropped=before - len(kept),
            )
            if len(kept) == before:
                break
        if kept.empty:
            raise EmptyDatasetError()

        user_ids = sorted(kept["user"].unique())
        item_ids = sorted(kept["item"].unique())
        users = pd.Categorical(kept["user"], categories=user_ids).codes
        items = pd.Categorical(kept["item"], categories=item_ids).codes
        meta = {k: str(v) for k, v in thresholds.model_dump().items()}
        matrix = ClickMatrix.from_pairs(
            np.asarray(users, dtype=np.int64),
            np.asarray(items, dtype=np.int64),
            (len(user_ids), len(item_ids)),
            user_ids=tuple(user_ids),
            item_ids=tuple(item_ids),
            meta=meta,
        )
        span.set_attribute("users", matrix.n_users)
        span.set_attribute("items", matrix.n_items)
        logger.info(
            "ingest_finished",
            users=matrix.n_users,
            items=matrix.n_items,
            interactions=matrix.nnz,
        )
        return matrix


def to_records(matrix: ClickMatrix) -> list[Interaction]:
    """Re-serialize a matrix as unit-valued interactions."""
    user_ids = matrix.user_ids or tuple(str(i) for i in range(matrix.n_users))
    item_ids = matrix.item_ids or tuple(str(j) for j in range(matrix.n_items))
    return [
        Interaction(user=user_ids[i], item=item_ids[int(j)], value=1.0)
        for i, row in enumerate(matrix.rows())
        for j in row
    ]


def export_interactions(matrix: ClickMatrix, path: Path) -> Path:
    """Write the matrix in the ``user,item,value`` text format."""
    frame = pd.DataFrame(
        [r.model_dump() for r in to_records(matrix)], columns=["user", "item", "value"]
    )
    frame["value"] = frame["value"].astype(int)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


# -- splitting ---------------------------------------------------------------


def split(
    matrix: ClickMatrix,
    ratios: Sequence[float] = (0.8, 0.1, 0.1),
    foldin_fraction: float = 0.8,
    seed: int = 0,
) -> SplitResult:
    """User-level train/validation/test partition with fold-in splits."""
    try:
        settings = SplitSettings(
            ratios=tuple(ratios), foldin_fraction=foldin_fraction, seed=seed
        )
    except ValidationError as exc:
        raise ConfigError(f"invalid split: {exc.errors()[0]['msg']}") from exc

    with get_tracer().start_as_current_span("data.split") as span:
        n = matrix.n_users
        rng = np.random.default_rng(settings.seed)
        order = rng.permutation(n)
        n_train = round(n * settings.ratios[0])
        n_val = round(n * settings.ratios[1])
        parts = (
            np.sort(order[:n_train]),
            np.sort(order[n_train : n_train + n_val]),
            np.sort(order[n_train + n_val :]),
        )
        if any(len(p) == 0 for p in parts):
            raise DataError(
                f"{n} users cannot fill a {settings.ratios} split", {"users": n}
            )
        span.set_attribute("users", n)
        train = matrix.take(parts[0])
        train = ClickMatrix(
            train.csr,
            train.user_ids,
            train.item_ids,
            {**train.meta, "split": "train", "seed": str(settings.seed)},
        )
        val = _heldout(matrix, parts[1], settings.foldin_fraction, rng, "val")
        test = _heldout(matrix, parts[2], settings.foldin_fraction, rng, "test")
        logger.info(
            "split_finished",
            train_users=train.n_users,
            val_users=val.n_users,
            test_users=test.n_users,
            seed=settings.seed,
        )
        return SplitResult(train, val, test)


def _heldout(
    matrix: ClickMatrix,
    users: np.ndarray,
    fraction: float,
    rng: np.random.Generator,
    name: str,
) -> HeldoutPair:
    foldin_rows: list[np.ndarray] = []
    truth_rows: list[np.ndarray] = []
    kept: list[int] = []
    for u in users:
        row = matrix.row(int(u))
        if len(row) < 2:
            logger.warning(
                "heldout_user_dropped", split=name, user=int(u), clicks=len(row)
            )
            continue
        n_fold = math.floor(fraction * len(row) + 1e-9)
        chosen = np.zeros(len(row), dtype=bool)
        chosen[rng.permutation(len(row))[:n_fold]] = True
        foldin_rows.append(row[chosen])
        truth_rows.append(row[~chosen])
        kept.append(int(u))
    index = np.asarray(kept, dtype=np.int64)
    user_ids = (
        [matrix.user_ids[i] for i in kept] if matrix.user_ids is not None else None
    )
    meta = {"split": name, "foldin_fraction": str(fraction)}
    foldin, truth = (
        ClickMatrix.from_rows(
            rows,
            matrix.n_items,
            user_ids=user_ids,
            item_ids=matrix.item_ids,
            meta={**meta, "part": part},
        )
        for rows, part in ((foldin_rows, "foldin"), (truth_rows, "heldout"))
    )
    return HeldoutPair(foldin, truth, index)


# -- synthetic data ----------------------------------------------------------


def synthesize(
    n_users: int,
    n_items: int,
    n_clusters: int,
    clicks_per_user: int,
    seed: int = 0,
) -> ClickMatrix:
    """Clustered multinomial click data.

    Items are cut into ``n_clusters`` contiguous blocks. A user in cluster
    ``c`` clicks ``clicks_per_user`` distinct items, each drawn from block
    ``c`` with probability 0.8 and uniformly from all items otherwise, so a
    click lands in the user's block with probability ``0.8 + 0.2 * B / M``.
    """
    if n_users < 1 or n_items < 1 or clicks_per_user < 1:
        raise ConfigError("n_users, n_items and clicks_per_user must be >= 1")
    if not 1 <= n_clusters <= n_items:
        raise ConfigError(f"n_clusters must lie in [1, {n_items}]", "n_clusters")
    if clicks_per_user > n_items:
        raise ConfigError(
            f"clicks_per_user={clicks_per_user} exceeds n_items={n_items}",
            "clicks_per_user",
        )
    rng = np.random.default_rng(seed)
    blocks = cluster_blocks(n_items, n_clusters)
    clusters = rng.integers(0, n_clusters, size=n_users)
    rows: list[np.ndarray] = []
    for c in clusters:
        block = blocks[int(c)]
        outside = np.setdiff1d(np.arange(n_items, dtype=np.int64), block)
        p_in = 0.8 + 0.2 * len(block) / n_items
        n_in = int(rng.binomial(clicks_per_user, p_in))
        n_in = min(max(n_in, clicks_per_user - len(outside)), len(block))
        inside = rng.choice(block, size=n_in, replace=False)
        rest = rng.choice(outside, size=clicks_per_user - n_in, replace=False)
        rows.append(np.concatenate([inside, rest]))
    width_u, width_i = len(str(n_users - 1)), len(str(n_items - 1))
    meta = {
        "generator": "clustered_multinomial",
        "n_clusters": str(n_clusters),
        "clicks_per_user": str(clicks_per_user),
        "seed": str(seed),
    }
    logger.info(
        "synthetic_dataset",
        users=n_users,
        items=n_items,
        clusters=n_clusters,
        clicks_per_user=clicks_per_user,
    )
    return ClickMatrix.from_rows(
        rows,
        n_items,
        user_ids=[f"u{i:0{width_u}d}" for i in range(n_users)],
        item_ids=[f"i{j:0{width_i}d}" for j in range(n_items)],
        meta=meta,
    )


def cluster_blocks(n_items: int, n_clusters: int) -> list[np.ndarray]:
    """Item blocks used by :func:`synthesize`."""
    return np.array_split(np.arange(n_items, dtype=np.int64), n_clusters)


def summarize(
    matrix: ClickMatrix, train: ClickMatrix, val: HeldoutPair, test: HeldoutPair
) -> DatasetSummary:
    n_cells = matrix.n_users * matrix.n_items
    return DatasetSummary(
        n_users=matrix.n_users,
        n_items=matrix.n_items,
        n_interactions=matrix.nnz,
        density=matrix.nnz / n_cells if n_cells else 0.0,
        n_heldout_users=val.n_users + test.n_users,
        n_train_users=train.n_users,
        n_val_users=val.n_users,
        n_test_users=test.n_users,
    )
