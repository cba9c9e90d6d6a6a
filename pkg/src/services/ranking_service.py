"""Top-N ranking metrics over held-out users.

Items are ranked by descending score; equal scores order by ascending item
index. Recall@R divides hits by ``min(R, |I_u|)``; DCG uses ``log2(k + 1)``
discounts and NDCG normalizes by the DCG of ``min(R, |I_u|)`` leading hits.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from ..core.logging_config import get_logger
from ..core.tracing import get_tracer
from ..models.click_matrix import HeldoutPair
from ..models.network import MlpParams
from ..models.ranking import RankingResult
from ..schemas.evaluation import MetricRow, MetricTable, UserMetricRow
from .exceptions import ConfigError, DataError
from .network_service import predict_scores

Array = NDArray[np.float64]
Scorer = Callable[[Array], Array]

logger = get_logger(__name__)

TABLE_METRICS = ("recall", "ndcg")


def _discounts(r: int) -> Array:
    return 1.0 / np.log2(np.arange(2, r + 2, dtype=np.float64))


def _check_r(r: int) -> None:
    if r < 1:
        raise ConfigError(f"cutoff R must be >= 1, got {r}", "r")


def recall_at(result: RankingResult, r: int) -> float:
    _check_r(r)
    return float(result.hits(r).sum()) / min(r, len(result.truth))


def dcg_at(result: RankingResult, r: int) -> float:
    _check_r(r)
    hits = result.hits(r)
    return float(np.sum(hits * _discounts(len(hits))))


def ndcg_at(result: RankingResult, r: int) -> float:
    ideal = float(np.sum(_discounts(min(r, len(result.truth)))))
    return dcg_at(result, r) / ideal


def rank_items(scores: Array) -> NDArray[np.int64]:
    """Item indices by descending score, ties by ascending index.

    For a 1-d score vector ``-inf`` (masked) items are left out.
    """
    order = np.argsort(-scores, axis=-1, kind="stable")
    if scores.ndim == 1:
        order = order[scores[order] != -np.inf]
    return order.astype(np.int64)


def user_metrics(
    scores: Array, truth: Array, r_list: Sequence[int]
) -> dict[tuple[str, int], Array]:
    """Per-user recall, dcg and ndcg for a block of users."""
    n_items = scores.shape[1]
    r_max = min(max(r_list), n_items)
    order = rank_items(scores)[:, :r_max]
    hits = np.take_along_axis(truth > 0, order, axis=1)
    n_truth = (truth > 0).sum(axis=1)
    if np.any(n_truth == 0):
        raise DataError("every evaluated user needs a non-empty truth set")
    discounts = _discounts(r_max)
    ideal = np.cumsum(discounts)
    out: dict[tuple[str, int], Array] = {}
    for r in r_list:
        top = hits[:, :r]
        cutoff = np.minimum(r, n_truth)
        dcg = top @ discounts[: top.shape[1]]
        out["recall", r] = top.sum(axis=1) / cutoff
        out["dcg", r] = dcg
        out["ndcg", r] = dcg / ideal[cutoff - 1]
    return out


def _table(
    blocks: list[dict[tuple[str, int], Array]],
    heldout: HeldoutPair,
    r_list: Sequence[int],
    per_user: bool,
) -> MetricTable:
    merged = {
        key: np.concatenate([block[key] for block in blocks]) for key in blocks[0]
    }
    rows = [
        MetricRow(
            metric=metric,
            R=r,
            mean=float(np.mean(merged[metric, r])),
            n_users=len(merged[metric, r]),
        )
        for r in r_list
        for metric in TABLE_METRICS
    ]
    logger.info(
        "evaluation_finished",
        users=heldout.n_users,
        **{f"{m}_at_{r}": float(np.mean(merged[m, r])) for (m, r) in merged},
    )
    users = None
    if per_user:
        users = [
            UserMetricRow(user=int(u), metric=metric, R=r, value=float(values[k]))
            for (metric, r), values in merged.items()
            for k, u in enumerate(heldout.user_index)
        ]
    return MetricTable(rows=rows, per_user=users)


def _normalize_r(r_list: Sequence[int]) -> list[int]:
    if not r_list:
        raise ConfigError("at least one cutoff R is required", "r")
    for r in r_list:
        _check_r(r)
    return list(dict.fromkeys(int(r) for r in r_list))


def evaluate_scorer(
    scorer: Scorer,
    heldout: HeldoutPair,
    r_list: Sequence[int],
    *,
    batch_size: int = 1000,
    per_user: bool = False,
) -> MetricTable:
    """Evaluate any fold-in -> scores function over user chunks."""
    r_values = _normalize_r(r_list)
    if heldout.n_users == 0:
        raise DataError("no held-out users to evaluate")
    with get_tracer().start_as_current_span("ranking.evaluate") as span:
        span.set_attribute("users", heldout.n_users)
        blocks = []
        for start in range(0, heldout.n_users, batch_size):
            index = np.arange(start, min(start + batch_size, heldout.n_users))
            scores = scorer(heldout.foldin.dense(index))
            truth = heldout.heldout_truth.dense(index)
            blocks.append(user_metrics(scores, truth, r_values))
        return _table(blocks, heldout, r_values, per_user)


def evaluate_scores(
    scores: Array,
    heldout: HeldoutPair,
    r_list: Sequence[int],
    *,
    per_user: bool = False,
) -> MetricTable:
    """Rank a precomputed ``n_users x n_items`` score matrix."""
    if scores.shape != (heldout.n_users, heldout.n_items):
        raise DataError(
            f"scores shape {scores.shape} does not match held-out users "
            f"{(heldout.n_users, heldout.n_items)}"
        )
    r_values = _normalize_r(r_list)
    if heldout.n_users == 0:
        raise DataError("no held-out users to evaluate")
    with get_tracer().start_as_current_span("ranking.evaluate"):
        block = user_metrics(scores, heldout.heldout_truth.dense(), r_values)
        return _table([block], heldout, r_values, per_user)


def evaluate(
    params: MlpParams,
    heldout: HeldoutPair,
    r_list: Sequence[int],
    *,
    batch_size: int = 1000,
    per_user: bool = False,
) -> MetricTable:
    """Score fold-in rows with the network and rank the held-out items."""
    return evaluate_scorer(
        lambda rows: predict_scores(params, rows),
        heldout,
        r_list,
        batch_size=batch_size,
        per_user=per_user,
    )
