from __future__ import annotations

from typing import Literal

from pydantic import ConfigDict, Field

from .base import SchemaBase

MetricName = Literal["recall", "ndcg", "dcg"]


class MetricRow(SchemaBase):
    """Mean of one ranking metric at one cutoff."""

    model_config = ConfigDict(frozen=True)

    metric: MetricName
    R: int = Field(..., ge=1)
    mean: float
    n_users: int = Field(..., ge=0)


class UserMetricRow(SchemaBase):
    model_config = ConfigDict(frozen=True)

    user: int
    metric: MetricName
    R: int
    value: float


class MetricTable(SchemaBase):
    """Aggregated ranking metrics, one row per (metric, R)."""

    rows: list[MetricRow] = Field(default_factory=list)
    per_user: list[UserMetricRow] | None = None

    def get(self, metric: str, r: int) -> float:
        for row in self.rows:
            if row.metric == metric and row.R == r:
                return row.mean
        raise KeyError(f"{metric}@{r}")


class CompareRow(SchemaBase):
    """One model's metric in a side-by-side comparison."""

    model_config = ConfigDict(frozen=True)

    model: str
    metric: MetricName
    R: int
    mean: float
    n_users: int


class SweepRow(SchemaBase):
    model_config = ConfigDict(frozen=True)

    param_value: float
    metric: MetricName
    R: int
    mean: float
