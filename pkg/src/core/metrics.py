"""Prometheus metrics for training runs.

A run is a batch job, not a scrape target, so each run owns a private
``CollectorRegistry`` and dumps it with ``write_to_textfile`` into the run
directory (node-exporter textfile collector format).
"""

from __future__ import annotations

from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram
from prometheus_client import write_to_textfile as _write_to_textfile

from ..schemas.objective import LossBreakdown
from .config import get_settings


class TrainingMetrics:
    """Per-run gauges/counters; labels carry the model kind."""

    def __init__(self, model_kind: str) -> None:
        self.model_kind = model_kind
        self.registry = CollectorRegistry()
        self.steps = Counter(
            "awae_train_steps_total",
            "Optimizer steps taken",
            ["model_kind"],
            registry=self.registry,
        )
        self.loss = Gauge(
            "awae_train_loss",
            "Last training loss by term",
            ["model_kind", "term"],
            registry=self.registry,
        )
        self.validation = Gauge(
            "awae_validation_metric",
            "Last validation early-stopping metric",
            ["model_kind", "metric"],
            registry=self.registry,
        )
        self.epoch = Gauge(
            "awae_epoch",
            "Last completed epoch",
            ["model_kind"],
            registry=self.registry,
        )
        self.admm_iterations = Histogram(
            "awae_admm_iterations",
            "ADMM iterations per sparse-code update",
            ["model_kind", "target"],
            buckets=(1, 2, 5, 10, 20, 50, 100, 200, 500, 1000),
            registry=self.registry,
        )

    def observe_step(self, breakdown: LossBreakdown) -> None:
        self.steps.labels(model_kind=self.model_kind).inc()
        for term, value in breakdown.model_dump().items():
            self.loss.labels(model_kind=self.model_kind, term=term).set(value)

    def observe_admm(self, target: str, iterations: int) -> None:
        self.admm_iterations.labels(model_kind=self.model_kind, target=target).observe(
            iterations
        )

    def observe_epoch(self, epoch: int, metric: str, value: float) -> None:
        self.epoch.labels(model_kind=self.model_kind).set(epoch)
        self.validation.labels(model_kind=self.model_kind, metric=metric).set(value)

    def write(self, run_dir: Path) -> None:
        """Dump the registry to ``run_dir/metrics.prom`` if enabled."""
        if not get_settings().METRICS_TEXTFILE:
            return
        _write_to_textfile(str(run_dir / "metrics.prom"), self.registry)
