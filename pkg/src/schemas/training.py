from __future__ import annotations

import re
from collections.abc import Mapping
from typing import Any, Literal

from typing_extensions import Self

from pydantic import ConfigDict, Field, ValidationError, field_validator

from ..services.exceptions import ConfigError
from .base import ConfigBase, SchemaBase
from .objective import LossBreakdown, ObjectiveConfig

ModelKind = Literal["awae", "dae", "vae"]

_METRIC_RE = re.compile(r"^(ndcg|recall)@(\d+)$")


class TrainConfig(ConfigBase):
    """Configuration of one training run (alternating network/ADMM updates)."""

    batch_size: int = Field(default=500, ge=2, description="Users per batch")
    max_epochs: int = Field(default=200, ge=1, description="Upper bound on epochs")
    objective: ObjectiveConfig = Field(default_factory=ObjectiveConfig)
    latent_dim: int = Field(default=200, ge=1, description="Latent dimension h")
    hidden_dim: int = Field(default=600, ge=1, description="Hidden layer width")
    k_atoms: int | None = Field(
        default=None, ge=1, description="Dictionary atoms K (default latent_dim/2)"
    )
    lr: float = Field(default=1e-3, ge=0, description="Adam learning rate")
    betas: tuple[float, float] = Field(
        default=(0.9, 0.999), description="Adam moment decay rates"
    )
    eps: float = Field(default=1e-8, gt=0, description="Adam denominator epsilon")
    input_dropout: float = Field(
        default=0.5, ge=0, lt=1, description="Inverted dropout on the encoder input"
    )
    noise_std: float = Field(
        default=0.0, ge=0, description="Gaussian noise std added to Z in training"
    )
    normalize_input: bool = Field(
        default=True, description="L2-normalize encoder input rows"
    )
    admm_every: int = Field(default=1, ge=1, description="Batches between S/A updates")
    admm_rho: float = Field(default=1.0, gt=0, description="ADMM penalty rho")
    admm_max_iters: int = Field(default=100, ge=1, description="ADMM iteration cap")
    admm_tol: float = Field(default=1e-6, gt=0, description="ADMM tolerance")
    seed: int = Field(default=0, description="Master random seed")
    early_stop_metric: str = Field(
        default="ndcg@10", description="Validation metric: ndcg@k or recall@k"
    )
    patience: int = Field(
        default=10, ge=1, description="Epochs without improvement before stopping"
    )
    eval_batch_size: int = Field(
        default=1000, ge=1, description="Users per evaluation chunk"
    )

    @field_validator("early_stop_metric")
    @classmethod
    def _check_metric(cls, v: str) -> str:
        v = v.strip().lower()
        match = _METRIC_RE.match(v)
        if not match or int(match.group(2)) < 1:
            raise ValueError(f"early_stop_metric must look like ndcg@10, got {v!r}")
        return v

    @field_validator("betas")
    @classmethod
    def _check_betas(cls, v: tuple[float, float]) -> tuple[float, float]:
        if not all(0 <= b < 1 for b in v):
            raise ValueError("betas must lie in [0, 1)")
        return v

    @property
    def early_stop(self) -> tuple[str, int]:
        match = _METRIC_RE.match(self.early_stop_metric)
        assert match is not None
        return match.group(1), int(match.group(2))

    @property
    def atoms(self) -> int:
        return self.k_atoms or max(1, self.latent_dim // 2)

    # -- flat key=value views ----------------------------------------------

    @classmethod
    def flat_fields(cls) -> dict[str, tuple[Any, str]]:
        """Every flat config key with its default and description."""
        fields: dict[str, tuple[Any, str]] = {}
        for name, info in cls.model_fields.items():
            if name == "objective":
                continue
            default = info.get_default(call_default_factory=True)
            fields[name] = (default, info.description or "")
        for name, info in ObjectiveConfig.model_fields.items():
            fields[name] = (info.default, info.description or "")
        return fields

    @classmethod
    def from_flat(cls, values: Mapping[str, Any]) -> Self:
        """Build from flat keys; objective keys are routed to ObjectiveConfig."""
        known = cls.flat_fields()
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(
                f"unknown config key(s): {', '.join(unknown)}", unknown[0]
            )
        objective_keys = set(ObjectiveConfig.model_fields)
        parsed = {k: _parse_flat_value(v) for k, v in values.items()}
        top = {k: v for k, v in parsed.items() if k not in objective_keys}
        obj = {k: v for k, v in parsed.items() if k in objective_keys}
        try:
            return cls.model_validate({**top, "objective": ObjectiveConfig(**obj)})
        except ValidationError as exc:
            first = exc.errors()[0]
            key = ".".join(str(p) for p in first["loc"])
            raise ConfigError(f"invalid config: {key}: {first['msg']}", key) from exc

    def to_flat(self) -> dict[str, Any]:
        flat = self.model_dump(exclude={"objective"})
        flat.update(self.objective.model_dump())
        return flat


class VaeTrainConfig(TrainConfig):
    """Mult-VAE baseline: TrainConfig plus KL annealing."""

    kl_anneal_cap: float = Field(
        default=0.2, ge=0, le=1, description="Final KL weight (VAE only)"
    )
    anneal_steps: int = Field(
        default=20000, ge=1, description="Steps to anneal the KL weight (VAE only)"
    )


class StepRecord(SchemaBase):
    model_config = ConfigDict(frozen=True)

    epoch: int
    step: int
    reconstruction: float
    smv: float
    mi: float
    sparse: float
    total: float

    @classmethod
    def of(cls, epoch: int, step: int, breakdown: LossBreakdown) -> StepRecord:
        return cls(epoch=epoch, step=step, **breakdown.model_dump())


class AdmmRecord(SchemaBase):
    model_config = ConfigDict(frozen=True)

    epoch: int
    step: int
    target: Literal["s", "a"]
    iterations: int
    primal_residual: float
    dual_residual: float
    converged: bool


class EpochRecord(SchemaBase):
    model_config = ConfigDict(frozen=True)

    epoch: int
    metric: str
    value: float
    improved: bool


class TrainLog(SchemaBase):
    """Everything recorded during a run, ordered by (epoch, step)."""

    steps: list[StepRecord] = Field(default_factory=list)
    admm: list[AdmmRecord] = Field(default_factory=list)
    epochs: list[EpochRecord] = Field(default_factory=list)
    seconds_per_epoch: list[float] = Field(default_factory=list)
    best_epoch: int | None = None

    @property
    def best_value(self) -> float | None:
        if not self.epochs:
            return None
        return max(record.value for record in self.epochs)


def _parse_flat_value(value: Any) -> Any:
    """Text values from key=value files: ``none`` -> None, ``a,b`` -> list."""
    if not isinstance(value, str):
        return value
    text = value.strip()
    if text.lower() in {"", "none", "null"}:
        return None
    if "," in text:
        return [part.strip() for part in text.split(",")]
    return text


class SweepPoint(SchemaBase):
    """One train + evaluate unit of a parameter sweep."""

    model_config = ConfigDict(frozen=True)

    data_dir: str
    run_dir: str
    model_kind: ModelKind = "awae"
    config: dict[str, str] = Field(default_factory=dict)
    param: str
    value: float
    r_list: list[int]
    split: Literal["val", "test"] = "test"


def train_config_for(model_kind: ModelKind, values: Mapping[str, Any]) -> TrainConfig:
    """Flat values to the config class of ``model_kind``.

    VAE-only keys are dropped for the other kinds so one config file can
    drive every model.
    """
    if model_kind == "vae":
        return VaeTrainConfig.from_flat(values)
    vae_only = set(VaeTrainConfig.flat_fields()) - set(TrainConfig.flat_fields())
    return TrainConfig.from_flat({k: v for k, v in values.items() if k not in vae_only})
