from __future__ import annotations

from typing import Literal

from pydantic import ConfigDict, Field, field_validator, model_validator

from .base import ConfigBase, SchemaBase

Protocol = Literal["ml20m", "netflix", "lastfm"]


class Interaction(SchemaBase):
    """One raw log record before binarization."""

    model_config = ConfigDict(frozen=True)

    user: str
    item: str
    value: float = Field(default=1.0, ge=0, allow_inf_nan=False)

    @field_validator("user", "item", mode="before")
    @classmethod
    def _as_text(cls, v: object) -> str:
        return str(v)


class IngestThresholds(ConfigBase):
    """Binarization and filtering thresholds."""

    min_value: float = Field(default=0.0, ge=0, description="Keep value >= min_value")
    min_user_clicks: int = Field(
        default=0, ge=0, description="Drop users with fewer clicked items"
    )
    min_item_audience: int = Field(
        default=0, ge=0, description="Drop items with fewer distinct users"
    )

    @classmethod
    def for_protocol(
        cls, protocol: Protocol | None, **overrides: float | None
    ) -> IngestThresholds:
        """Preset thresholds; explicit (non-None) overrides win."""
        presets: dict[str, dict[str, float]] = {
            "ml20m": {"min_value": 4.0, "min_user_clicks": 5},
            # same thresholds as ml20m, kept separate so they can diverge
            "netflix": {"min_value": 4.0, "min_user_clicks": 5},
            "lastfm": {"min_item_audience": 50, "min_user_clicks": 20},
        }
        values: dict[str, float] = dict(presets[protocol]) if protocol else {}
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)


class SplitSettings(ConfigBase):
    """User-level partition ratios and fold-in fraction."""

    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    foldin_fraction: float = Field(default=0.8, gt=0, lt=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_ratios(self) -> SplitSettings:
        if any(r <= 0 for r in self.ratios):
            raise ValueError("every split ratio must be > 0")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must sum to 1, got {sum(self.ratios)}")
        return self


class DatasetSummary(SchemaBase):
    """Dataset statistics in the layout of the usual dataset table."""

    n_users: int
    n_items: int
    n_interactions: int
    density: float
    n_heldout_users: int
    n_train_users: int
    n_val_users: int
    n_test_users: int
