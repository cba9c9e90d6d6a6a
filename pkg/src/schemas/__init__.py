from .base import ConfigBase, SchemaBase
from .data import DatasetSummary, IngestThresholds, Interaction, SplitSettings
from .evaluation import CompareRow, MetricRow, MetricTable, SweepRow, UserMetricRow
from .objective import LossBreakdown, ObjectiveConfig
from .sparse import AdmmReport
from .training import (
    AdmmRecord,
    EpochRecord,
    StepRecord,
    SweepPoint,
    TrainConfig,
    TrainLog,
    VaeTrainConfig,
    train_config_for,
)

__all__ = [
    "AdmmRecord",
    "AdmmReport",
    "CompareRow",
    "ConfigBase",
    "DatasetSummary",
    "EpochRecord",
    "IngestThresholds",
    "Interaction",
    "LossBreakdown",
    "MetricRow",
    "MetricTable",
    "ObjectiveConfig",
    "SchemaBase",
    "SplitSettings",
    "StepRecord",
    "SweepPoint",
    "SweepRow",
    "TrainConfig",
    "TrainLog",
    "UserMetricRow",
    "VaeTrainConfig",
    "train_config_for",
]
