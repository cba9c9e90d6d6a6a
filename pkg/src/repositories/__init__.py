from .base import FileRepositoryImpl, parse_kv, read_kv, write_kv
from .checkpoint_repository import Checkpoint, CheckpointRepository
from .interfaces import ArtifactRepository
from .matrix_repository import (
    DatasetRepository,
    HeldoutRepository,
    MatrixRepository,
    PreparedData,
)
from .run_log_repository import RunLogRepository

__all__ = [
    "ArtifactRepository",
    "Checkpoint",
    "CheckpointRepository",
    "DatasetRepository",
    "FileRepositoryImpl",
    "HeldoutRepository",
    "MatrixRepository",
    "PreparedData",
    "RunLogRepository",
    "parse_kv",
    "read_kv",
    "write_kv",
]
