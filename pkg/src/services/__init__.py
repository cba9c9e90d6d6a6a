"""Service layer: the computations behind every command.

Only the exception hierarchy is re-exported here; service modules are
imported directly (``from src.services import trainer_service``).
"""

from .exceptions import (
    ConfigError,
    DataError,
    DivergenceError,
    EmptyDatasetError,
    NotFoundError,
    NumericError,
    ParseError,
    ServiceError,
    ShapeError,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DivergenceError",
    "EmptyDatasetError",
    "NotFoundError",
    "NumericError",
    "ParseError",
    "ServiceError",
    "ShapeError",
]
