"""Service layer exceptions.

Every error a command can report derives from :class:`ServiceError` and
carries the process exit code the CLI should use, the way an API error
would carry its HTTP status.
"""

from typing import Any


class ServiceError(Exception):
    """Base exception for service layer."""

    exit_code: int = 2

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ConfigError(ServiceError):
    """Invalid, unknown or inconsistent configuration."""

    exit_code = 1

    def __init__(self, message: str, key: str | None = None):
        details = {"key": key} if key else {}
        super().__init__(message, details)


class DataError(ServiceError):
    """Problem with input data or stored artifacts."""

    exit_code = 2


class EmptyDatasetError(DataError):
    """Nothing survived filtering."""

    def __init__(self, message: str = "empty dataset"):
        super().__init__(message)


class ParseError(DataError):
    """Malformed input record."""

    def __init__(self, message: str, line: int | None = None):
        details = {"line": line} if line is not None else {}
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}", details)


class ShapeError(DataError):
    """Array shapes do not agree with the declared dimensions."""

    def __init__(self, what: str, expected: Any, actual: Any):
        super().__init__(
            f"{what}: expected shape {expected}, got {actual}",
            {"what": what, "expected": str(expected), "actual": str(actual)},
        )


class NotFoundError(DataError):
    """Missing path, checkpoint or run directory."""

    def __init__(self, entity_name: str, location: str):
        message = f"{entity_name} not found at {location}"
        super().__init__(message, {"entity": entity_name, "location": location})


class NumericError(ServiceError):
    """Non-finite values or violated numeric contracts."""

    exit_code = 2


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    def __init__(self, terms: list[str], step: int):
        super().__init__(
            f"non-finite loss at step {step} in term(s): {', '.join(terms)}",
            {"terms": terms, "step": step},
        )
