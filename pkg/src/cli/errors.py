"""Exceptions to exit codes."""

from __future__ import annotations

import sys
from argparse import Namespace
from collections.abc import Callable

from pydantic import ValidationError

from ..core.logging_config import bind_context, get_logger
from ..services.exceptions import ConfigError, ServiceError

logger = get_logger("cli")

Handler = Callable[[Namespace], int]


def service_error_handler(command: str, exc: ServiceError) -> int:
    """Log the error, print ``error: <message>`` and return its exit code."""
    logger.error(
        "command_failed",
        command=command,
        error=exc.message,
        error_type=type(exc).__name__,
        exit_code=exc.exit_code,
        **exc.details,
    )
    print(f"error: {exc.message}", file=sys.stderr)
    return exc.exit_code


def validation_error_handler(command: str, exc: ValidationError) -> int:
    first = exc.errors()[0]
    key = ".".join(str(p) for p in first["loc"])
    return service_error_handler(
        command, ConfigError(f"invalid value for {key}: {first['msg']}", key)
    )


def run_command(handler: Handler, args: Namespace) -> int:
    command = getattr(args, "command", "awae")
    bind_context(command=command)
    try:
        return handler(args)
    except ServiceError as exc:
        return service_error_handler(command, exc)
    except ValidationError as exc:
        return validation_error_handler(command, exc)
    except Exception as exc:
        logger.exception("command_crashed", command=command)
        print(f"error: unexpected failure: {exc}", file=sys.stderr)
        return 2
