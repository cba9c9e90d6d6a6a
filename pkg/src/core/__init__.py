from .config import get_settings, settings
from .logging_config import bind_context, configure_logging, get_logger

__all__ = [
    "bind_context",
    "configure_logging",
    "get_logger",
    "get_settings",
    "settings",
]
