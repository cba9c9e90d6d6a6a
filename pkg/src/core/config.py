from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process settings with environment variable support (prefix ``AWAE_``)."""

    model_config = SettingsConfigDict(
        env_prefix="AWAE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "awae-cf"
    APP_VERSION: str = "0.1.0"

    # Runs
    RUN_ROOT: Path = Field(
        default=Path("runs"),
        description="Root directory under which run directories are created",
    )

    # Logging & Observability
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FORMAT: Literal["json", "console"] = Field(
        default="json", description="Log renderer: machine-readable JSON or console"
    )
    TRACING_ENABLED: bool = Field(
        default=False,
        description="Export OpenTelemetry spans over OTLP",
    )
    OTLP_ENDPOINT: str = Field(
        default="http://localhost:4317",
        description="OTLP collector endpoint",
    )
    TRACING_SAMPLE_RATE: float = Field(
        default=1.0,
        ge=0.0,
        le=1.0,
        description="Fraction of root traces to sample (0.0 = none, 1.0 = all)",
    )
    METRICS_TEXTFILE: bool = Field(
        default=True,
        description="Write metrics.prom (Prometheus textfile) into each run directory",
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        allowed = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}
        if v.upper() not in allowed:
            raise ValueError(f"LOG_LEVEL must be one of {sorted(allowed)}; got {v!r}")
        return v.upper()


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance. Loads from env via pydantic-settings."""
    return Settings()


# Global settings instance
settings = get_settings()
