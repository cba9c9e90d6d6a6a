"""OpenTelemetry tracing setup.

``init_tracing()`` is called once by the command-line entry point (and by
each sweep worker process, which is a fresh interpreter). Services create
spans through ``get_tracer()``; until tracing is initialised, or when it is
disabled, that is the no-op tracer and spans cost nothing.

Sampling:
    Controlled by ``TRACING_SAMPLE_RATE``. ``ParentBased`` means a sweep
    worker's spans follow the decision taken for the parent command.
"""

from __future__ import annotations

from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor
from opentelemetry.sdk.trace.sampling import (
    ALWAYS_OFF,
    ALWAYS_ON,
    ParentBased,
    Sampler,
    TraceIdRatioBased,
)
from opentelemetry.trace import Tracer

from .config import get_settings

_tracer: Tracer = trace.get_tracer("awae")


def get_tracer() -> Tracer:
    """Return the application tracer.

    Use for manual instrumentation:

        from src.core.tracing import get_tracer

        with get_tracer().start_as_current_span("my_operation"):
            ...
    """
    return _tracer


def _build_sampler() -> Sampler:
    """Build a ParentBased sampler from settings."""
    settings = get_settings()
    if not settings.TRACING_ENABLED:
        return ALWAYS_OFF
    rate = settings.TRACING_SAMPLE_RATE
    if rate >= 0.999:
        root = ALWAYS_ON
    elif rate <= 0.001:
        root = ALWAYS_OFF
    else:
        root = TraceIdRatioBased(rate)
    return ParentBased(root=root)


def _make_provider(*, role: str) -> TracerProvider:
    """Construct a TracerProvider with the right resource + sampler."""
    settings = get_settings()
    resource = Resource.create(
        {
            "service.name": settings.APP_NAME,
            "service.version": settings.APP_VERSION,
            "service.role": role,  # "cli" | "sweep-worker"
        }
    )
    provider = TracerProvider(resource=resource, sampler=_build_sampler())
    exporter = OTLPSpanExporter(endpoint=settings.OTLP_ENDPOINT, insecure=True)
    provider.add_span_processor(BatchSpanProcessor(exporter))
    return provider


def init_tracing(*, role: str = "cli") -> None:
    """Install the global TracerProvider when tracing is enabled."""
    global _tracer
    if not get_settings().TRACING_ENABLED:
        return
    trace.set_tracer_provider(_make_provider(role=role))
    _tracer = trace.get_tracer("awae")
