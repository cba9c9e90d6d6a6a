from pydantic import ConfigDict

from .base import SchemaBase


class AdmmReport(SchemaBase):
    """Exit state of one ADMM solve."""

    model_config = ConfigDict(frozen=True)

    iterations: int
    primal_residual: float
    dual_residual: float
    primal_tolerance: float
    dual_tolerance: float
    converged: bool
