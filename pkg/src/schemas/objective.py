from __future__ import annotations

from typing import Literal

from pydantic import ConfigDict, Field

from .base import ConfigBase, SchemaBase

CostKind = Literal["multinomial", "multinomial_nonclick", "mil"]


class ObjectiveConfig(ConfigBase):
    """Weights and hyperparameters of the composite training objective."""

    cost_kind: CostKind = Field(
        default="multinomial", description="Reconstruction cost c(x, x')"
    )
    beta: float = Field(default=1.0, ge=0, description="SMV divergence weight")
    alpha: float = Field(
        default=0.05, ge=0, description="Mutual-information (MMD) regularizer weight"
    )
    delta: float = Field(default=0.1, ge=0, description="Sparse-coding penalty weight")
    lambda1: float = Field(
        default=1.0, ge=0, description="Reconstruction weight of ||Z - SA||_F^2"
    )
    lambda2: float = Field(default=0.1, ge=0, description="L1 weight on codes S")
    gamma: float = Field(
        default=0.1, ge=0, description="Non-click weight of multinomial_nonclick"
    )
    nonclick_complement: bool = Field(
        default=False,
        description="Use gamma*(1-x)*log(1-x') instead of gamma*(1-x)*log(x')",
    )
    gamma_plus: float = Field(default=1.0, description="MIL exponent on (1 - x')")
    a_mi: float = Field(default=1e6, description="MIL amplitude A_MI")
    gamma_mi: int = Field(default=12, ge=1, description="MIL exponent gamma_MI")
    mmd_kernel_bandwidth: float = Field(
        default=1.0, gt=0, description="IMQ kernel bandwidth for the MI estimate"
    )
    mi_unbiased: bool = Field(
        default=True, description="Unbiased (U-statistic) MMD^2 estimate"
    )

    @property
    def output_activation(self) -> Literal["softmax", "sigmoid"]:
        """Decoder output activation the cost requires."""
        return "sigmoid" if self.cost_kind == "mil" else "softmax"


class LossBreakdown(SchemaBase):
    """Per-batch value of every objective term."""

    model_config = ConfigDict(frozen=True)

    reconstruction: float
    smv: float
    mi: float
    sparse: float
    total: float

    @classmethod
    def compose(
        cls,
        reconstruction: float,
        smv: float,
        mi: float,
        sparse: float,
        cfg: ObjectiveConfig,
    ) -> LossBreakdown:
        total = reconstruction + cfg.beta * smv + cfg.alpha * mi + cfg.delta * sparse
        return cls(
            reconstruction=reconstruction, smv=smv, mi=mi, sparse=sparse, total=total
        )
