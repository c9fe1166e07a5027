"""
Reference-generation state schemas.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class RgpState(BaseModel):
    """Ensemble of reference increments at step ``k``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: np.ndarray = Field(..., description="Reference increments x(k), one per channel (m)")
    k: int = Field(0, ge=0)
    eta_history: tuple[float, ...] = ()
    alpha: float = Field(0.0, description="Mean removed by detrending")
    lower: np.ndarray | None = Field(None, description="Per-channel lower bound -h_Z")
    upper: np.ndarray | None = Field(None, description="Per-channel upper bound h_S - h_Z")

    @property
    def n(self) -> int:
        return int(self.x.shape[0])


class EtaBounds(BaseModel):
    eta_L: float = Field(..., gt=0.0, lt=1.0)
    eta_H: float = Field(..., gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _ordered(self) -> "EtaBounds":
        if self.eta_L > self.eta_H:
            raise ValueError(f"eta_L={self.eta_L} exceeds eta_H={self.eta_H}")
        return self


class DetrendResult(BaseModel):
    """Zero-mean initial state and the mean that was removed."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x0: np.ndarray
    alpha: float
    mode: Literal["exact", "consensus"] = "exact"
    steps: int = Field(0, ge=0, description="Average-consensus steps spent (consensus mode)")
    residual: float = Field(0.0, ge=0.0, description="Disagreement left in the mean estimates")
