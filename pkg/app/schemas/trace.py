"""
Run trace schemas.

A :class:`RunTrace` holds one row per protocol step ``k = 0..K`` where
``K`` is the termination step, or ``k_max`` when the run did not converge.
``eta[k]`` is the mixing value applied to go from row ``k`` to ``k + 1``,
so the last row has none.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field


class TraceRow(BaseModel):
    """One protocol step as written to ``trace.csv``."""

    k: int
    x: list[float]
    eta: float | None
    W: float
    x_inf: float
    c_D_min: float
    c_U_min: float
    delta_x_star: float
    mcp_messages: int = 0


class RunTrace(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    engine: Literal["centralized", "distributed"]
    x: np.ndarray = Field(..., description="States, shape (K+1, n)")
    eta: np.ndarray = Field(..., description="Applied mixing values, shape (K,)")
    c_D: np.ndarray = Field(..., description="Download limits per row and channel, shape (K+1, n)")
    c_U: np.ndarray = Field(..., description="Upload limits per row and channel, shape (K+1, n)")
    W: np.ndarray
    x_inf: np.ndarray
    delta_x_star: np.ndarray
    mcp_messages: np.ndarray = Field(..., description="Messages exchanged per row (0 for centralized)")
    agent_eta: np.ndarray | None = Field(None, description="Per-agent mixing values, shape (K, n)")
    gamma: float
    k_max: int
    converged: bool
    k_bar: int | None = None

    @property
    def n(self) -> int:
        return int(self.x.shape[1])

    @property
    def last_k(self) -> int:
        return int(self.x.shape[0]) - 1

    @property
    def status(self) -> str:
        return "converged" if self.converged else "not_converged"

    def row(self, k: int) -> TraceRow:
        return TraceRow(
            k=k,
            x=self.x[k].tolist(),
            eta=float(self.eta[k]) if k < self.eta.shape[0] else None,
            W=float(self.W[k]),
            x_inf=float(self.x_inf[k]),
            c_D_min=float(self.c_D[k].min()),
            c_U_min=float(self.c_U[k].min()),
            delta_x_star=float(self.delta_x_star[k]),
            mcp_messages=int(self.mcp_messages[k]),
        )

    def rows(self) -> list[TraceRow]:
        return [self.row(k) for k in range(self.last_k + 1)]

    def to_frame(self) -> pd.DataFrame:
        """Tabular form with columns ``k, x_1..x_n, eta, W, x_inf, c_D_min, c_U_min, delta_x_star, mcp_messages``."""
        rows = self.last_k + 1
        data: dict[str, np.ndarray] = {"k": np.arange(rows)}
        for i in range(self.n):
            data[f"x_{i + 1}"] = self.x[:, i]
        eta = np.full(rows, np.nan)
        eta[: self.eta.shape[0]] = self.eta
        data["eta"] = eta
        data["W"] = self.W
        data["x_inf"] = self.x_inf
        data["c_D_min"] = self.c_D.min(axis=1)
        data["c_U_min"] = self.c_U.min(axis=1)
        data["delta_x_star"] = self.delta_x_star
        data["mcp_messages"] = self.mcp_messages.astype(np.int64)
        return pd.DataFrame(data)
