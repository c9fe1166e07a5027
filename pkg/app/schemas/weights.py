"""
Consensus weight schemas.

:class:`ConsensusWeights` carries the Metropolis-Hastings matrix ``P``;
:class:`SpectralSummary` carries the spectral constants the adaptive
protocol derives from it.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from app.schemas.topology import ChannelTopology


class ConsensusWeights(BaseModel):
    """Doubly-stochastic symmetric weight matrix over a channel topology.

    ``P`` is a dense ``ndarray`` for small networks and a CSR array above
    ``settings.DENSE_WEIGHTS_MAX_N`` channels.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    P: np.ndarray | sp.csr_array
    topology: ChannelTopology

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.P)

    def dense(self) -> np.ndarray:
        return self.P.toarray() if self.is_sparse else np.asarray(self.P)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``P @ x``."""
        return np.asarray(self.P @ x, dtype=float)

    def local_weights(self, i: int) -> tuple[tuple[int, ...], np.ndarray]:
        """Closed neighbourhood of channel *i* and the matching row of ``P``."""
        idx = self.topology.closed_neighborhood(i)
        if self.is_sparse:
            row = self.P[[i], :].toarray()[0]
        else:
            row = self.P[i]
        return idx, np.array([row[j] for j in idx], dtype=float)


class SpectralSummary(BaseModel):
    """Spectral constants of ``P`` used to pick the lower mixing bound."""

    lambda_1: float = Field(..., description="Second-largest eigenvalue of P")
    lambda_n_minus_1: float = Field(..., description="Smallest eigenvalue of P")
    varsigma_P: float = Field(..., description="(lambda_1 + lambda_n_minus_1) / 2")
    eta_star: float = Field(..., description="varsigma_P / (varsigma_P - 1), the best static mixing value")
    eta_L: float = Field(..., gt=0.0, lt=1.0, description="eta_star when positive, zeta otherwise")
    zeta: float = Field(..., gt=0.0, lt=1.0)
    static_rate_at_eta_L: float = Field(
        ..., description="Spectral radius of eta_L*I + (1-eta_L)*P on the disagreement subspace",
    )
