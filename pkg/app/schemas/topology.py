"""
Network topology schemas.

Two graphs describe an open-channel network (OCN):

- the **junction graph**: junctions are nodes, channels are undirected edges;
- the **channel graph**, its adjoint (line graph): one node per channel, two
  channels adjacent iff they share a junction.  Every agent of the protocol
  sits on a node of this graph.

Indices are 0-based everywhere inside the package.  Text inputs (edge-list
files, inline scenario edges) are 1-based and converted at the boundary.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class JunctionTopology(BaseModel):
    """The given undirected OCN graph: ``m`` junctions, ``n`` channels.

    Built through :func:`app.ocn.graph.junction_topology`, which enforces
    the structural invariants (simple, connected, ``m >= 3``, ``n >= 2``).
    """

    model_config = ConfigDict(frozen=True)

    m: int = Field(..., ge=1, description="Number of junctions")
    channel_edges: tuple[tuple[int, int], ...] = Field(
        ..., description="Channels as 0-based junction pairs (i < j), in input order",
    )
    labels: tuple[str, ...] | None = Field(None, description="Optional per-junction names")

    @property
    def n(self) -> int:
        """Number of channels."""
        return len(self.channel_edges)

    def degrees(self) -> list[int]:
        """Junction degrees ``d°_i``."""
        deg = [0] * self.m
        for i, j in self.channel_edges:
            deg[i] += 1
            deg[j] += 1
        return deg


class ChannelTopology(BaseModel):
    """Adjoint graph of a junction graph, with the constants the protocol needs.

    Node ``l`` corresponds to ``channel_edges[l]`` of the source junction
    graph, so downstream indices follow the input order.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., ge=2)
    adjacency: np.ndarray = Field(..., description="Symmetric 0/1 matrix (n x n), zero diagonal")
    neighborhoods: tuple[tuple[int, ...], ...]
    degrees: tuple[int, ...]
    d_m: int = Field(..., ge=1, description="Minimum degree")
    d_M: int = Field(..., ge=1, description="Maximum degree")
    rho: int = Field(..., ge=1, description="Radius (minimum eccentricity)")
    phi: int = Field(..., ge=1, description="Diameter (maximum eccentricity)")
    channel_edges: tuple[tuple[int, int], ...] = Field(
        ..., description="Source junction pair of every channel node",
    )

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    @property
    def is_regular(self) -> bool:
        return self.d_m == self.d_M

    def closed_neighborhood(self, i: int) -> tuple[int, ...]:
        """``N̄_i = N_i ∪ {i}``, sorted."""
        return tuple(sorted((*self.neighborhoods[i], i)))
