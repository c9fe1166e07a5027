"""
Junction graphs, adjoint (channel) graphs and their topological constants.

An open-channel network is handed in as a junction graph: junctions are
nodes, channels are undirected edges.  Agents live on channels, so the
protocol runs on the adjoint graph, where two channels are neighbours iff
they share a junction.

Key design choices
------------------

1. **Simple junction graphs only**: parallel channels between the same
   junction pair must be modelled as distinct junction pairs.
2. **Stable ordering**: node ``l`` of the adjoint graph is
   ``channel_edges[l]``; every downstream index (weights, traces, reports)
   follows the input order.
3. **Three-way cross-check**: the adjacency is computed from the oriented
   incidence matrix (``|EᵀE − 2I|``), compared with the shared-junction rule
   and with the closed-form edge count on every construction.
4. **BFS eccentricities**: radius and diameter come from breadth-first
   search on the unweighted adjoint graph.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from pathlib import Path

import networkx as nx
import numpy as np

from app.core.errors import TopologyError
from app.core.logging import get_logger
from app.schemas.topology import ChannelTopology, JunctionTopology

logger = get_logger(__name__)

# ======================================================================
# Shipped synthetic sparse network
# ======================================================================

# 22 junctions, 25 channels: a 22-cycle plus three chords.  Synthetic
# demo topology with minimum adjoint degree 2 and maximum 5; it is NOT a
# surveyed water network.
SYNTHETIC_22X25_EDGES: tuple[tuple[int, int], ...] = (
    *((i, i + 1) for i in range(1, 22)),
    (1, 22),
    (1, 8),
    (8, 15),
    (4, 19),
)

# ======================================================================
# Construction and validation
# ======================================================================


def junction_topology(m: int, edges: Iterable[tuple[int, int]],
                      labels: Sequence[str] | None = None) -> JunctionTopology:
    """Validate and build a :class:`JunctionTopology`.

    Args:
        m: Number of junctions.
        edges: Channels as 0-based junction pairs, in any orientation.
        labels: Optional junction names, one per junction.

    Returns:
        A junction topology with every pair normalised to ``i < j``.

    Raises:
        TopologyError: On self-loops, duplicates, out-of-range indices,
            fewer than 3 junctions or 2 channels, or a disconnected graph.
    """
    if m < 3:
        raise TopologyError(f"An OCN needs at least 3 junctions, got m={m}")

    normalised: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for pos, (a, b) in enumerate(edges):
        a, b = int(a), int(b)
        if a == b:
            raise TopologyError(f"Channel {pos} is a self-loop on junction {a}")
        for v in (a, b):
            if not 0 <= v < m:
                raise TopologyError(f"Channel {pos} references junction {v}, outside [0, {m - 1}]")
        pair = (min(a, b), max(a, b))
        if pair in seen:
            raise TopologyError(f"Channel {pos} duplicates junction pair {pair}")
        seen.add(pair)
        normalised.append(pair)

    if len(normalised) < 2:
        raise TopologyError(f"An OCN needs at least 2 channels, got n={len(normalised)}")

    if labels is not None and len(labels) != m:
        raise TopologyError(f"Expected {m} junction labels, got {len(labels)}")

    g = nx.Graph()
    g.add_nodes_from(range(m))
    g.add_edges_from(normalised)
    if not nx.is_connected(g):
        parts = nx.number_connected_components(g)
        raise TopologyError(f"Junction graph is disconnected ({parts} components)")

    return JunctionTopology(m=m, channel_edges=tuple(normalised),
                            labels=tuple(labels) if labels is not None else None)


def junction_graph(jt: JunctionTopology) -> nx.Graph:
    """networkx view of the junction graph (nodes ``0..m-1``)."""
    g = nx.Graph()
    g.add_nodes_from(range(jt.m))
    g.add_edges_from(jt.channel_edges)
    return g


def channel_graph(ct: ChannelTopology) -> nx.Graph:
    """networkx view of the adjoint graph (nodes ``0..n-1``)."""
    g = nx.Graph()
    g.add_nodes_from(range(ct.n))
    for i, nbrs in enumerate(ct.neighborhoods):
        g.add_edges_from((i, j) for j in nbrs if j > i)
    return g


# ======================================================================
# Generators
# ======================================================================


def complete_topology(m: int) -> JunctionTopology:
    """``K_m``; channels in lexicographic junction-pair order."""
    return junction_topology(m, [(i, j) for i in range(m) for j in range(i + 1, m)])


def path_topology(m: int) -> JunctionTopology:
    return junction_topology(m, [(i, i + 1) for i in range(m - 1)])


def star_topology(m: int) -> JunctionTopology:
    """Junction 0 is the hub, ``m - 1`` leaves."""
    return junction_topology(m, [(0, i) for i in range(1, m)])


def cycle_topology(m: int) -> JunctionTopology:
    return junction_topology(m, [(i, (i + 1) % m) for i in range(m)])


def synthetic_sparse_topology() -> JunctionTopology:
    """The shipped 22-junction / 25-channel demo network."""
    return junction_topology(22, [(a - 1, b - 1) for a, b in SYNTHETIC_22X25_EDGES])


# ======================================================================
# Edge-list text
# ======================================================================


def parse_edge_list(text: str, m: int | None = None) -> JunctionTopology:
    """Parse a 1-based ``"i j"`` per line edge list.

    Blank lines and ``#`` comments are skipped.  When *m* is omitted the
    junction count is the largest index seen.

    Raises:
        TopologyError: With the 1-based line number of the offending line.
    """
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.replace(",", " ").split()
        if len(tokens) != 2:
            raise TopologyError(f"line {lineno}: expected two junction indices, got {raw.strip()!r}")
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise TopologyError(f"line {lineno}: junction indices must be integers, got {raw.strip()!r}") from None
        if a < 1 or b < 1:
            raise TopologyError(f"line {lineno}: junction indices are 1-based, got {a} {b}")
        if a == b:
            raise TopologyError(f"line {lineno}: self-loop on junction {a}")
        pair = (min(a, b), max(a, b))
        if pair in seen:
            raise TopologyError(f"line {lineno}: duplicate channel {pair[0]} {pair[1]}")
        seen.add(pair)
        edges.append((a, b))

    if not edges:
        raise TopologyError("edge list is empty")

    size = m if m is not None else max(max(e) for e in edges)
    return junction_topology(size, [(a - 1, b - 1) for a, b in edges])


def load_edge_list(path: str | Path, m: int | None = None) -> JunctionTopology:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TopologyError(f"Cannot read edge list {path}: {e}") from e
    try:
        return parse_edge_list(text, m)
    except TopologyError as e:
        raise TopologyError(f"{path}: {e}") from e


# ======================================================================
# Adjacency of the adjoint graph
# ======================================================================


def oriented_incidence(jt: JunctionTopology) -> np.ndarray:
    """Oriented ``m x n`` incidence matrix (``-1`` at the lower junction)."""
    e = nx.incidence_matrix(junction_graph(jt), nodelist=list(range(jt.m)), edgelist=list(jt.channel_edges),
                            oriented=True)
    return np.asarray(e.toarray(), dtype=np.int64)


def incidence_adjacency(jt: JunctionTopology) -> np.ndarray:
    """``|EᵀE − 2Iₙ|`` entrywise."""
    e = oriented_incidence(jt)
    return np.abs(e.T @ e - 2 * np.eye(jt.n, dtype=np.int64)).astype(np.int8)


def shared_junction_adjacency(jt: JunctionTopology) -> np.ndarray:
    """Adjacency by the combinatorial rule: channels touching a common junction."""
    at_junction: list[list[int]] = [[] for _ in range(jt.m)]
    for ell, (i, j) in enumerate(jt.channel_edges):
        at_junction[i].append(ell)
        at_junction[j].append(ell)

    a = np.zeros((jt.n, jt.n), dtype=np.int8)
    for channels in at_junction:
        for p, u in enumerate(channels):
            for v in channels[p + 1:]:
                a[u, v] = a[v, u] = 1
    return a


def adjoint_edge_count(jt: JunctionTopology) -> int:
    """``−n + ½·Σ (d°_i)²``."""
    return -jt.n + sum(d * d for d in jt.degrees()) // 2


# ======================================================================
# Topological constants
# ======================================================================


def _eccentricity_summary(g: nx.Graph) -> tuple[int, int]:
    if not nx.is_connected(g):
        raise TopologyError("Eccentricity is infinite on a disconnected graph")
    ecc = nx.eccentricity(g)
    return min(ecc.values()), max(ecc.values())


def graph_metrics(ct: ChannelTopology) -> tuple[int, int, int, int]:
    """Recompute ``(d_m, d_M, rho, phi)`` from the adjacency of *ct*."""
    g = channel_graph(ct)
    degrees = [d for _, d in g.degree()]
    rho, phi = _eccentricity_summary(g)
    return min(degrees), max(degrees), rho, phi


def build_line_graph(jt: JunctionTopology) -> ChannelTopology:
    """Build the adjoint graph ``L(G°)`` of a junction graph.

    Args:
        jt: A junction topology.  It is re-validated here, so hand-built
            instances that bypass :func:`junction_topology` are rejected.

    Returns:
        :class:`ChannelTopology` with node ``l`` = channel ``l``.

    Raises:
        TopologyError: Invalid input or (never expected) a disagreement
            between the incidence formula, the shared-junction rule and
            the edge-count formula.
    """
    jt = junction_topology(jt.m, jt.channel_edges, jt.labels)

    adjacency = incidence_adjacency(jt)
    if not np.array_equal(adjacency, shared_junction_adjacency(jt)):
        raise TopologyError("Incidence adjacency disagrees with the shared-junction rule")

    edges = int(adjacency.sum()) // 2
    expected = adjoint_edge_count(jt)
    if edges != expected:
        raise TopologyError(f"Adjoint graph has {edges} edges, degree formula gives {expected}")

    neighborhoods = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adjacency)
    degrees = tuple(len(nb) for nb in neighborhoods)
    g = nx.from_numpy_array(adjacency)
    rho, phi = _eccentricity_summary(g)

    ct = ChannelTopology(n=jt.n, adjacency=adjacency, neighborhoods=neighborhoods, degrees=degrees,
                         d_m=min(degrees), d_M=max(degrees), rho=rho, phi=phi, channel_edges=jt.channel_edges)
    logger.debug("Adjoint graph: n=%d edges=%d d_m=%d d_M=%d rho=%d phi=%d",
                 ct.n, edges, ct.d_m, ct.d_M, ct.rho, ct.phi)
    return ct
