"""Tests for junction-graph validation, generators, edge-list parsing and the adjoint graph."""

import networkx as nx
import numpy as np
import pytest

from app.core.errors import TopologyError
from app.ocn.graph import (
    adjoint_edge_count,
    build_line_graph,
    channel_graph,
    complete_topology,
    cycle_topology,
    graph_metrics,
    incidence_adjacency,
    junction_topology,
    load_edge_list,
    parse_edge_list,
    path_topology,
    shared_junction_adjacency,
    star_topology,
    synthetic_sparse_topology,
)
from app.schemas.topology import JunctionTopology


# ======================================================================
# junction_topology
# ======================================================================


class TestJunctionTopology:
    def test_normalises_orientation(self):
        jt = junction_topology(3, [(1, 0), (2, 1)])
        assert jt.channel_edges == ((0, 1), (1, 2))
        assert jt.n == 2

    def test_degrees(self):
        jt = star_topology(5)
        assert jt.degrees() == [4, 1, 1, 1, 1]

    @pytest.mark.parametrize(
        "m, edges, fragment",
        [
            (2, [(0, 1)], "at least 3 junctions"),
            (3, [(0, 1)], "at least 2 channels"),
            (3, [(0, 0), (1, 2)], "self-loop"),
            (3, [(0, 1), (1, 0)], "duplicates"),
            (3, [(0, 1), (1, 3)], "outside"),
            (4, [(0, 1), (2, 3)], "disconnected"),
        ],
    )
    def test_rejects_invalid(self, m, edges, fragment):
        with pytest.raises(TopologyError, match=fragment):
            junction_topology(m, edges)

    def test_label_count_checked(self):
        with pytest.raises(TopologyError, match="labels"):
            junction_topology(3, [(0, 1), (1, 2)], labels=["a", "b"])


# ======================================================================
# Edge-list text
# ======================================================================


class TestParseEdgeList:
    def test_comments_and_blank_lines(self):
        text = "# header\n1 2\n\n2 3  # trailing\n3,4\n"
        jt = parse_edge_list(text)
        assert jt.m == 4
        assert jt.channel_edges == ((0, 1), (1, 2), (2, 3))

    def test_explicit_m(self):
        jt = parse_edge_list("1 2\n2 3\n3 1\n", m=3)
        assert jt.m == 3

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("1 2\n2 3\n2 2\n", "line 3: self-loop"),
            ("1 2\n2 1\n", "line 2: duplicate"),
            ("1 2\nx 3\n", "line 2: junction indices must be integers"),
            ("1 2 3\n", "line 1: expected two"),
            ("0 1\n1 2\n", "line 1: junction indices are 1-based"),
        ],
    )
    def test_errors_carry_line_numbers(self, text, fragment):
        with pytest.raises(TopologyError, match=fragment):
            parse_edge_list(text)

    def test_empty(self):
        with pytest.raises(TopologyError, match="empty"):
            parse_edge_list("# nothing\n")

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("1 2\n2 3\n3 4\n", encoding="utf-8")
        assert load_edge_list(path).n == 3

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(TopologyError, match="Cannot read"):
            load_edge_list(tmp_path / "missing.txt")

    def test_load_prefixes_path(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2\n1 1\n", encoding="utf-8")
        with pytest.raises(TopologyError, match="bad.txt: line 2"):
            load_edge_list(path)


# ======================================================================
# Adjacency cross-checks
# ======================================================================


class TestAdjacency:
    @pytest.mark.parametrize(
        "jt",
        [path_topology(5), star_topology(6), cycle_topology(7), complete_topology(6), synthetic_sparse_topology()],
        ids=["path", "star", "cycle", "complete", "synthetic"],
    )
    def test_incidence_matches_shared_junction_rule(self, jt):
        a = incidence_adjacency(jt)
        assert np.array_equal(a, shared_junction_adjacency(jt))
        assert int(a.sum()) // 2 == adjoint_edge_count(jt)

    def test_matches_networkx_line_graph(self):
        jt = synthetic_sparse_topology()
        ct = build_line_graph(jt)
        g = nx.Graph(list(jt.channel_edges))
        expected = nx.line_graph(g)
        index = {pair: i for i, pair in enumerate(jt.channel_edges)}
        ours = {frozenset((index[tuple(sorted(u))], index[tuple(sorted(v))])) for u, v in expected.edges()}
        assert ours == {frozenset(e) for e in channel_graph(ct).edges()}


# ======================================================================
# build_line_graph
# ======================================================================


class TestBuildLineGraph:
    def test_path3_gives_k2(self):
        ct = build_line_graph(path_topology(3))
        assert ct.n == 2
        assert (ct.d_m, ct.d_M, ct.rho, ct.phi) == (1, 1, 1, 1)
        assert ct.neighborhoods == ((1,), (0,))

    def test_star_gives_complete(self):
        ct = build_line_graph(star_topology(5))
        assert ct.n == 4
        assert ct.is_regular
        assert (ct.d_M, ct.rho, ct.phi) == (3, 1, 1)

    def test_cycle_gives_cycle(self):
        ct = build_line_graph(cycle_topology(8))
        assert ct.d_m == ct.d_M == 2
        assert ct.rho == ct.phi == 4

    def test_complete22(self):
        ct = build_line_graph(complete_topology(22))
        assert ct.n == 231
        assert ct.d_m == ct.d_M == 40
        assert ct.rho == ct.phi == 2
        assert ct.edge_count == 4620

    def test_synthetic_sparse(self):
        jt = synthetic_sparse_topology()
        ct = build_line_graph(jt)
        assert (jt.m, ct.n) == (22, 25)
        assert (ct.d_m, ct.d_M) == (2, 5)
        assert ct.edge_count == adjoint_edge_count(jt) == 35
        assert ct.rho <= ct.phi

    def test_metrics_recomputed_from_adjacency(self):
        ct = build_line_graph(synthetic_sparse_topology())
        assert graph_metrics(ct) == (ct.d_m, ct.d_M, ct.rho, ct.phi)

    def test_node_order_follows_input(self):
        jt = junction_topology(4, [(2, 3), (0, 1), (1, 2)])
        ct = build_line_graph(jt)
        assert ct.channel_edges == ((2, 3), (0, 1), (1, 2))
        assert ct.neighborhoods[0] == (2,)

    def test_closed_neighborhood(self):
        ct = build_line_graph(path_topology(4))
        assert ct.closed_neighborhood(1) == (0, 1, 2)

    def test_revalidates_hand_built_input(self):
        jt = JunctionTopology(m=4, channel_edges=((0, 1), (2, 3)))
        with pytest.raises(TopologyError, match="disconnected"):
            build_line_graph(jt)
