from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from stabmatch.graph import (
    Graph,
    GraphFormatError,
    check_distance2_unique,
    generate,
    read_graph,
    write_graph,
)

from .oracles import distance2_violations


class TestNeighbors:
    def test_path_middle(self, p3):
        assert p3.neighbors(1) == (0, 2)

    def test_single_node(self):
        g = Graph.from_edges([7], [])
        assert g.neighbors(7) == ()

    def test_triangle_row(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (1, 3), (2, 3)])
        assert g.neighbors(2) == (1, 3)

    def test_unknown_node(self, p3):
        with pytest.raises(KeyError, match="node not in graph"):
            p3.neighbors(9)

    def test_stable_across_calls(self, triangle):
        assert triangle.neighbors(0) == triangle.neighbors(0)


class TestConstruction:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph.from_edges([0, 1], [(0, 0)])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(ValueError, match="unknown node"):
            Graph.from_edges([0, 1], [(0, 2)])

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError, match="at least one node"):
            Graph.from_edges([], [])

    def test_duplicate_edges_collapse(self):
        g = Graph.from_edges([0, 1], [(0, 1), (1, 0)])
        assert g.m == 1


class TestDistance2Unique:
    def test_shared_id_at_distance_two(self):
        # path with identifier values 1-2-1: endpoints clash
        g = Graph.from_edges([0, 1, 2], [(0, 1), (1, 2)], ident={0: 1, 1: 2, 2: 1})
        assert check_distance2_unique(g) == [(0, 2)]

    def test_globally_unique_ids_ok(self):
        g = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])
        assert check_distance2_unique(g) == []

    def test_two_disjoint_edges_same_labels_ok(self):
        # two components, both labeled {1, 2}; clash is at distance infinity
        g = Graph.from_edges(
            [0, 1, 2, 3], [(0, 1), (2, 3)], ident={0: 1, 1: 2, 2: 1, 3: 2}
        )
        assert check_distance2_unique(g) == []
        assert distance2_violations(g) == []

    def test_agrees_with_bfs_oracle(self):
        g = Graph.from_edges(
            range(6),
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
            ident={0: 9, 1: 1, 2: 2, 3: 9, 4: 1, 5: 9},
        )
        assert check_distance2_unique(g) == distance2_violations(g)

    @given(seed=st.integers(0, 10_000), n=st.integers(2, 12))
    @settings(max_examples=60, deadline=None)
    def test_accepts_every_globally_unique_graph(self, seed, n):
        m = min(n + 2, n * (n - 1) // 2)
        g = generate("random_gnm", n, m, seed)
        assert check_distance2_unique(g) == []


class TestGenerate:
    def test_path3(self):
        assert generate("path", 3).edges() == [(0, 1), (1, 2)]

    def test_complete4_edge_count(self):
        assert generate("complete", 4).m == 6

    def test_gnm_deterministic(self):
        a = generate("random_gnm", 50, 200, 7)
        b = generate("random_gnm", 50, 200, 7)
        assert a.edges() == b.edges()

    def test_gnm_requested_size(self):
        g = generate("random_gnm", 50, 200, 7)
        assert g.n == 50 and g.m == 200

    def test_gnm_infeasible_m(self):
        with pytest.raises(ValueError, match="at most"):
            generate("random_gnm", 5, 999)

    def test_gnm_too_few_edges_for_connectivity(self):
        with pytest.raises(ValueError, match="connect"):
            generate("random_gnm", 5, 3)

    def test_cycle_needs_three(self):
        with pytest.raises(ValueError):
            generate("cycle", 2)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown generator kind"):
            generate("hypercube", 4)

    @pytest.mark.parametrize("kind,n,m", [
        ("path", 1, None), ("path", 9, None), ("cycle", 5, None),
        ("complete", 6, None), ("star", 7, None),
        ("random_gnm", 9, 13, ), ("random_gnm", 17, 16, ),
    ])
    def test_generated_graphs_wellformed(self, kind, n, m):
        for seed in (0, 1, 12345):
            g = generate(kind, n, m, seed)
            assert g.is_connected()
            assert list(g.nodes) == list(range(n))
            for u in g.nodes:
                assert u not in g.adjacency[u]
                for v in g.adjacency[u]:
                    assert u in g.adjacency[v]


class TestFileFormat:
    def test_read_path(self):
        g = read_graph("3\n0 1\n1 2\n")
        assert list(g.nodes) == [0, 1, 2]
        assert g.edges() == [(0, 1), (1, 2)]

    def test_write_canonical(self):
        g = Graph.from_edges([0, 1, 2], [(1, 2), (0, 1)])
        assert write_graph(g) == "3\n0 1\n1 2\n"

    def test_comments_and_blank_lines(self):
        g = read_graph("# a path\n3\n\n0 1  # first edge\n1 2\n")
        assert g.edges() == [(0, 1), (1, 2)]

    def test_roundtrip_gnm(self):
        g = generate("random_gnm", 50, 200, 7)
        h = read_graph(write_graph(g))
        assert h.nodes == g.nodes and h.adjacency == g.adjacency

    def test_roundtrip_is_canonical_fixpoint(self):
        text = "3\n0 2\n1 2\n"
        assert write_graph(read_graph(text)) == text

    def test_edge_free_file(self):
        g = read_graph("4\n")
        assert list(g.nodes) == [0, 1, 2, 3] and g.m == 0

    def test_noncontiguous_ids(self):
        g = read_graph("3\n1 3\n2 3\n")
        assert list(g.nodes) == [1, 2, 3]

    def test_disconnected_accepted(self):
        g = read_graph("4\n0 1\n2 3\n")
        assert not g.is_connected()

    @pytest.mark.parametrize("text,fragment", [
        ("", "missing node count"),
        ("x\n0 1\n", "expected node count"),
        ("2\n0\n", "expected 'u v'"),
        ("2\n0 a\n", "non-integer"),
        ("2\n1 1\n", "self-loop"),
        ("2\n1 0\n", "u < v"),
        ("2\n0 1\n0 1\n", "duplicate edge"),
        ("5\n0 1\n", "does not match"),
    ])
    def test_parse_errors(self, text, fragment):
        with pytest.raises(GraphFormatError, match=fragment):
            read_graph(text)

    def test_parse_error_carries_line_number(self):
        with pytest.raises(GraphFormatError, match="line 3"):
            read_graph("3\n0 1\n1 1\n")

    def test_write_rejects_isolated_mix(self):
        g = Graph.from_edges([0, 1, 5], [(0, 1)])
        with pytest.raises(ValueError, match="not representable"):
            write_graph(g)

    def test_write_rejects_custom_ident(self):
        g = Graph.from_edges([0, 1], [(0, 1)], ident={0: 7, 1: 8})
        with pytest.raises(ValueError, match="not representable"):
            write_graph(g)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_roundtrip_random(self, seed):
        g = generate("random_gnm", 12, 18, seed)
        assert write_graph(read_graph(write_graph(g))) == write_graph(g)
