import random

import numpy as np
import pytest

from app.oracle import kernels
from app.oracle.apex import feedback_vertex_number_adj
from app.oracle.census import census_rows, census_table
from app.oracle.graphs import SmallGraph, block_vertex_sets, components_of, enumerate_labelled_graphs
from app.oracle.planarity import is_planar_adj, planar_from_key
from app.utils.errors import DomainError

FIVE_VERTEX_GRAPHS = list(enumerate_labelled_graphs(5))


def _random_graphs(n, count, seed):
    rng = random.Random(seed)
    pairs = n * (n - 1) // 2
    return [SmallGraph.from_edge_mask(n, rng.getrandbits(pairs)) for _ in range(count)]


def _blocks(adj):
    out = np.zeros(len(adj), dtype=np.int64)
    found = kernels.block_masks(kernels.adjacency_array(adj), out)
    return sorted(int(mask) for mask in out[:found])


def _planar_verdict(adj):
    status, key = kernels.planarity_status(kernels.adjacency_array(adj))
    if status == kernels.PENDING:
        return planar_from_key(int(key))
    return status == kernels.ACCEPT


class TestKernelHelpers:
    """The compiled helpers agree with their pure Python counterparts"""

    def test_decode_matches_edge_mask(self):
        pair_i, pair_j = kernels.pair_arrays(5)
        for g in FIVE_VERTEX_GRAPHS:
            assert tuple(kernels.decode_mask(g.edge_mask(), 5, pair_i, pair_j)) == g.adj

    def test_components(self):
        for g in FIVE_VERTEX_GRAPHS:
            assert kernels.component_count(kernels.adjacency_array(g.adj), 31) == len(components_of(g.adj, 31))

    def test_blocks_on_five_vertices(self):
        for g in FIVE_VERTEX_GRAPHS:
            assert _blocks(g.adj) == sorted(block_vertex_sets(g.adj))

    def test_blocks_on_random_eight_vertex_graphs(self):
        for g in _random_graphs(8, 300, seed=11):
            assert _blocks(g.adj) == sorted(block_vertex_sets(g.adj))

    @pytest.mark.parametrize("limit", [0, 1, 3])
    def test_feedback_vertex_number(self, limit):
        for g in FIVE_VERTEX_GRAPHS:
            expected = feedback_vertex_number_adj(g.adj, limit)
            found = kernels.feedback_vertex_number(kernels.adjacency_array(g.adj), limit)
            assert found == (-1 if expected is None else expected)

    def test_feedback_vertex_number_on_seven_vertices(self):
        for g in _random_graphs(7, 200, seed=5):
            expected = feedback_vertex_number_adj(g.adj, 4)
            assert kernels.feedback_vertex_number(kernels.adjacency_array(g.adj), 4) == (
                -1 if expected is None else expected
            )

    def test_induced_adjacency(self):
        g = SmallGraph.complete(5).disjoint_union(SmallGraph.complete(2))
        sub = kernels.induced_adjacency(kernels.adjacency_array(g.adj), 0b1100000)
        assert tuple(sub) == SmallGraph.complete(2).adj

    @pytest.mark.parametrize(
        "g, planar",
        [
            (SmallGraph.complete(5), False),
            (SmallGraph.complete_bipartite(3, 3), False),
            (SmallGraph.complete(4), True),
            (SmallGraph.cycle(6), True),
            (SmallGraph.complete(6), False),
        ],
    )
    def test_planarity_status(self, g, planar):
        assert _planar_verdict(g.adj) is planar

    def test_planarity_on_random_graphs(self):
        for g in _random_graphs(7, 300, seed=3) + _random_graphs(8, 200, seed=4):
            assert _planar_verdict(g.adj) == is_planar_adj(g.adj)

    def test_k33_needs_networkx(self):
        """K_{3,3} passes the edge bound, so the kernel leaves it open"""
        status, key = kernels.planarity_status(kernels.adjacency_array(SmallGraph.complete_bipartite(3, 3).adj))
        assert status == kernels.PENDING
        assert key & 0xF == 6


class TestCompiledCensus:
    """The compiled engine against the python reference sweep"""

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_engines_agree(self, n):
        ks = [0, 1, 2, 3]
        assert census_rows(n, ks, engine="compiled") == census_rows(n, ks, engine="python")

    def test_engines_agree_at_six(self, census_k12):
        rows = census_table(6, [1, 2], engine="python")
        assert {(row.n, row.k): row for row in rows} == census_k12

    def test_threads_do_not_change_results(self):
        assert census_rows(6, [1, 4], jobs=1) == census_rows(6, [1, 4], jobs=2)

    def test_unknown_engine(self):
        with pytest.raises(DomainError):
            census_rows(4, [1], engine="gpu")

    @pytest.mark.slow
    def test_seven_vertices(self):
        """Both engines at n = 7; the python sweep takes minutes"""
        assert census_rows(7, [1, 4], engine="compiled") == census_rows(7, [1, 4], jobs=2, engine="python")
