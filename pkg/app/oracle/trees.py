"""
Labelled trees by Pruefer decoding, with leaf and degree censuses.
"""

from __future__ import annotations

import heapq
from collections import Counter
from collections.abc import Iterator, Sequence
from functools import lru_cache
from itertools import product
from math import comb

from loguru import logger

from app.oracle.graphs import MAX_VERTICES, SmallGraph
from app.utils.errors import ConsistencyError, DomainError


def decode_pruefer(sequence: Sequence[int], n: int) -> SmallGraph:
    degree = [1] * n
    for v in sequence:
        degree[v] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return SmallGraph.from_edges(n, edges)


def enumerate_labelled_trees(n: int) -> Iterator[SmallGraph]:
    """All n^(n-2) labelled trees on n vertices (one tree for n = 1)."""
    if not 1 <= n <= MAX_VERTICES:
        raise DomainError(f"n must lie in 1..{MAX_VERTICES}, got {n}")
    if n == 1:
        yield SmallGraph.empty(1)
        return
    for sequence in product(range(n), repeat=n - 2):
        yield decode_pruefer(sequence, n)


def leaf_count(tree: SmallGraph) -> int:
    """Vertices of degree one; the single-vertex tree has one leaf."""
    if tree.n == 1:
        return 1
    return sum(1 for v in range(tree.n) if tree.degree(v) == 1)


@lru_cache(maxsize=None)
def _leaf_census(n: int) -> tuple[tuple[int, int], ...]:
    counts = Counter(leaf_count(tree) for tree in enumerate_labelled_trees(n))
    return tuple(sorted(counts.items()))


def tree_leaf_census(n: int) -> dict[int, int]:
    return dict(_leaf_census(n))


@lru_cache(maxsize=None)
def _root_degree_census(n: int) -> tuple[tuple[int, int], ...]:
    counts = Counter(tree.degree(0) for tree in enumerate_labelled_trees(n))
    return tuple(sorted(counts.items()))


def trees_fixed_vertex_degree(n: int, d: int) -> int:
    """Labelled trees on n vertices in which a fixed vertex has degree d: C(n-2, d-1) (n-1)^(n-d-1).

    Verified against enumeration for n <= 8.
    """
    if n < 2 or not 1 <= d <= n - 1:
        raise DomainError(f"need n >= 2 and 1 <= d <= n-1, got n={n}, d={d}")
    closed_form = comb(n - 2, d - 1) * (n - 1) ** (n - d - 1)
    if n <= MAX_VERTICES:
        brute = dict(_root_degree_census(n)).get(d, 0)
        if brute != closed_form:
            logger.error("Degree census mismatch at n={}, d={}: {} vs {}", n, d, brute, closed_form)
            raise ConsistencyError(f"trees with a degree-{d} vertex on {n} vertices: {brute} != {closed_form}")
    return closed_form
