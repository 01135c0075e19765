"""
Planarity of small graphs.

Vertices of degree at most two never decide planarity: degree 0 and 1 vertices
are deleted and a degree 2 vertex is replaced by an edge between its
neighbours.  What is left goes through the edge bound 3m - 6 and, failing
that, networkx's planarity test, cached on the reduced edge mask.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache

import networkx as nx

from app.oracle.graphs import SmallGraph, bits, vertex_pairs


def reduce_low_degree(adj: Sequence[int]) -> tuple[int, ...]:
    """Adjacency of the graph left after removing and smoothing vertices of degree <= 2, relabelled."""
    rows = list(adj)
    alive = (1 << len(rows)) - 1
    changed = True
    while changed:
        changed = False
        for v in bits(alive):
            neighbours = rows[v] & alive
            degree = neighbours.bit_count()
            if degree > 2:
                continue
            if degree == 2:
                a, b = bits(neighbours)
                rows[a] |= 1 << b
                rows[b] |= 1 << a
            alive &= ~(1 << v)
            changed = True
    keep = list(bits(alive))
    position = {v: i for i, v in enumerate(keep)}
    return tuple(sum(1 << position[w] for w in bits(rows[v] & alive)) for v in keep)


@lru_cache(maxsize=None)
def _planar_reduced(n: int, mask: int) -> bool:
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(pair for index, pair in enumerate(vertex_pairs(n)) if mask >> index & 1)
    planar, _ = nx.check_planarity(graph)
    return bool(planar)


def is_planar_adj(adj: Sequence[int]) -> bool:
    reduced = reduce_low_degree(adj)
    m = len(reduced)
    if m <= 4:
        return True
    edges = sum(a.bit_count() for a in reduced) // 2
    if edges > 3 * m - 6:
        return False
    return _planar_reduced(m, SmallGraph(m, reduced).edge_mask())


def is_planar(g: SmallGraph) -> bool:
    return is_planar_adj(g.adj)


def planar_from_key(key: int) -> bool:
    """Planarity of a reduced graph packed as ``(edge_mask << 4) | m``."""
    return _planar_reduced(key & 0xF, key >> 4)
