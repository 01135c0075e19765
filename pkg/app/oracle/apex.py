"""
k-apex forests: graphs that become a forest after deleting at most k vertices.
"""

from __future__ import annotations

from collections.abc import Sequence
from itertools import combinations

from app.oracle.graphs import SmallGraph, is_acyclic_within
from app.utils.errors import DomainError


def feedback_vertex_number_adj(adj: Sequence[int], limit: int) -> int | None:
    """Smallest |S| with adj - S acyclic, or None if it exceeds ``limit``.

    Subsets are tried by size; a subset is only checked for cycles when the
    remaining edge count can still be a forest.
    """
    if limit < 0:
        raise DomainError("limit must be non-negative")
    n = len(adj)
    full = (1 << n) - 1
    degrees = [a.bit_count() for a in adj]
    edges = sum(degrees) // 2
    for size in range(min(limit, n) + 1):
        # at most the `size` largest degrees can be removed
        if edges - sum(sorted(degrees, reverse=True)[:size]) > n - size - 1 and n - size > 0:
            continue
        for removed in combinations(range(n), size):
            mask = 0
            for v in removed:
                mask |= 1 << v
            keep = full & ~mask
            lost = sum(degrees[v] for v in removed) - sum((adj[v] & mask).bit_count() for v in removed) // 2
            if edges - lost > max(keep.bit_count() - 1, 0):
                continue
            if is_acyclic_within(adj, keep):
                return size
    return None


def feedback_vertex_number(g: SmallGraph, limit: int) -> int | None:
    return feedback_vertex_number_adj(g.adj, limit)


def is_k_apex_forest(g: SmallGraph, k: int) -> bool:
    if k < 0:
        raise DomainError("k must be non-negative")
    return feedback_vertex_number_adj(g.adj, k) is not None
