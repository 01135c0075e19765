"""
Executable check that G_k is minor-closed and addable around a given member.
"""

from __future__ import annotations

import random
from collections.abc import Iterator

from loguru import logger

from app.oracle.census import is_in_Gk
from app.oracle.graphs import MAX_VERTICES, SmallGraph, bits
from app.utils.errors import DomainError


def _minors(g: SmallGraph) -> Iterator[tuple[str, SmallGraph]]:
    for v in range(g.n):
        yield f"delete vertex {v}", g.delete_vertex(v)
    for i, j in g.edges():
        yield f"delete edge {i}{j}", g.delete_edge(i, j)
        yield f"contract edge {i}{j}", g.contract_edge(i, j)


def _joins(g: SmallGraph) -> Iterator[tuple[str, SmallGraph]]:
    components = g.components()
    for a in range(len(components)):
        for b in range(a + 1, len(components)):
            for u in bits(components[a]):
                for w in bits(components[b]):
                    yield f"join {u}-{w}", g.add_edge(u, w)


def _unions(g: SmallGraph, partner: SmallGraph) -> Iterator[tuple[str, SmallGraph]]:
    if g.n + partner.n <= MAX_VERTICES:
        union = g.disjoint_union(partner)
        yield f"union with {partner.n}-vertex member", union
        yield f"union with {partner.n}-vertex member joined", union.add_edge(0, g.n)


def _random_member(k: int, rng: random.Random, max_n: int) -> SmallGraph:
    while True:
        n = rng.randint(1, max_n)
        g = SmallGraph.from_edge_mask(n, rng.getrandbits(n * (n - 1) // 2))
        if is_in_Gk(g, k):
            return g


def closure_spot_check(g: SmallGraph, k: int, trials: int = 3, seed: int = 0) -> bool:
    """Every single minor step and every cross-component edge addition keeps g in G_k.

    Disjoint unions are taken with K1 and with ``trials`` seeded random members
    small enough to stay within eight vertices.
    """
    if not is_in_Gk(g, k):
        raise DomainError("closure check needs a member of G_k")
    rng = random.Random(seed)
    partners = [SmallGraph.empty(1)]
    room = MAX_VERTICES - g.n
    if room >= 1:
        partners += [_random_member(k, rng, room) for _ in range(trials)]

    candidates = list(_minors(g)) + list(_joins(g))
    for partner in partners:
        candidates.extend(_unions(g, partner))
    for label, h in candidates:
        if not is_in_Gk(h, k):
            logger.debug("{} leaves G_{}: {}", label, k, h.edges())
            return False
    return True
