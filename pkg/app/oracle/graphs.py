"""
Small labelled graphs on at most eight vertices, stored as adjacency bitmasks.

Edge masks number the pairs (i, j), i < j, lexicographically, so bit 0 is the
edge 01 and enumerating masks 0 .. 2^C(n,2) - 1 lists every labelled graph once.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from app.utils.errors import DomainError

MAX_VERTICES = 8


@lru_cache(maxsize=None)
def vertex_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(n), 2))


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _check_order(n: int) -> None:
    if not 0 <= n <= MAX_VERTICES:
        raise DomainError(f"graphs are limited to 0..{MAX_VERTICES} vertices, got {n}")


@dataclass(frozen=True, slots=True)
class SmallGraph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        _check_order(self.n)
        if len(self.adj) != self.n:
            raise DomainError(f"expected {self.n} adjacency masks, got {len(self.adj)}")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> SmallGraph:
        _check_order(n)
        adj = [0] * n
        for i, j in edges:
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise DomainError(f"invalid edge ({i}, {j}) on {n} vertices")
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(n, tuple(adj))

    @classmethod
    def from_edge_mask(cls, n: int, mask: int) -> SmallGraph:
        _check_order(n)
        adj = [0] * n
        for index in bits(mask):
            i, j = vertex_pairs(n)[index]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return cls(n, tuple(adj))

    @classmethod
    def empty(cls, n: int) -> SmallGraph:
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> SmallGraph:
        full = (1 << n) - 1
        return cls(n, tuple(full & ~(1 << v) for v in range(n)))

    @classmethod
    def path(cls, n: int) -> SmallGraph:
        return cls.from_edges(n, ((v, v + 1) for v in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> SmallGraph:
        if n < 3:
            raise DomainError("a cycle needs at least 3 vertices")
        return cls.from_edges(n, ((v, (v + 1) % n) for v in range(n)))

    @classmethod
    def complete_bipartite(cls, a: int, b: int) -> SmallGraph:
        return cls.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)))

    # -- inspection ---------------------------------------------------------

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.adj[i] >> (i + 1) << (i + 1))]

    @property
    def edge_count(self) -> int:
        return sum(a.bit_count() for a in self.adj) // 2

    def edge_mask(self) -> int:
        mask = 0
        for index, (i, j) in enumerate(vertex_pairs(self.n)):
            if self.adj[i] >> j & 1:
                mask |= 1 << index
        return mask

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def components(self) -> list[int]:
        return components_of(self.adj, (1 << self.n) - 1)

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1

    def is_forest(self) -> bool:
        return self.edge_count == self.n - len(self.components())

    # -- operations ---------------------------------------------------------

    def induced(self, vertices: Sequence[int]) -> SmallGraph:
        """Subgraph on ``vertices``, relabelled 0.. in the given order."""
        position = {v: i for i, v in enumerate(vertices)}
        adj = []
        for v in vertices:
            row = 0
            for w in bits(self.adj[v]):
                if w in position:
                    row |= 1 << position[w]
            adj.append(row)
        return SmallGraph(len(vertices), tuple(adj))

    def delete_vertex(self, v: int) -> SmallGraph:
        return self.induced([w for w in range(self.n) if w != v])

    def delete_edge(self, i: int, j: int) -> SmallGraph:
        adj = list(self.adj)
        adj[i] &= ~(1 << j)
        adj[j] &= ~(1 << i)
        return SmallGraph(self.n, tuple(adj))

    def add_edge(self, i: int, j: int) -> SmallGraph:
        if i == j:
            raise DomainError("loops are not allowed")
        adj = list(self.adj)
        adj[i] |= 1 << j
        adj[j] |= 1 << i
        return SmallGraph(self.n, tuple(adj))

    def contract_edge(self, i: int, j: int) -> SmallGraph:
        """Merge j into i, dropping the loop and parallel edges, then remove j."""
        if not self.has_edge(i, j):
            raise DomainError(f"({i}, {j}) is not an edge")
        adj = list(self.adj)
        for w in bits(adj[j]):
            if w != i:
                adj[i] |= 1 << w
                adj[w] |= 1 << i
        return SmallGraph(self.n, tuple(adj)).delete_vertex(j)

    def disjoint_union(self, other: SmallGraph) -> SmallGraph:
        shifted = tuple(a << self.n for a in other.adj)
        return SmallGraph(self.n + other.n, self.adj + shifted)


def components_of(adj: Sequence[int], within: int) -> list[int]:
    """Vertex masks of the connected components of the subgraph induced on ``within``."""
    found = []
    remaining = within
    while remaining:
        seed = remaining & -remaining
        component = seed
        frontier = seed
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            reach = adj[low.bit_length() - 1] & within & ~component
            component |= reach
            frontier |= reach
        found.append(component)
        remaining &= ~component
    return found


def is_acyclic_within(adj: Sequence[int], within: int) -> bool:
    """Whether the subgraph induced on ``within`` is a forest: edges == vertices - components."""
    if not within:
        return True
    edges = sum((adj[v] & within).bit_count() for v in bits(within)) // 2
    vertices = within.bit_count()
    if edges >= vertices:
        return False
    return edges == vertices - len(components_of(adj, within))


def enumerate_labelled_graphs(n: int) -> Iterator[SmallGraph]:
    """All 2^C(n,2) labelled graphs on n vertices in increasing edge-mask order."""
    if not 1 <= n <= MAX_VERTICES:
        raise DomainError(f"n must lie in 1..{MAX_VERTICES}, got {n}")
    for mask in range(1 << len(vertex_pairs(n))):
        yield SmallGraph.from_edge_mask(n, mask)


# ----------------------------------------------------------------------------
# Blocks
# ----------------------------------------------------------------------------


def block_vertex_sets(adj: Sequence[int]) -> list[int]:
    """Vertex masks of the blocks (biconnected components and bridges), Hopcroft-Tarjan lowpoints.

    Isolated vertices belong to no block.
    """
    n = len(adj)
    disc = [-1] * n
    low = [0] * n
    stack: list[int] = []
    blocks: list[int] = []
    counter = 0

    def visit(v: int, parent: int) -> None:
        nonlocal counter
        disc[v] = low[v] = counter
        counter += 1
        stack.append(v)
        for w in bits(adj[v]):
            if disc[w] == -1:
                visit(w, v)
                low[v] = min(low[v], low[w])
                if low[w] >= disc[v]:
                    block = 1 << v
                    while True:
                        x = stack.pop()
                        block |= 1 << x
                        if x == w:
                            break
                    blocks.append(block)
            elif w != parent:
                low[v] = min(low[v], disc[w])

    for root in range(n):
        if disc[root] == -1:
            visit(root, -1)
            stack.pop()
    return blocks


def block_decompose(g: SmallGraph) -> list[SmallGraph]:
    return [g.induced(list(bits(block))) for block in block_vertex_sets(g.adj)]


def is_2connected(g: SmallGraph) -> bool:
    """Connected, at least two vertices, no cutvertex; K2 qualifies."""
    if g.n < 2:
        return False
    blocks = block_vertex_sets(g.adj)
    return len(blocks) == 1 and blocks[0] == (1 << g.n) - 1
