"""
Compiled census kernels.

The same bitmask algorithms as graphs.py, apex.py and planarity.py, written
over int64 arrays for numba.  ``classify_masks`` handles one contiguous range
of edge masks with ``prange``; per graph it reports connectivity, the
feedback vertex test for every k and a status for B_k and G_k membership.

A status is 0 (reject), 1 (accept) or 2 (accept iff the one block whose
planarity the kernel could not settle is planar).  That block is returned as
a key ``(edge_mask << 4) | m`` of its reduced form and resolved afterwards
by networkx; a key of -2 marks a graph with two such blocks.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numba import njit, prange

from app.oracle.graphs import vertex_pairs

REJECT = 0
ACCEPT = 1
PENDING = 2
NO_KEY = -1
TWO_KEYS = -2


def adjacency_array(adj: Sequence[int]) -> np.ndarray:
    return np.asarray(adj, dtype=np.int64)


def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = vertex_pairs(n)
    return (
        np.array([i for i, _ in pairs], dtype=np.int64),
        np.array([j for _, j in pairs], dtype=np.int64),
    )


@njit(cache=True)
def bit_index(low_bit):
    index = 0
    while low_bit > 1:
        low_bit >>= 1
        index += 1
    return index


@njit(cache=True)
def popcount(x):
    count = 0
    while x:
        x &= x - 1
        count += 1
    return count


@njit(cache=True)
def decode_mask(mask, n, pair_i, pair_j):
    adj = np.zeros(n, np.int64)
    rest = mask
    while rest:
        low = rest & -rest
        rest ^= low
        index = bit_index(low)
        i = pair_i[index]
        j = pair_j[index]
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return adj


@njit(cache=True)
def component_count(adj, within):
    count = 0
    remaining = within
    while remaining:
        seed = remaining & -remaining
        component = seed
        frontier = seed
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            reach = adj[bit_index(low)] & within & ~component
            component |= reach
            frontier |= reach
        count += 1
        remaining &= ~component
    return count


@njit(cache=True)
def acyclic_within(adj, within):
    if within == 0:
        return True
    edges = 0
    rest = within
    while rest:
        low = rest & -rest
        rest ^= low
        edges += popcount(adj[bit_index(low)] & within)
    edges //= 2
    vertices = popcount(within)
    if edges >= vertices:
        return False
    return edges == vertices - component_count(adj, within)


@njit(cache=True)
def feedback_vertex_number(adj, limit):
    """Smallest deletion set leaving a forest, or -1 when it exceeds ``limit``."""
    n = adj.shape[0]
    full = (1 << n) - 1
    degree = np.zeros(n, np.int64)
    edges = 0
    for v in range(n):
        degree[v] = popcount(adj[v])
        edges += degree[v]
    edges //= 2
    if acyclic_within(adj, full):
        return 0
    top = min(limit, n)
    for size in range(1, top + 1):
        keep = n - size
        for removed in range(1, 1 << n):
            if popcount(removed) != size:
                continue
            lost = 0
            inner = 0
            rest = removed
            while rest:
                low = rest & -rest
                rest ^= low
                v = bit_index(low)
                lost += degree[v]
                inner += popcount(adj[v] & removed)
            lost -= inner // 2
            if edges - lost > max(keep - 1, 0):
                continue
            if acyclic_within(adj, full & ~removed):
                return size
    return -1


@njit(cache=True)
def block_masks(adj, out):
    """Vertex masks of the blocks written to ``out``; returns how many.  Isolated vertices give none."""
    n = adj.shape[0]
    disc = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    parent = np.full(n, -1, np.int64)
    pending = np.zeros(n, np.int64)
    vertex_stack = np.zeros(n, np.int64)
    call_stack = np.zeros(n, np.int64)
    count = 0
    counter = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = counter
        low[root] = counter
        counter += 1
        pending[root] = adj[root]
        vertex_stack[0] = root
        vertex_top = 1
        call_stack[0] = root
        call_top = 1
        while call_top > 0:
            v = call_stack[call_top - 1]
            if pending[v] != 0:
                low_bit = pending[v] & -pending[v]
                pending[v] ^= low_bit
                w = bit_index(low_bit)
                if disc[w] == -1:
                    parent[w] = v
                    disc[w] = counter
                    low[w] = counter
                    counter += 1
                    pending[w] = adj[w]
                    vertex_stack[vertex_top] = w
                    vertex_top += 1
                    call_stack[call_top] = w
                    call_top += 1
                elif w != parent[v] and disc[w] < low[v]:
                    low[v] = disc[w]
            else:
                call_top -= 1
                p = parent[v]
                if p >= 0:
                    if low[v] < low[p]:
                        low[p] = low[v]
                    if low[v] >= disc[p]:
                        block = np.int64(1) << p
                        while True:
                            vertex_top -= 1
                            x = vertex_stack[vertex_top]
                            block |= np.int64(1) << x
                            if x == v:
                                break
                        out[count] = block
                        count += 1
    return count


@njit(cache=True)
def induced_adjacency(adj, block):
    """Subgraph on the vertices of ``block``, relabelled in increasing order."""
    m = popcount(block)
    vertices = np.zeros(m, np.int64)
    rest = block
    position = 0
    while rest:
        low = rest & -rest
        rest ^= low
        vertices[position] = bit_index(low)
        position += 1
    sub = np.zeros(m, np.int64)
    for a in range(m):
        row = 0
        for c in range(m):
            if (adj[vertices[a]] >> vertices[c]) & 1:
                row |= 1 << c
        sub[a] = row
    return sub


@njit(cache=True)
def planarity_status(adj):
    """(ACCEPT or REJECT, NO_KEY) when the reduced graph decides, else (PENDING, key)."""
    n = adj.shape[0]
    rows = adj.copy()
    alive = (np.int64(1) << n) - 1
    changed = True
    while changed:
        changed = False
        snapshot = alive
        while snapshot:
            low = snapshot & -snapshot
            snapshot ^= low
            v = bit_index(low)
            neighbours = rows[v] & alive
            degree = popcount(neighbours)
            if degree > 2:
                continue
            if degree == 2:
                first = neighbours & -neighbours
                second = neighbours ^ first
                a = bit_index(first)
                b = bit_index(second)
                rows[a] |= np.int64(1) << b
                rows[b] |= np.int64(1) << a
            alive &= ~(np.int64(1) << v)
            changed = True
    m = popcount(alive)
    if m <= 4:
        return ACCEPT, NO_KEY
    reduced = induced_adjacency(rows, alive)
    edges = 0
    for v in range(m):
        edges += popcount(reduced[v])
    edges //= 2
    if edges > 3 * m - 6:
        return REJECT, NO_KEY
    if m == 5:
        return ACCEPT, NO_KEY
    mask = np.int64(0)
    index = 0
    for i in range(m):
        for j in range(i + 1, m):
            if (reduced[i] >> j) & 1:
                mask |= np.int64(1) << index
            index += 1
    return PENDING, (mask << 4) | m


@njit(cache=True)
def _merge_key(current, key):
    if current == NO_KEY or current == key:
        return key
    return TWO_KEYS


@njit(parallel=True, cache=True)
def classify_masks(n, first, pair_i, pair_j, ks, connected, two_connected, in_z, b_status, gk_status, keys):
    """Fill the per-graph outputs for the edge masks first .. first + len(keys) - 1."""
    count = keys.shape[0]
    nk = ks.shape[0]
    limit = ks[nk - 1]
    smallest = ks[0]
    full = (np.int64(1) << n) - 1
    for g in prange(count):
        adj = decode_mask(first + g, n, pair_i, pair_j)
        connected[g] = component_count(adj, full) == 1
        blocks = np.zeros(n, np.int64)
        nb = block_masks(adj, blocks)
        whole = n >= 2 and nb == 1 and blocks[0] == full
        two_connected[g] = whole
        fvn = feedback_vertex_number(adj, limit)
        key = NO_KEY
        for j in range(nk):
            in_z[g, j] = fvn != -1 and fvn <= ks[j]
        if whole:
            status = ACCEPT
            if fvn == -1 or fvn > smallest:
                status, key = planarity_status(adj)
            for j in range(nk):
                b_status[g, j] = ACCEPT if in_z[g, j] else status
                gk_status[g, j] = b_status[g, j]
        else:
            for j in range(nk):
                b_status[g, j] = REJECT
                gk_status[g, j] = ACCEPT
            for b in range(nb):
                if popcount(blocks[b]) <= 2:
                    continue
                sub = induced_adjacency(adj, blocks[b])
                block_fvn = feedback_vertex_number(sub, limit)
                if block_fvn != -1 and block_fvn <= smallest:
                    continue
                status, block_key = planarity_status(sub)
                if status == PENDING:
                    key = _merge_key(key, block_key)
                for j in range(nk):
                    if block_fvn != -1 and block_fvn <= ks[j]:
                        continue
                    if status == REJECT:
                        gk_status[g, j] = REJECT
                    elif status == PENDING and gk_status[g, j] == ACCEPT:
                        gk_status[g, j] = PENDING
        keys[g] = key
