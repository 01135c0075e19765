"""
Exhaustive census of the classes A_k, Z_k, B_k and G_k on n <= 8 labelled vertices.

One sweep over all edge masks serves several values of k.  The default
"compiled" engine runs the numba kernels of kernels.py over blocks of masks
with ``jobs`` threads and settles the few undecided planarity questions with
networkx afterwards.  The "python" engine is the reference: the mask range is
cut into contiguous chunks, counted independently (optionally in worker
processes) and the partial counts are added.  Neither result depends on the
number of jobs.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from operator import or_

import numba
import numpy as np
from loguru import logger

from app.oracle import kernels
from app.oracle.apex import feedback_vertex_number_adj
from app.oracle.graphs import (
    MAX_VERTICES,
    SmallGraph,
    bits,
    block_vertex_sets,
    components_of,
    vertex_pairs,
)
from app.oracle.planarity import is_planar_adj, planar_from_key
from app.utils.errors import ConsistencyError, DomainError

ENGINES = ("compiled", "python")
KERNEL_BLOCK = 1 << 16

CENSUS_FIELDS = ("n", "k", "count_A", "count_Z", "count_B", "count_Gk_connected", "count_Gk")


@dataclass(frozen=True)
class CensusRow:
    n: int
    k: int
    count_A: int
    count_Z: int
    count_B: int
    count_Gk_connected: int
    count_Gk: int

    def check(self) -> None:
        if not (self.count_A <= self.count_B <= self.count_Gk and self.count_A <= self.count_Z):
            raise ConsistencyError(f"census counts out of order: {self}")

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in CENSUS_FIELDS)


# ----------------------------------------------------------------------------
# Membership
# ----------------------------------------------------------------------------


def _induced_mask(adj: Sequence[int], block: int) -> tuple[int, int]:
    """(size, edge mask) of the subgraph induced on ``block`` after relabelling to 0..m-1."""
    vertices = list(bits(block))
    mask = 0
    for index, (i, j) in enumerate(combinations(range(len(vertices)), 2)):
        if adj[vertices[i]] >> vertices[j] & 1:
            mask |= 1 << index
    return len(vertices), mask


@lru_cache(maxsize=1 << 16)
def _block_profile(m: int, mask: int, limit: int) -> tuple[bool, int | None]:
    adj = SmallGraph.from_edge_mask(m, mask).adj
    return is_planar_adj(adj), feedback_vertex_number_adj(adj, limit)


def _allowed(profile: tuple[bool, int | None], k: int) -> bool:
    planar, fvn = profile
    return planar or (fvn is not None and fvn <= k)


def is_allowed_block(g: SmallGraph, k: int) -> bool:
    """A block of G_k: a single edge, a planar graph or a k-apex forest."""
    if g.n == 2:
        return True
    return _allowed(_block_profile(g.n, g.edge_mask(), k), k)


def is_in_Gk(g: SmallGraph, k: int) -> bool:
    """Every block planar or a k-apex forest; graphs without blocks qualify."""
    for block in block_vertex_sets(g.adj):
        if block.bit_count() == 2:
            continue
        m, mask = _induced_mask(g.adj, block)
        if not _allowed(_block_profile(m, mask, k), k):
            return False
    return True


# ----------------------------------------------------------------------------
# Sweep
# ----------------------------------------------------------------------------


def _adjacency_table(n: int, first: int, count: int) -> list[tuple[int, ...]]:
    """Adjacency contribution of every sub-mask over the pairs first .. first + count - 1."""
    pairs = vertex_pairs(n)[first : first + count]
    table = []
    for sub in range(1 << count):
        adj = [0] * n
        for index in bits(sub):
            i, j = pairs[index]
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        table.append(tuple(adj))
    return table


def _sweep(n: int, ks: tuple[int, ...], start: int, stop: int) -> list[list[int]]:
    """Counts [A, Z, B, G_k connected, G_k] for each k over the edge masks start .. stop - 1."""
    total_pairs = len(vertex_pairs(n))
    low_bits = total_pairs // 2
    low_table = _adjacency_table(n, 0, low_bits)
    high_table: dict[int, tuple[int, ...]] = {}
    high_pairs = vertex_pairs(n)[low_bits:]
    low_mask = (1 << low_bits) - 1
    full = (1 << n) - 1
    limit = max(ks)
    counts = [[0] * 5 for _ in ks]

    for mask in range(start, stop):
        high = mask >> low_bits
        if high not in high_table:
            adj_high = [0] * n
            for index in bits(high):
                i, j = high_pairs[index]
                adj_high[i] |= 1 << j
                adj_high[j] |= 1 << i
            high_table[high] = tuple(adj_high)
        adj = tuple(map(or_, low_table[mask & low_mask], high_table[high]))

        connected = n == 1 or len(components_of(adj, full)) == 1
        blocks = block_vertex_sets(adj)
        two_connected = n >= 2 and len(blocks) == 1 and blocks[0] == full
        fvn = feedback_vertex_number_adj(adj, limit)
        planar: bool | None = None

        side_profiles = []
        if not two_connected:
            for block in blocks:
                if block.bit_count() > 2:
                    m, sub = _induced_mask(adj, block)
                    side_profiles.append(_block_profile(m, sub, limit))

        for row, k in zip(counts, ks, strict=True):
            in_z = fvn is not None and fvn <= k
            if in_z:
                row[1] += 1
            if two_connected:
                if in_z:
                    row[0] += 1
                if not in_z and planar is None:
                    planar = n == 2 or is_planar_adj(adj)
                allowed = in_z or bool(planar)
                if allowed:
                    row[2] += 1
                in_gk = allowed
            else:
                in_gk = all(_allowed(profile, k) for profile in side_profiles)
            if in_gk:
                row[4] += 1
                if connected:
                    row[3] += 1
    return counts


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    step = max(1, -(-total // parts))
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def _resolve_pending(keys: np.ndarray) -> np.ndarray:
    """Planarity verdict per graph for the block keys left open by the kernel."""
    planar = np.zeros(keys.shape[0], dtype=np.bool_)
    pending = keys >= 0
    if pending.any():
        unique = np.unique(keys[pending])
        verdicts = np.array([planar_from_key(int(key)) for key in unique], dtype=np.bool_)
        planar[pending] = verdicts[np.searchsorted(unique, keys[pending])]
    return planar


def _sweep_compiled(n: int, ks: tuple[int, ...], start: int, stop: int) -> list[list[int]]:
    """Same counts as ``_sweep``, computed by the numba kernels in blocks of KERNEL_BLOCK masks."""
    pair_i, pair_j = kernels.pair_arrays(n)
    ks_array = np.asarray(ks, dtype=np.int64)
    totals = np.zeros((len(ks), 5), dtype=np.int64)
    for lo in range(start, stop, KERNEL_BLOCK):
        size = min(KERNEL_BLOCK, stop - lo)
        connected = np.zeros(size, dtype=np.bool_)
        two_connected = np.zeros(size, dtype=np.bool_)
        in_z = np.zeros((size, len(ks)), dtype=np.bool_)
        b_status = np.zeros((size, len(ks)), dtype=np.int8)
        gk_status = np.zeros((size, len(ks)), dtype=np.int8)
        keys = np.full(size, kernels.NO_KEY, dtype=np.int64)
        kernels.classify_masks(
            n, lo, pair_i, pair_j, ks_array, connected, two_connected, in_z, b_status, gk_status, keys
        )
        if (keys == kernels.TWO_KEYS).any():
            raise ConsistencyError(f"a graph on {n} vertices has two blocks of undecided planarity")
        planar = _resolve_pending(keys)
        for j in range(len(ks)):
            in_b = (b_status[:, j] == kernels.ACCEPT) | ((b_status[:, j] == kernels.PENDING) & planar)
            in_gk = (gk_status[:, j] == kernels.ACCEPT) | ((gk_status[:, j] == kernels.PENDING) & planar)
            totals[j, 0] += np.count_nonzero(two_connected & in_z[:, j])
            totals[j, 1] += np.count_nonzero(in_z[:, j])
            totals[j, 2] += np.count_nonzero(in_b)
            totals[j, 3] += np.count_nonzero(in_gk & connected)
            totals[j, 4] += np.count_nonzero(in_gk)
    return totals.tolist()


def _sweep_python(n: int, ks: tuple[int, ...], chunks: list[tuple[int, int]], jobs: int) -> list[list[list[int]]]:
    if jobs == 1:
        return [_sweep(n, ks, lo, hi) for lo, hi in chunks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_sweep, n, ks, lo, hi) for lo, hi in chunks]
        partials = []
        for (lo, hi), future in zip(chunks, futures, strict=True):
            try:
                partials.append(future.result())
            except Exception as exc:
                logger.error("Census worker for masks {}..{} failed: {}", lo, hi, exc)
                raise
    return partials


def census_rows(n: int, ks: Iterable[int], jobs: int = 1, engine: str = "compiled") -> list[CensusRow]:
    """Census rows for every k in ``ks`` from a single sweep over the 2^C(n,2) labelled graphs."""
    ks = tuple(sorted(set(ks)))
    if not 1 <= n <= MAX_VERTICES:
        raise DomainError(f"census is limited to 1 <= n <= {MAX_VERTICES}, got {n}")
    if not ks or ks[0] < 0:
        raise DomainError("census needs at least one k >= 0")
    if jobs < 1:
        raise DomainError("jobs must be positive")
    if engine not in ENGINES:
        raise DomainError(f"engine must be one of {ENGINES}, got {engine!r}")
    total = 1 << len(vertex_pairs(n))

    if engine == "compiled":
        threads = min(jobs, numba.config.NUMBA_NUM_THREADS)
        logger.debug("Census n={} ks={} over {} graphs, compiled with {} thread(s)", n, ks, total, threads)
        numba.set_num_threads(threads)
        partials = [_sweep_compiled(n, ks, 0, total)]
    else:
        chunks = _chunks(total, jobs * 8 if jobs > 1 else 1)
        logger.debug("Census n={} ks={} over {} graphs in {} chunk(s), jobs={}", n, ks, total, len(chunks), jobs)
        partials = _sweep_python(n, ks, chunks, jobs)

    totals = [[0] * 5 for _ in ks]
    for partial in partials:
        for row, part in zip(totals, partial, strict=True):
            for index, value in enumerate(part):
                row[index] += value

    rows = [CensusRow(n, k, *row) for k, row in zip(ks, totals, strict=True)]
    for row in rows:
        row.check()
    return rows


def census(n: int, k: int, jobs: int = 1, engine: str = "compiled") -> CensusRow:
    return census_rows(n, [k], jobs, engine)[0]


def census_table(n_max: int, ks: Sequence[int], jobs: int = 1, engine: str = "compiled") -> list[CensusRow]:
    """Rows for n = 1 .. n_max and every k, ordered by n then k."""
    rows = []
    for n in range(1, n_max + 1):
        rows.extend(census_rows(n, ks, jobs, engine))
        logger.info("Census n={} done", n)
    return rows
