"""
Block-stable class grammar: G = exp(C), C* = z exp(B'(C*)) with C* = z C'.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING

import mpmath
from loguru import logger

from app.combinatorics.series import (
    TruncatedEGF,
    compose,
    derive,
    exp_series,
    integrate_div_z,
    solve_tree_fixed_point,
)
from app.oracle.census import CensusRow
from app.oracle.census import census as run_census
from app.utils.errors import DivergenceError, DomainError, SeriesError

if TYPE_CHECKING:
    from app.analytic.certificate import BlockEvaluator


@dataclass(frozen=True)
class ClassSeriesBundle:
    order: int
    B: TruncatedEGF
    Cdot: TruncatedEGF
    C: TruncatedEGF
    G: TruncatedEGF


@dataclass(frozen=True)
class GrammarCheckRow:
    n: int
    grammar_connected: int
    oracle_connected: int
    grammar_all: int
    oracle_all: int

    @property
    def match(self) -> bool:
        return self.grammar_connected == self.oracle_connected and self.grammar_all == self.oracle_all


def class_from_blocks(B: TruncatedEGF, order: int | None = None) -> ClassSeriesBundle:
    """Rooted-connected, connected and general series of the class whose blocks are counted by B."""
    order = B.order if order is None else order
    if order > B.order:
        raise SeriesError(f"B is known to order {B.order}, {order} requested")
    if B[0] != 0 or (B.order >= 1 and B[1] != 0):
        raise SeriesError("a block series needs zero z^0 and z^1 coefficients")
    B = B.truncate(order)
    B_prime = derive(B)

    def rhs(y: TruncatedEGF) -> TruncatedEGF:
        return exp_series(compose(B_prime, y))

    Cdot = solve_tree_fixed_point(rhs, order)
    C = integrate_div_z(Cdot)
    G = exp_series(C)
    logger.debug("Class series built from blocks to order {}", order)
    return ClassSeriesBundle(order=order, B=B, Cdot=Cdot, C=C, G=G)


def block_series_from_counts(block_counts: Mapping[int, int], order: int) -> TruncatedEGF:
    """EGF of blocks from labelled block counts; n = 0, 1 are forced to zero."""
    return TruncatedEGF.from_counts([block_counts.get(n, 0) if n >= 2 else 0 for n in range(order + 1)], order)


def gk_class_counts(
    k: int, n_oracle: int, jobs: int = 1, census: Mapping[int, CensusRow] | None = None
) -> list[GrammarCheckRow]:
    """Grammar counts of (connected) G_k next to the brute-force census, for 1 <= n <= n_oracle.

    ``census`` may supply precomputed CensusRow objects by n; the rest are enumerated.
    """
    if not 1 <= n_oracle <= 8:
        raise DomainError(f"oracle range must lie in 1..8, got {n_oracle}")
    rows = dict(census or {})
    for n in range(1, n_oracle + 1):
        if n not in rows:
            rows[n] = run_census(n, k, jobs=jobs)
    bundle = class_from_blocks(block_series_from_counts({n: rows[n].count_B for n in rows}, n_oracle))
    grammar_connected = bundle.C.counts()
    grammar_all = bundle.G.counts()
    table = [
        GrammarCheckRow(
            n=n,
            grammar_connected=int(grammar_connected[n]),
            oracle_connected=rows[n].count_Gk_connected,
            grammar_all=int(grammar_all[n]),
            oracle_all=rows[n].count_Gk,
        )
        for n in range(1, n_oracle + 1)
    ]
    mismatches = [row.n for row in table if not row.match]
    if mismatches:
        logger.warning("Grammar and census disagree for k={} at n={}", k, mismatches)
    return table


def evaluate_cdot_numeric(
    evaluator: BlockEvaluator,
    z: float,
    tol: float = 1e-12,
    method: str = "newton",
    eta: float | None = None,
    max_iter: int = 10_000,
) -> mpmath.mpf:
    """Smallest solution y of y = z exp(B'(y)), approached monotonically from y = 0.

    ``method="newton"`` steps on h(y) = y - z exp(B'(y)), which is concave in y so
    the iterates stay below the root; at z = rho the root is double and the
    convergence is linear.  ``method="fixed_point"`` is the plain iteration.
    Leaving (0, eta), or a non-positive h' while h < 0, means z > rho.
    """
    if method not in ("newton", "fixed_point"):
        raise DomainError(f"unknown method {method!r}")
    if z < 0:
        raise DomainError("z must be non-negative")
    if z == 0:
        return mpmath.mpf(0)
    with mpmath.workdps(30):
        z = mpmath.mpf(z)
        bound = mpmath.mpf(eta if eta is not None else getattr(evaluator, "eta", mpmath.inf))
        return _iterate_cdot(evaluator, z, bound, tol, method, max_iter)


def _iterate_cdot(
    evaluator: BlockEvaluator, z: mpmath.mpf, bound: mpmath.mpf, tol: float, method: str, max_iter: int
) -> mpmath.mpf:
    y = mpmath.mpf(0)
    for step in range(max_iter):
        growth = z * mpmath.exp(evaluator.first_derivative(y))
        if method == "fixed_point":
            nxt = growth
        else:
            h = y - growth
            slope = 1 - growth * evaluator.second_derivative(y)
            if h >= 0:
                return y
            if slope <= 0:
                if abs(h) <= tol * tol:
                    return y
                raise DivergenceError(f"no fixed point below y={mpmath.nstr(y, 15)} for z={mpmath.nstr(z, 15)}")
            nxt = y - h / slope
        if nxt >= bound or not mpmath.isfinite(nxt):
            raise DivergenceError(f"iteration passed eta={mpmath.nstr(bound, 15)} for z={mpmath.nstr(z, 15)}")
        if abs(nxt - y) <= tol / 10:
            logger.debug("C* at z={} converged after {} steps", mpmath.nstr(z, 12), step + 1)
            return nxt
        y = nxt
    raise DivergenceError(f"no convergence after {max_iter} steps at z={mpmath.nstr(z, 15)}")
