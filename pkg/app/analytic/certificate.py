"""
Numerical subcriticality certificate for a block class.

tau solves t B''(t) = 1 on (0, eta), rho = tau exp(-B'(tau)) is the radius of
the rooted connected class and C*(rho) = tau.  Near eta the block tail makes
t B''(t) very steep, so the search bisects on log(eta - t) with 30 digits.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Protocol, runtime_checkable

import mpmath
from loguru import logger

from app.combinatorics.blocks import HybridBlockSeries, fitted_tail, hybrid_block_series, lemma_tail
from app.combinatorics.composition import evaluate_cdot_numeric
from app.combinatorics.series import TruncatedEGF
from app.oracle.census import census
from app.utils.errors import DivergenceError, DomainError

WORKING_DPS = 30


@runtime_checkable
class BlockEvaluator(Protocol):
    """Numerical access to B' and B''; ``order`` is the number of explicitly summed coefficients."""

    eta: float
    order: int
    has_tail: bool

    def first_derivative(self, t, order: int | None = None) -> mpmath.mpf: ...

    def second_derivative(self, t, order: int | None = None) -> mpmath.mpf: ...


@dataclass(frozen=True)
class PolynomialBlockEvaluator:
    """B given by a truncated series only; eta is whatever radius the caller assigns to it."""

    series: TruncatedEGF
    eta: float = math.inf
    has_tail: bool = False

    @property
    def order(self) -> int:
        return self.series.order

    def first_derivative(self, t, order: int | None = None) -> mpmath.mpf:
        return self._derivative(t, 1, order)

    def second_derivative(self, t, order: int | None = None) -> mpmath.mpf:
        return self._derivative(t, 2, order)

    def _derivative(self, t, times: int, order: int | None) -> mpmath.mpf:
        t = mpmath.mpf(t)
        top = min(self.series.order, order if order is not None else self.series.order)
        total = mpmath.mpf(0)
        for n in range(times, top + 1):
            c = self.series[n]
            if c:
                falling = n if times == 1 else n * (n - 1)
                total += falling * (mpmath.mpf(c.numerator) / c.denominator) * mpmath.power(t, n - times)
        return total


@dataclass
class SubcriticalityCertificate:
    k: int
    eta: float
    tau: float | None
    rho: float | None
    cdot_at_rho: float | None
    margin: float | None
    relative_margin: float | None
    orders: list[int] = field(default_factory=list)
    tau_drift: float | None = None
    head_drift: float | None = None
    tail_included: bool = False
    valid: bool = False
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _phi(evaluator: BlockEvaluator, t: mpmath.mpf, order: int) -> mpmath.mpf:
    return t * evaluator.second_derivative(t, order) - 1


def _solve_bounded(evaluator: BlockEvaluator, eta: mpmath.mpf, order: int, tol: float) -> mpmath.mpf | None:
    """Bisection on s = log(eta - t); returns None when t B'' - 1 keeps one sign."""
    s_lo = mpmath.log(eta)  # t = 0
    s_hi = s_lo - 60  # t within eta e^-60 of eta
    if _phi(evaluator, eta - mpmath.exp(s_hi), order) <= 0:
        return None
    steps = 0
    while s_lo - s_hi > tol * 1e-2:
        s_mid = (s_lo + s_hi) / 2
        if _phi(evaluator, eta - mpmath.exp(s_mid), order) > 0:
            s_hi = s_mid
        else:
            s_lo = s_mid
        steps += 1
    logger.debug("tau at order {} bracketed after {} bisection steps", order, steps)
    return eta - mpmath.exp((s_lo + s_hi) / 2)


def _solve_unbounded(evaluator: BlockEvaluator, order: int, tol: float) -> mpmath.mpf | None:
    lo, hi = mpmath.mpf(0), mpmath.mpf(1)
    while _phi(evaluator, hi, order) <= 0:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            return None
    while hi - lo > tol * 1e-2 * hi:
        mid = (lo + hi) / 2
        if _phi(evaluator, mid, order) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def _monotone_on_samples(evaluator: BlockEvaluator, eta: mpmath.mpf, order: int) -> bool:
    top = eta if mpmath.isfinite(eta) else mpmath.mpf(4)
    samples = [_phi(evaluator, top * mpmath.mpf(i) / 10, order) for i in range(1, 10)]
    return all(a <= b for a, b in zip(samples, samples[1:], strict=False))


def _solve(evaluator: BlockEvaluator, eta: mpmath.mpf, order: int, tol: float) -> mpmath.mpf | None:
    if mpmath.isfinite(eta):
        return _solve_bounded(evaluator, eta, order, tol)
    return _solve_unbounded(evaluator, order, tol)


def subcriticality_solve(
    evaluator: BlockEvaluator,
    eta: float,
    tol: float = 1e-10,
    orders: Sequence[int] | None = None,
    drift_tol: float = 1e-6,
    k: int = 0,
    head_variants: Sequence[BlockEvaluator] = (),
    head_drift_tol: float = 1e-2,
) -> SubcriticalityCertificate:
    """Locate tau with tau B''(tau) = 1 below eta at several truncation orders and check C*(rho) = tau.

    ``tau_drift`` compares the truncation orders of ``evaluator``.  ``head_drift``
    compares tau with the roots of ``head_variants``, the same class with a
    shorter exact head, and is None without variants.  Every failed check
    (bracketing, monotonicity on the samples, either drift, C*(rho)) marks the
    certificate invalid instead of raising.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if orders is None:
        base = evaluator.order
        orders = [base, 2 * base, 4 * base]
    orders = list(orders)
    if len(orders) < 1:
        raise DomainError("at least one truncation order is needed")

    with mpmath.workdps(WORKING_DPS):
        eta_mp = mpmath.mpf(eta)
        bounded = mpmath.isfinite(eta_mp)
        diagnostics = []
        monotone = _monotone_on_samples(evaluator, eta_mp, orders[0])
        if not monotone:
            diagnostics.append("t B''(t) not increasing on the sampled points")

        taus = []
        for order in orders:
            tau = _solve(evaluator, eta_mp, order, tol)
            if tau is None:
                logger.info("No root of t B''(t) = 1 below eta at order {}", order)
                return SubcriticalityCertificate(
                    k=k,
                    eta=float(eta),
                    tau=None,
                    rho=None,
                    cdot_at_rho=None,
                    margin=None,
                    relative_margin=None,
                    orders=orders,
                    tail_included=evaluator.has_tail,
                    valid=False,
                    diagnostic="; ".join(diagnostics + ["no root bracketed"]),
                )
            taus.append(tau)

        tau = taus[0]
        drift = max(abs(x - tau) for x in taus) / tau
        head_drift = None
        head_ok = True
        for variant in head_variants:
            variant_tau = _solve(variant, eta_mp, variant.order, tol)
            if variant_tau is None:
                diagnostics.append(f"no root bracketed for the head variant of order {variant.order}")
                head_ok = False
                continue
            shift = abs(variant_tau - tau) / tau
            head_drift = shift if head_drift is None else max(head_drift, shift)
        if head_drift is not None and head_drift > head_drift_tol:
            diagnostics.append(f"head drift {mpmath.nstr(head_drift, 6)} exceeds {head_drift_tol}")
            head_ok = False

        rho = tau * mpmath.exp(-evaluator.first_derivative(tau, orders[0]))
        try:
            cdot = evaluate_cdot_numeric(evaluator, rho, tol=tol, eta=eta_mp)
        except DivergenceError as exc:
            diagnostics.append(f"C*(rho) evaluation failed: {exc}")
            cdot = None

        margin = eta_mp - tau
        valid = margin > 0 and drift <= drift_tol and monotone and head_ok
        if drift > drift_tol:
            diagnostics.append(f"tau drift {mpmath.nstr(drift, 6)} exceeds {drift_tol}")
        if cdot is None or abs(cdot - tau) > 10 * tol:
            valid = False
            if cdot is not None:
                diagnostics.append(f"C*(rho) = {mpmath.nstr(cdot, 15)} differs from tau")

        certificate = SubcriticalityCertificate(
            k=k,
            eta=float(eta),
            tau=float(tau),
            rho=float(rho),
            cdot_at_rho=float(cdot) if cdot is not None else None,
            margin=float(margin),
            relative_margin=float(margin / eta_mp) if bounded else math.inf,
            orders=orders,
            tau_drift=float(drift),
            head_drift=float(head_drift) if head_drift is not None else None,
            tail_included=evaluator.has_tail,
            valid=bool(valid),
            diagnostic="; ".join(diagnostics),
        )
    logger.info("Certificate for k={}: tau={} margin={} valid={}", k, certificate.tau, certificate.margin, valid)
    return certificate


def _hybrid(k: int, counts: Mapping[int, int], tail: str, order: int) -> HybridBlockSeries:
    model = lemma_tail(k) if tail == "lemma" else fitted_tail(k, counts)
    return hybrid_block_series(k, counts, model, max(order, max(counts)))


def certify_class(
    k: int,
    order: int,
    oracle_n: int = 6,
    tail: str = "lemma",
    tol: float = 1e-10,
    jobs: int = 1,
    drift_tol: float = 1e-6,
    block_counts: Mapping[int, int] | None = None,
    head_drift_tol: float = 1e-2,
) -> SubcriticalityCertificate:
    """Certificate for G_k with blocks counted exactly up to ``oracle_n`` and a tail model beyond.

    ``block_counts`` (n -> |B_k| on n vertices) skips the census when the caller
    already has it.  The heads oracle_n - 1 and oracle_n - 2, where still at
    least 4, are solved as well and their spread is reported as ``head_drift``.
    """
    if k < 1:
        raise DomainError("certificates need k >= 1")
    if tail not in ("lemma", "fitted"):
        raise DomainError(f"tail must be lemma or fitted, got {tail!r}")
    if block_counts is None:
        block_counts = {n: census(n, k, jobs).count_B for n in range(1, oracle_n + 1)}
    counts = dict(block_counts)
    missing = [n for n in range(1, oracle_n + 1) if n not in counts]
    if missing:
        raise DomainError(f"block counts are missing for n = {missing}")

    def head(top: int) -> dict[int, int]:
        return {n: counts[n] for n in range(1, top + 1)}

    hybrid = _hybrid(k, head(oracle_n), tail, order)
    variants = [_hybrid(k, head(top), tail, order) for top in (oracle_n - 1, oracle_n - 2) if top >= 4]
    return subcriticality_solve(
        hybrid,
        hybrid.eta,
        tol=tol,
        drift_tol=drift_tol,
        k=k,
        head_variants=variants,
        head_drift_tol=head_drift_tol,
    )
