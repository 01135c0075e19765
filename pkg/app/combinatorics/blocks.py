"""
Block series of the k-apex forests.

U_k is the upper-bound series sum_r 2^C(r,2) x^r / r! f(2^r x, 1 - 2^-r): r apex
vertices with any edges among them, a forest on the rest, and every leaf of the
forest joined to at least one apex.  L_k = x^k / k! t(2^k x, 1 - 2^-k) counts a
k-clique joined to a tree, and the correction x^k / (k-1)! t(2x, 1/2) removes the
combinations in which the tree hangs off a single apex vertex.

All of them are computed in count space (n! [x^n]) through the scaled tree
recursions of ``trees.tree_counts_at``, which keeps high orders cheap.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import mpmath
from loguru import logger

from app.analytic.constants import eta as eta_of, log_fraction, singularity_data
from app.combinatorics.bivariate import substitute_u
from app.combinatorics.series import TruncatedEGF, compose, exp_series, mul
from app.combinatorics.trees import TreeSeriesBundle, build_tree_bundle, tree_counts_at
from app.utils.errors import DomainError

TAIL_EXPONENT = -2.5


@dataclass(frozen=True)
class TailModel:
    """Coefficients c n^(-5/2) eta^(-n) of an EGF beyond its exactly known head."""

    c: float
    eta: float
    exponent: float = TAIL_EXPONENT

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError(f"tail constant must be positive, got {self.c}")
        if not 0 < self.eta < 1:
            raise DomainError(f"tail radius must lie in (0, 1), got {self.eta}")
        if self.exponent != TAIL_EXPONENT:
            raise DomainError("only the n^(-5/2) tail is supported")

    def coefficient(self, n: int) -> mpmath.mpf:
        return mpmath.mpf(self.c) * mpmath.power(n, self.exponent) * mpmath.power(self.eta, -n)


@dataclass(frozen=True)
class HybridBlockSeries:
    """Exact block counts up to ``head_order`` followed by a tail model up to ``series.order``.

    The derivative evaluators sum the coefficients explicitly up to the requested
    order and add the rest of the tail in closed form: with q = t / eta,
    sum_{n>N} n^-s q^n = Li_s(q) - sum_{n<=N} n^-s q^n.
    """

    k: int
    head_order: int
    series: TruncatedEGF
    tail: TailModel
    has_tail: bool = True

    @property
    def order(self) -> int:
        return self.series.order

    @property
    def eta(self) -> float:
        return self.tail.eta

    def coefficient(self, n: int) -> mpmath.mpf:
        if n <= self.head_order:
            c = self.series[n]
            return mpmath.mpf(c.numerator) / c.denominator
        return self.tail.coefficient(n)

    def first_derivative(self, t, order: int | None = None) -> mpmath.mpf:
        return self._derivative(t, 1, order)

    def second_derivative(self, t, order: int | None = None) -> mpmath.mpf:
        return self._derivative(t, 2, order)

    def _derivative(self, t, times: int, order: int | None) -> mpmath.mpf:
        t = mpmath.mpf(t)
        if t >= self.eta:
            return mpmath.inf
        if t <= 0:
            # only the z^times term survives at 0
            return mpmath.mpf(math.factorial(times)) * self.coefficient(times) if times <= self.head_order else 0
        explicit = order if order is not None else self.order
        explicit = max(explicit, self.head_order)
        total = mpmath.mpf(0)
        for n in range(times, explicit + 1):
            falling = n if times == 1 else n * (n - 1)
            total += falling * self.coefficient(n) * mpmath.power(t, n - times)
        return total + self._tail_remainder(t, times, explicit)

    def _tail_remainder(self, t: mpmath.mpf, times: int, explicit: int) -> mpmath.mpf:
        q = t / mpmath.mpf(self.eta)
        c = mpmath.mpf(self.tail.c)

        def beyond(s: mpmath.mpf) -> mpmath.mpf:
            partial = mpmath.fsum(mpmath.power(n, -s) * mpmath.power(q, n) for n in range(1, explicit + 1))
            return mpmath.polylog(s, q) - partial

        three_halves = mpmath.mpf(3) / 2
        if times == 1:
            return c / t * beyond(three_halves)
        return c / t**2 * (beyond(mpmath.mpf(1) / 2) - beyond(three_halves))


@dataclass(frozen=True)
class BlockSeriesSet:
    k: int
    U: TruncatedEGF
    L: TruncatedEGF
    L_corr: TruncatedEGF
    B_hybrid: HybridBlockSeries | None = None


@dataclass(frozen=True)
class SandwichRow:
    n: int
    raw_lower: int
    lower: int
    oracle_count: int | None
    upper: int

    @property
    def holds(self) -> bool:
        return self.oracle_count is None or self.lower <= self.oracle_count <= self.upper


def _require(k: int, order: int) -> None:
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    if order < 0:
        raise DomainError("order must be non-negative")


def _integral(values: list) -> list[int]:
    out = []
    for v in values:
        v = Fraction(v)
        if v.denominator != 1:
            raise DomainError(f"non-integral count {v}")
        out.append(v.numerator)
    return out


# ----------------------------------------------------------------------------
# Upper bound
# ----------------------------------------------------------------------------


def _upper_term_counts(r: int, order: int) -> list[int]:
    """Counts of 2^C(r,2) x^r / r! f(2^r x, 1 - 2^-r)."""
    if order < r:
        return [0] * (order + 1)
    _, _, f = tree_counts_at(1 - Fraction(1, 2**r), order - r, 2**r)
    f = _integral(f)
    weight = 2 ** comb(r, 2)
    return [weight * comb(n, r) * f[n - r] if n >= r else 0 for n in range(order + 1)]


def partial_upper_counts(k: int, r_max: int, order: int) -> list[int]:
    _require(k, order)
    if not 1 <= r_max <= k:
        raise DomainError(f"r_max must lie in 1..{k}")
    total = [0] * (order + 1)
    for r in range(1, r_max + 1):
        for n, value in enumerate(_upper_term_counts(r, order)):
            total[n] += value
    return total


def upper_bound_counts(k: int, order: int) -> list[int]:
    return partial_upper_counts(k, k, order)


def partial_upper_series(k: int, r_max: int, order: int) -> TruncatedEGF:
    return TruncatedEGF.from_counts(partial_upper_counts(k, r_max, order), order)


def upper_series(k: int, order: int) -> TruncatedEGF:
    """U_k to the given order; it also counts the small degenerate graphs with an empty forest."""
    series = TruncatedEGF.from_counts(upper_bound_counts(k, order), order)
    logger.debug("U_{} built to order {}", k, order)
    return series


def upper_series_literal(k: int, order: int, bundle: TreeSeriesBundle | None = None) -> TruncatedEGF:
    """U_k assembled from the bivariate forest series, for cross-checking ``upper_series``."""
    _require(k, order)
    bundle = bundle or build_tree_bundle(max(order, 1))
    total = TruncatedEGF.zero(order)
    for r in range(1, k + 1):
        forest = substitute_u(bundle.f_biv.scale_argument(2**r), 1 - Fraction(1, 2**r)).truncate(order)
        prefactor = TruncatedEGF.monomial(r, order, Fraction(2 ** comb(r, 2), math.factorial(r)))
        total = total + mul(prefactor, forest)
    return total


# ----------------------------------------------------------------------------
# Lower bound
# ----------------------------------------------------------------------------


def _unrooted_counts_at(r: int, order: int) -> list[int]:
    _, t, _ = tree_counts_at(1 - Fraction(1, 2**r), order, 2**r)
    return _integral(t)


def lower_bound_counts(k: int, order: int) -> tuple[list[int], list[int]]:
    """Counts of L_k and of its correction x^k / (k-1)! t(2x, 1/2)."""
    _require(k, order)
    t_k = _unrooted_counts_at(k, order)
    t_1 = t_k if k == 1 else _unrooted_counts_at(1, order)
    main = [comb(n, k) * t_k[n - k] if n >= k else 0 for n in range(order + 1)]
    correction = [k * comb(n, k) * t_1[n - k] if n >= k else 0 for n in range(order + 1)]
    return main, correction


def lower_series(k: int, order: int) -> TruncatedEGF:
    main, _ = lower_bound_counts(k, order)
    return TruncatedEGF.from_counts(main, order)


def lower_correction_series(k: int, order: int) -> TruncatedEGF:
    _, correction = lower_bound_counts(k, order)
    return TruncatedEGF.from_counts(correction, order)


def raw_lower_counts(k: int, order: int) -> list[int]:
    """n! ([x^n] L_k - [x^n] L_k,corr): combinations of clique, tree and edges that are 2-connected."""
    main, correction = lower_bound_counts(k, order)
    return [a - b for a, b in zip(main, correction, strict=True)]


def graph_lower_bound(raw: int, n: int, k: int) -> int:
    """Distinct graphs guaranteed by ``raw`` combinations; each graph arises from at most C(n, k) cliques."""
    choices = comb(n, k)
    if raw <= 0 or choices == 0:
        return 0
    return -(-raw // choices)


def block_series_set(k: int, order: int, hybrid: HybridBlockSeries | None = None) -> BlockSeriesSet:
    main, correction = lower_bound_counts(k, order)
    return BlockSeriesSet(
        k=k,
        U=upper_series(k, order),
        L=TruncatedEGF.from_counts(main, order),
        L_corr=TruncatedEGF.from_counts(correction, order),
        B_hybrid=hybrid,
    )


def sandwich_table(k: int, n_max: int, oracle_counts: Mapping[int, int] | None = None) -> list[SandwichRow]:
    """Rows (n, raw_lower, lower, oracle_count, upper) for 1 <= n <= n_max."""
    oracle_counts = oracle_counts or {}
    upper = upper_bound_counts(k, n_max)
    raw = raw_lower_counts(k, n_max)
    rows = []
    for n in range(1, n_max + 1):
        rows.append(
            SandwichRow(
                n=n,
                raw_lower=raw[n],
                lower=graph_lower_bound(raw[n], n, k),
                oracle_count=oracle_counts.get(n),
                upper=upper[n],
            )
        )
    failing = [row.n for row in rows if not row.holds]
    if failing:
        logger.warning("Sandwich violated for k={} at n={}", k, failing)
    return rows


# ----------------------------------------------------------------------------
# Identities and growth diagnostics
# ----------------------------------------------------------------------------


def substitution_identity_check(
    r: int, order: int, perturb: Fraction | int = 0, bundle: TreeSeriesBundle | None = None
) -> bool:
    """T(2^r x, 1 - 2^-r) = T(w) - x and t(2^r x, 1 - 2^-r) = T(w) - T(w)^2/2 - x + x^2/2 with w = 2^r x e^-x.

    ``perturb`` is added to the x^2 coefficient of both right-hand sides.
    """
    if r < 1 or order < 1:
        raise DomainError("r and order must be positive")
    bundle = bundle or build_tree_bundle(order)
    u0 = 1 - Fraction(1, 2**r)
    scale = 2**r

    x = TruncatedEGF.variable(order)
    w = exp_series(-x).shift(1).scale(scale)
    T_w = compose(bundle.T.truncate(order), w)
    bump = TruncatedEGF.monomial(2, order, perturb)

    rooted_left = substitute_u(bundle.T_biv.truncate(order).scale_argument(scale), u0)
    rooted_right = T_w - x + bump
    unrooted_left = substitute_u(bundle.t_biv.truncate(order).scale_argument(scale), u0)
    half_x2 = TruncatedEGF.monomial(2, order, Fraction(1, 2))
    unrooted_right = T_w - mul(T_w, T_w).scale(Fraction(1, 2)) - x + half_x2 + bump

    ok = rooted_left == rooted_right and unrooted_left == unrooted_right
    if not ok:
        logger.debug("Substitution identity fails for r={} at order {}", r, order)
    return ok


def coefficient_ratio_radius(series: TruncatedEGF, n: int) -> float:
    """a_n / a_(n+1), the ratio-test estimate of the radius of convergence."""
    if not 0 <= n < series.order:
        raise DomainError(f"need 0 <= n < {series.order}")
    if series[n + 1] == 0:
        raise DomainError(f"coefficient {n + 1} vanishes")
    return float(series[n] / series[n + 1])


def growth_constant_bounds(counts: Mapping[int, int] | list[int], eta: float, n_range: range) -> tuple[float, float]:
    """inf and sup of count n^(5/2) eta^n / n! over n_range, skipping zero counts."""
    values = []
    for n in n_range:
        count = counts[n]
        if count <= 0:
            continue
        log_value = log_fraction(count) + 2.5 * math.log(n) + n * math.log(eta) - math.lgamma(n + 1)
        values.append(math.exp(log_value))
    if not values:
        raise DomainError("no positive counts in range")
    return min(values), max(values)


# ----------------------------------------------------------------------------
# Hybrid block series
# ----------------------------------------------------------------------------


def lemma_tail(k: int) -> TailModel:
    """Tail with the constant of the upper bound, c_k / Gamma(-3/2)."""
    data = singularity_data(k)
    return TailModel(c=data.tail_constant, eta=data.eta)


def fitted_tail(k: int, oracle_counts: Mapping[int, int]) -> TailModel:
    """Tail continuous with the last oracle coefficient: c = b_n0 n0^(5/2) eta^n0."""
    n0 = max(oracle_counts)
    eta = eta_of(k)
    log_c = log_fraction(oracle_counts[n0]) - math.lgamma(n0 + 1) + 2.5 * math.log(n0) + n0 * math.log(eta)
    return TailModel(c=math.exp(log_c), eta=eta)


def _mpf_to_fraction(value: mpmath.mpf) -> Fraction:
    mantissa, exponent = mpmath.mpf(value).man_exp
    return Fraction(int(mantissa)) * Fraction(2) ** int(exponent)


def hybrid_block_series(
    k: int, oracle_counts: Mapping[int, int], tail: TailModel | None = None, order: int = 100
) -> HybridBlockSeries:
    """Block series with the oracle's exact counts up to n0 and tail-model coefficients after it.

    ``oracle_counts`` maps n to the number of labelled blocks on n vertices (n0 >= 4).
    """
    if not oracle_counts:
        raise DomainError("hybrid block series needs oracle counts")
    n0 = max(oracle_counts)
    if n0 < 4:
        raise DomainError(f"oracle counts must reach n >= 4, got {n0}")
    if any(oracle_counts.get(n, 0) for n in (0, 1)):
        raise DomainError("blocks have at least two vertices")
    if order < n0:
        raise DomainError(f"order {order} is below the oracle range {n0}")
    tail = tail or lemma_tail(k)
    coeffs = [Fraction(oracle_counts.get(n, 0), math.factorial(n)) for n in range(n0 + 1)]
    coeffs += [_mpf_to_fraction(tail.coefficient(n)) for n in range(n0 + 1, order + 1)]
    logger.debug("Hybrid B_{} with exact head n <= {} and tail c={} to order {}", k, n0, tail.c, order)
    return HybridBlockSeries(k=k, head_order=n0, series=TruncatedEGF(order, tuple(coeffs)), tail=tail)
