"""
Generating functions of labelled trees, with and without a leaf-marking variable.

T counts vertex-rooted trees, t unrooted trees and f = exp(t) forests.  In the
bivariate versions u marks leaves; a lone root counts as a leaf only when it is
the only vertex, which is what the correction (u - 1) z in T = z e^T + (u - 1) z
encodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from loguru import logger

from app.combinatorics.bivariate import BivariateEGF, substitute_u
from app.combinatorics.labelled import (
    Number,
    Poly,
    binomial_convolution,
    labelled_exp,
    poly_add,
    poly_binomial_convolution,
    poly_labelled_exp,
    poly_mul,
    poly_rooted_tree_counts,
    poly_scale,
    rooted_tree_counts,
)
from app.combinatorics.series import Scalar, TruncatedEGF, exp_series, integrate_div_z, mul
from app.utils.errors import ConsistencyError, DomainError

U_MINUS_ONE: Poly = (-1, 1)
INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class TreeSeriesBundle:
    order: int
    T: TruncatedEGF
    t: TruncatedEGF
    f: TruncatedEGF
    T_biv: BivariateEGF
    t_biv: BivariateEGF
    f_biv: BivariateEGF

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "T": self.T.to_dict(),
            "t": self.t.to_dict(),
            "f": self.f.to_dict(),
            "T_biv": self.T_biv.to_dict(),
            "t_biv": self.t_biv.to_dict(),
            "f_biv": self.f_biv.to_dict(),
        }


@dataclass(frozen=True)
class TreeSeriesAt:
    """T, t and f at a fixed leaf weight u0 and argument scale s, i.e. T(s z, u0) and so on."""

    u0: Fraction
    scale: Fraction
    T: TruncatedEGF
    t: TruncatedEGF
    f: TruncatedEGF


# ----------------------------------------------------------------------------
# Exact series
# ----------------------------------------------------------------------------


def tree_series(order: int) -> tuple[TruncatedEGF, TruncatedEGF, TruncatedEGF]:
    """Univariate T, t and f from the count recursion, checked against n^(n-1) and n^(n-2)."""
    t_counts = rooted_tree_counts(1, 0, order)
    for n in range(1, order + 1):
        if t_counts[n] != n ** (n - 1):
            raise ConsistencyError(f"rooted tree count at n={n} is {t_counts[n]}, expected {n ** (n - 1)}")
    T = TruncatedEGF.from_counts(t_counts)
    t_quadratic = T - mul(T, T).scale(Fraction(1, 2))
    t_integral = integrate_div_z(T)
    if t_quadratic != t_integral:
        raise ConsistencyError("T - T^2/2 and the integral of T/z disagree")
    for n, count in enumerate(t_integral.counts()):
        expected = n ** (n - 2) if n >= 2 else n
        if count != expected:
            raise ConsistencyError(f"unrooted tree count at n={n} is {count}, expected {expected}")
    return T, t_integral, exp_series(t_integral)


def rooted_trees_explicit(order: int) -> BivariateEGF:
    """T(z, u) = (u - 1) z + T(z e^{(u-1) z}) expanded coefficientwise.

    n! [z^n] T(z e^{(u-1)z}) = sum_m C(n, m) m^(n-1) (u - 1)^(n-m).
    """
    counts: list[Poly] = [()] * (order + 1)
    for n in range(1, order + 1):
        acc: list[Number] = [0] * n
        for m in range(1, n + 1):
            weight = comb(n, m) * m ** (n - 1)
            j = n - m
            # (u - 1)^j
            for i in range(j + 1):
                acc[i] += weight * comb(j, i) * (-1) ** (j - i)
        counts[n] = poly_add(acc, U_MINUS_ONE if n == 1 else ())
    return BivariateEGF.from_counts(counts, order)


def _bivariate_tree_counts(order: int) -> tuple[list[Poly], list[Poly], list[Poly]]:
    T = poly_rooted_tree_counts(U_MINUS_ONE, order)
    square = poly_binomial_convolution(T, T, order)
    t: list[Poly] = [()] * (order + 1)
    for n in range(1, order + 1):
        shifted = poly_scale(poly_mul(U_MINUS_ONE, T[n - 1]), n)
        t[n] = poly_add(poly_add(T[n], shifted), poly_scale(square[n], Fraction(-1, 2)))
    f = poly_labelled_exp(t, order)
    return T, t, f


def build_tree_bundle(order: int) -> TreeSeriesBundle:
    """All six tree series to ``order``; the bivariate T is built twice and the routes compared."""
    if order < 1:
        raise DomainError(f"tree bundle needs order >= 1, got {order}")
    T, t, f = tree_series(order)

    T_counts, t_counts, f_counts = _bivariate_tree_counts(order)
    T_biv = BivariateEGF.from_counts(T_counts, order)
    explicit = rooted_trees_explicit(order)
    if explicit != T_biv:
        mismatch = next(n for n in range(order + 1) if explicit[n] != T_biv[n])
        raise ConsistencyError(f"fixed-point and explicit T(z,u) disagree at z^{mismatch}")
    t_biv = BivariateEGF.from_counts(t_counts, order)
    f_biv = BivariateEGF.from_counts(f_counts, order)

    for name, biv, uni in (("T", T_biv, T), ("t", t_biv, t), ("f", f_biv, f)):
        if substitute_u(biv, 1) != uni:
            raise ConsistencyError(f"{name}(z, 1) differs from the univariate {name}(z)")
    logger.debug("Tree bundle of order {} built and cross-checked", order)
    return TreeSeriesBundle(order, T, t, f, T_biv, t_biv, f_biv)


def tree_counts_at(u0: Scalar, order: int, scale: Scalar = 1) -> tuple[list[Number], list[Number], list[Number]]:
    """Counts (n! [z^n]) of T(s z, u0), t(s z, u0) and f(s z, u0)."""
    u0 = Fraction(u0)
    s = Fraction(scale)
    weight = _as_int(s)
    correction = _as_int(s * (u0 - 1))
    T = rooted_tree_counts(weight, correction, order)
    square = binomial_convolution(T, T, order)
    edge = _as_int((u0 - 1) * s)
    t: list[Number] = [0] * (order + 1)
    for n in range(1, order + 1):
        half = Fraction(square[n], 2)
        t[n] = _as_int(T[n] + edge * n * T[n - 1] - half)
    f = labelled_exp(t, order)
    return T, t, f


def tree_series_at(u0: Scalar, order: int, scale: Scalar = 1) -> TreeSeriesAt:
    T, t, f = tree_counts_at(u0, order, scale)
    return TreeSeriesAt(
        Fraction(u0),
        Fraction(scale),
        TruncatedEGF.from_counts(T, order),
        TruncatedEGF.from_counts(t, order),
        TruncatedEGF.from_counts(f, order),
    )


def _as_int(value: Number) -> Number:
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


# ----------------------------------------------------------------------------
# Leaf statistics
# ----------------------------------------------------------------------------


def leaf_census_from_series(bundle: TreeSeriesBundle, n: int) -> dict[int, int]:
    """Number of labelled trees on n vertices by number of leaves, read off t(z, u)."""
    if not 1 <= n <= bundle.order:
        raise DomainError(f"n={n} outside 1..{bundle.order}")
    poly = bundle.t_biv.counts()[n]
    return {leaves: int(count) for leaves, count in enumerate(poly) if count}


def mean_leaf_fraction(n: int) -> Fraction:
    """Expected share of leaves in a uniform labelled tree on n vertices, (1 - 1/n)^(n-2)."""
    if n < 1:
        raise DomainError("n must be positive")
    if n == 1:
        return Fraction(1)
    return Fraction(n - 1, n) ** (n - 2)


def leaf_fraction_of_census(census: dict[int, int], n: int) -> Fraction:
    total = sum(census.values())
    return Fraction(sum(leaves * count for leaves, count in census.items()), n * total)


# ----------------------------------------------------------------------------
# Numerics
# ----------------------------------------------------------------------------


def tree_function_eval(x: float, tol: float = 1e-14) -> float:
    """Solution y in [0, 1] of y e^{-y} = x.

    Newton on g(y) = y e^{-y} - x, falling back to bisection whenever a step
    leaves the current bracket; g' vanishes at the branch point y = 1.
    """
    if x < 0 or x > INV_E * (1 + 1e-15):
        raise DomainError(f"tree function is evaluated on [0, 1/e], got {x}")
    if x == 0:
        return 0.0
    x = min(x, INV_E)
    lo, hi = 0.0, 1.0
    d = 1.0 - math.e * x
    y = 1.0 - math.sqrt(2.0 * max(d, 0.0)) if d < 0.2 else x
    for _ in range(400):
        g = y * math.exp(-y) - x
        if g == 0:
            return y
        if g < 0:
            lo = y
        else:
            hi = y
        slope = (1.0 - y) * math.exp(-y)
        candidate = y - g / slope if slope > 0 else -1.0
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - y) < tol or hi - lo < tol:
            return candidate
        y = candidate
    logger.debug("tree_function_eval({}) stopped on the iteration cap", x)
    return y


def _distance_to_branch(x: float) -> float:
    if x > INV_E * (1 + 1e-15):
        raise DomainError(f"x={x} lies on the branch cut beyond 1/e")
    d = max(0.0, 1.0 - math.e * x)
    if d > 0.2:
        raise DomainError(f"singular expansion used too far from 1/e (1 - e x = {d})")
    return d


def tree_singular_expansion_eval(x: float) -> float:
    """1 - sqrt(2 d) + 2 d / 3 - 11 sqrt(2) d^(3/2) / 36 with d = 1 - e x."""
    d = _distance_to_branch(x)
    return 1.0 - math.sqrt(2.0 * d) + 2.0 * d / 3.0 - 11.0 * math.sqrt(2.0) / 36.0 * d**1.5


def unrooted_singular_expansion_eval(x: float) -> float:
    """1/2 - d + 2 sqrt(2) d^(3/2) / 3; the square-root term cancels in t."""
    d = _distance_to_branch(x)
    return 0.5 - d + 2.0 * math.sqrt(2.0) / 3.0 * d**1.5
