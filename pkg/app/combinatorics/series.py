"""
Exact truncated exponential generating functions.

A ``TruncatedEGF`` of order N carries the N+1 coefficients [z^0..z^N] as
Fractions.  Binary operations on series of different orders truncate to the
smaller order.  Values are immutable; every operation returns a new series.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from loguru import logger

from app.combinatorics.labelled import binomial_convolution, labelled_exp
from app.utils.errors import SeriesError

Rational = Fraction
Scalar = int | Fraction


def _as_fraction(value: Scalar | str) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class TruncatedEGF:
    """Power series sum coeffs[n] z^n, known exactly up to z^order."""

    order: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        if self.order < 0:
            raise SeriesError(f"order must be non-negative, got {self.order}")
        if len(self.coeffs) != self.order + 1:
            raise SeriesError(f"expected {self.order + 1} coefficients, got {len(self.coeffs)}")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Scalar | str], order: int | None = None) -> TruncatedEGF:
        """Build a series from leading coefficients, zero-padded (or cut) to ``order``."""
        values = [_as_fraction(c) for c in coeffs]
        if order is None:
            order = max(len(values) - 1, 0)
        values = (values + [Fraction(0)] * (order + 1))[: order + 1]
        return cls(order, tuple(values))

    @classmethod
    def from_counts(cls, counts: Sequence[Scalar], order: int | None = None) -> TruncatedEGF:
        """Series whose n-th coefficient is counts[n] / n!."""
        if order is None:
            order = len(counts) - 1
        values = [Fraction(counts[n]) / math.factorial(n) if n < len(counts) else Fraction(0) for n in range(order + 1)]
        return cls(order, tuple(values))

    @classmethod
    def zero(cls, order: int) -> TruncatedEGF:
        return cls(order, (Fraction(0),) * (order + 1))

    @classmethod
    def one(cls, order: int) -> TruncatedEGF:
        return cls.monomial(0, order)

    @classmethod
    def variable(cls, order: int) -> TruncatedEGF:
        return cls.monomial(1, order)

    @classmethod
    def monomial(cls, power: int, order: int, coefficient: Scalar = 1) -> TruncatedEGF:
        values = [Fraction(0)] * (order + 1)
        if power <= order:
            values[power] = _as_fraction(coefficient)
        return cls(order, tuple(values))

    # -- inspection ---------------------------------------------------------

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def counts(self) -> list[Scalar]:
        """n! * coeffs[n]; integral entries are returned as int."""
        out: list[Scalar] = []
        for n, c in enumerate(self.coeffs):
            value = c * math.factorial(n)
            out.append(value.numerator if value.denominator == 1 else value)
        return out

    def truncate(self, order: int) -> TruncatedEGF:
        if order > self.order:
            raise SeriesError(f"cannot extend a series of order {self.order} to {order}")
        return TruncatedEGF(order, self.coeffs[: order + 1])

    def evaluate(self, x: float) -> float:
        """Floating-point value of the truncated polynomial at x (compensated summation)."""
        return math.fsum(float(c) * x**n for n, c in enumerate(self.coeffs) if c)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: TruncatedEGF) -> TruncatedEGF:
        return add(self, other)

    def __sub__(self, other: TruncatedEGF) -> TruncatedEGF:
        return add(self, -other)

    def __neg__(self) -> TruncatedEGF:
        return TruncatedEGF(self.order, tuple(-c for c in self.coeffs))

    def __mul__(self, other: TruncatedEGF) -> TruncatedEGF:
        return mul(self, other)

    def scale(self, factor: Scalar) -> TruncatedEGF:
        factor = _as_fraction(factor)
        return TruncatedEGF(self.order, tuple(factor * c for c in self.coeffs))

    def scale_argument(self, factor: Scalar) -> TruncatedEGF:
        """f(factor * z), by multiplying coefficient n with factor**n."""
        factor = _as_fraction(factor)
        return TruncatedEGF(self.order, tuple(c * factor**n for n, c in enumerate(self.coeffs)))

    def shift(self, power: int) -> TruncatedEGF:
        """z**power * f, keeping the order."""
        values = [Fraction(0)] * power + list(self.coeffs)
        return TruncatedEGF(self.order, tuple(values[: self.order + 1]))

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        return {"order": self.order, "coeffs": [_fraction_str(c) for c in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> TruncatedEGF:
        return cls(int(data["order"]), tuple(Fraction(c) for c in data["coeffs"]))

    @classmethod
    def from_json(cls, text: str) -> TruncatedEGF:
        return cls.from_dict(json.loads(text))


def _fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _common_order(*series: TruncatedEGF) -> int:
    return min(s.order for s in series)


def add(a: TruncatedEGF, b: TruncatedEGF) -> TruncatedEGF:
    """Coefficientwise sum, truncated to the smaller order."""
    order = _common_order(a, b)
    return TruncatedEGF(order, tuple(a.coeffs[n] + b.coeffs[n] for n in range(order + 1)))


def mul(a: TruncatedEGF, b: TruncatedEGF) -> TruncatedEGF:
    """Cauchy product truncated to the smaller order.

    Carried out on n!-scaled coefficients (binomial convolution), which keeps
    labelled-class series in integer arithmetic.
    """
    order = _common_order(a, b)
    product = binomial_convolution(a.counts(), b.counts(), order)
    return TruncatedEGF.from_counts(product, order)


def exp_series(a: TruncatedEGF) -> TruncatedEGF:
    """exp(a) for a series with zero constant term."""
    if a.coeffs[0] != 0:
        raise SeriesError("exp_series needs a zero constant term")
    return TruncatedEGF.from_counts(labelled_exp(a.counts(), a.order), a.order)


def compose(outer: TruncatedEGF, inner: TruncatedEGF) -> TruncatedEGF:
    """outer(inner(z)) truncated to the smaller order; inner must vanish at 0.

    Sums outer_m * inner**m with the powers built incrementally; inner**m has
    valuation >= m so the loop stops at the truncation order.
    """
    if inner.coeffs[0] != 0:
        raise SeriesError("compose needs an inner series with zero constant term")
    order = _common_order(outer, inner)
    inner_counts = inner.counts()
    power: list = [0] * (order + 1)
    power[0] = 1
    acc: list = [Fraction(0)] * (order + 1)
    for m in range(order + 1):
        if m > 0:
            power = binomial_convolution(power, inner_counts, order)
        c = outer.coeffs[m]
        if c:
            for n in range(m, order + 1):
                if power[n]:
                    acc[n] += c * power[n]
    return TruncatedEGF.from_counts(acc, order)


def derive(a: TruncatedEGF) -> TruncatedEGF:
    """d/dz; the result is known to one order less (order 0 stays 0)."""
    if a.order == 0:
        return TruncatedEGF.zero(0)
    return TruncatedEGF(a.order - 1, tuple(n * a.coeffs[n] for n in range(1, a.order + 1)))


def integrate_div_z(a: TruncatedEGF) -> TruncatedEGF:
    """integral_0^z a(s)/s ds, i.e. a_n -> a_n / n in place; needs a_0 = 0."""
    if a.coeffs[0] != 0:
        raise SeriesError("integrate_div_z needs a zero constant term")
    return TruncatedEGF(a.order, (Fraction(0),) + tuple(a.coeffs[n] / n for n in range(1, a.order + 1)))


def solve_tree_fixed_point(rhs_builder: Callable[[TruncatedEGF], TruncatedEGF], order: int) -> TruncatedEGF:
    """Solve y = z * Phi(y) to the given order.

    ``rhs_builder`` maps a series y to Phi(y).  Each pass y <- z * Phi(y)
    fixes at least one more coefficient.  The working order doubles once a
    pass is stable; a stable pass at the target order is the unique solution.
    """
    if order < 0:
        raise SeriesError("order must be non-negative")
    phi_at_zero = rhs_builder(TruncatedEGF.zero(order))
    if phi_at_zero.coeffs[0] == 0:
        raise SeriesError("Phi(0) must have a nonzero constant term")

    if order == 0:
        return TruncatedEGF.zero(0)

    working = 1
    y = TruncatedEGF.zero(working)
    passes = 0
    while True:
        phi = rhs_builder(y)
        if phi.order + 1 < working:
            raise SeriesError(f"Phi(y) lost precision: order {phi.order} for an input of order {y.order}")
        nxt = _extend(_times_z(phi), working)
        passes += 1
        if nxt == y:
            if working == order:
                logger.debug("Fixed point of order {} reached after {} passes", order, passes)
                return y
            working = min(order, 2 * working)
            y = _extend(y, working)
            continue
        y = nxt
        if passes > 4 * order + 8:
            raise SeriesError("fixed-point iteration did not stabilise")


def _times_z(a: TruncatedEGF) -> TruncatedEGF:
    return TruncatedEGF(a.order + 1, (Fraction(0),) + a.coeffs)


def _extend(a: TruncatedEGF, order: int) -> TruncatedEGF:
    if a.order >= order:
        return a.truncate(order)
    return TruncatedEGF(order, a.coeffs + (Fraction(0),) * (order - a.order))
