"""
Series in z whose coefficients are polynomials in the leaf-marking variable u.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from app.combinatorics.labelled import (
    Poly,
    poly_add,
    poly_binomial_convolution,
    poly_eval,
    poly_labelled_exp,
    poly_scale,
    poly_trim,
)
from app.combinatorics.series import Scalar, TruncatedEGF
from app.utils.errors import SeriesError


@dataclass(frozen=True)
class UPoly:
    """Dense polynomial in u with exact coefficients; trailing zeros are trimmed."""

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self):
        trimmed = poly_trim([Fraction(c) for c in self.coeffs])
        object.__setattr__(self, "coeffs", trimmed)

    @classmethod
    def of(cls, *coeffs: Scalar) -> UPoly:
        return cls(tuple(Fraction(c) for c in coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, power: int) -> Fraction:
        return self.coeffs[power] if power < len(self.coeffs) else Fraction(0)

    def __add__(self, other: UPoly) -> UPoly:
        return UPoly(poly_add(self.coeffs, other.coeffs))

    def scale(self, factor: Scalar) -> UPoly:
        return UPoly(poly_scale(self.coeffs, Fraction(factor)))

    def evaluate(self, u: Scalar) -> Fraction:
        return Fraction(poly_eval(self.coeffs, Fraction(u)))

    def to_strings(self) -> list[str]:
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]


@dataclass(frozen=True)
class BivariateEGF:
    """sum_n coeffs[n](u) z^n known up to z^order."""

    order: int
    coeffs: tuple[UPoly, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise SeriesError(f"expected {self.order + 1} coefficients, got {len(self.coeffs)}")

    @classmethod
    def from_counts(cls, counts: Sequence[Sequence[Scalar]], order: int | None = None) -> BivariateEGF:
        """Series whose z^n coefficient is the polynomial counts[n] divided by n!."""
        if order is None:
            order = len(counts) - 1
        polys = []
        for n in range(order + 1):
            row = counts[n] if n < len(counts) else ()
            polys.append(UPoly(tuple(Fraction(c) / math.factorial(n) for c in row)))
        return cls(order, tuple(polys))

    @classmethod
    def from_polys(cls, polys: Iterable[UPoly]) -> BivariateEGF:
        values = tuple(polys)
        return cls(len(values) - 1, values)

    def __getitem__(self, n: int) -> UPoly:
        return self.coeffs[n]

    def counts(self) -> list[Poly]:
        out: list[Poly] = []
        for n, p in enumerate(self.coeffs):
            scaled = [c * math.factorial(n) for c in p.coeffs]
            out.append(tuple(c.numerator if c.denominator == 1 else c for c in scaled))
        return out

    def truncate(self, order: int) -> BivariateEGF:
        return BivariateEGF(order, self.coeffs[: order + 1])

    def scale_argument(self, factor: Scalar) -> BivariateEGF:
        factor = Fraction(factor)
        return BivariateEGF(self.order, tuple(p.scale(factor**n) for n, p in enumerate(self.coeffs)))

    def __add__(self, other: BivariateEGF) -> BivariateEGF:
        return b_add(self, other)

    def __mul__(self, other: BivariateEGF) -> BivariateEGF:
        return b_mul(self, other)

    def to_dict(self) -> dict:
        return {"order": self.order, "coeffs": [p.to_strings() for p in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def b_add(a: BivariateEGF, b: BivariateEGF) -> BivariateEGF:
    order = min(a.order, b.order)
    return BivariateEGF(order, tuple(a.coeffs[n] + b.coeffs[n] for n in range(order + 1)))


def b_scale(a: BivariateEGF, factor: UPoly) -> BivariateEGF:
    """Multiply every coefficient by a polynomial in u."""
    out = []
    for p in a.coeffs:
        product = [Fraction(0)] * (len(p.coeffs) + len(factor.coeffs))
        for i, x in enumerate(p.coeffs):
            for j, y in enumerate(factor.coeffs):
                product[i + j] += x * y
        out.append(UPoly(tuple(product)))
    return BivariateEGF(a.order, tuple(out))


def b_shift(a: BivariateEGF, power: int) -> BivariateEGF:
    """z**power * a, keeping the order."""
    polys = [UPoly()] * power + list(a.coeffs)
    return BivariateEGF(a.order, tuple(polys[: a.order + 1]))


def b_mul(a: BivariateEGF, b: BivariateEGF) -> BivariateEGF:
    order = min(a.order, b.order)
    return BivariateEGF.from_counts(poly_binomial_convolution(a.counts(), b.counts(), order), order)


def b_exp(a: BivariateEGF) -> BivariateEGF:
    if not a.coeffs[0].is_zero():
        raise SeriesError("b_exp needs a zero z^0 coefficient")
    return BivariateEGF.from_counts(poly_labelled_exp(a.counts(), a.order), a.order)


def substitute_u(a: BivariateEGF, u0: Scalar) -> TruncatedEGF:
    """Evaluate every coefficient polynomial at u = u0."""
    return TruncatedEGF(a.order, tuple(p.evaluate(u0) for p in a.coeffs))
