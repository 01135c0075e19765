"""
Numerical constants of the k-apex-forest block classes.

eta(k) is the radius of convergence of the block series, the smallest positive
solution of 2^k eta = e^(eta - 1), equivalently T(1 / (2^k e)).  Counting
estimates that grow like eta^-n n! are returned as mpmath numbers or logarithms
so that they never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from loguru import logger

from app.utils.errors import DomainError

GAMMA_MINUS_THREE_HALVES = 4.0 * math.sqrt(math.pi) / 3.0


@dataclass(frozen=True)
class SingularityData:
    k: int
    eta: float
    c_upper: float
    gamma_minus_three_halves: float = GAMMA_MINUS_THREE_HALVES

    @property
    def tail_constant(self) -> float:
        """Coefficient constant of the upper bound, c_k / Gamma(-3/2)."""
        return self.c_upper / self.gamma_minus_three_halves


@dataclass(frozen=True)
class KMConstants:
    """Growth constants of all k-apex forests: |Z_k,n| ~ c n^(-5/2) zeta^n n!."""

    k: int
    zeta: float
    c: float


@dataclass(frozen=True)
class PlanarConstants:
    """Planar block constants (Gimenez and Noy); literals, not recomputed."""

    alpha: float = 0.37042e-5
    beta: float = 0.03819


PLANAR = PlanarConstants()


def _require_k(k: int) -> None:
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")


def eta(k: int, tol: float = 1e-16) -> float:
    """Smallest root in (0, 1) of h(y) = k ln 2 + ln y - y + 1.

    h is increasing and concave on (0, 1), so Newton steps started left of the
    root stay left of it; a bisection step is taken if one ever leaves the bracket.
    """
    _require_k(k)
    log_two_k = k * math.log(2.0)
    lo, hi = math.exp(-1.0) / 2**k, 1.0
    y = lo
    for _ in range(200):
        h = log_two_k + math.log(y) - y + 1.0
        if h < 0:
            lo = y
        else:
            hi = y
        slope = 1.0 / y - 1.0
        candidate = y - h / slope
        if not lo <= candidate <= hi:
            candidate = 0.5 * (lo + hi)
        if abs(candidate - y) <= tol * y:
            return candidate
        y = candidate
    logger.debug("eta({}) stopped on the iteration cap", k)
    return y


def c_lemma1(k: int) -> float:
    """c_k = 2^C(k,2) * 2 sqrt(2) / (3 k!) * e^((1 - eta)^2 / 2) * (1 - eta)^(3/2) * eta^k."""
    _require_k(k)
    e_k = eta(k)
    return (
        2 ** math.comb(k, 2)
        * 2.0
        * math.sqrt(2.0)
        / (3.0 * math.factorial(k))
        * math.exp((1.0 - e_k) ** 2 / 2.0)
        * (1.0 - e_k) ** 1.5
        * e_k**k
    )


def singularity_data(k: int) -> SingularityData:
    return SingularityData(k=k, eta=eta(k), c_upper=c_lemma1(k))


def log_asymp_upper_count(n: int, k: int) -> float:
    """log of (c_k / Gamma(-3/2)) n^(-5/2) eta_k^(-n), the coefficient estimate of U_k."""
    if n < 1:
        raise DomainError("n must be positive")
    data = singularity_data(k)
    return math.log(data.tail_constant) - 2.5 * math.log(n) - n * math.log(data.eta)


def asymp_upper_count(n: int, k: int) -> mpmath.mpf:
    """EGF-coefficient estimate of U_k at x^n; multiply by n! for counts."""
    return mpmath.exp(log_asymp_upper_count(n, k))


def log_fraction(value: Fraction | int) -> float:
    """Natural log of a positive rational with arbitrarily large numerator and denominator."""
    value = Fraction(value)
    if value <= 0:
        raise DomainError("log of a non-positive number")
    return math.log(value.numerator) - math.log(value.denominator)


def upper_transfer_ratio(n: int, k: int, coefficient: Fraction) -> float:
    """[x^n]U_k divided by its transfer estimate, computed in logarithms."""
    return math.exp(log_fraction(coefficient) - log_asymp_upper_count(n, k))


def km_constants(k: int) -> KMConstants:
    _require_k(k)
    zeta = math.e * 2**k
    c = 1.0 / (2 ** math.comb(k + 1, 2) * math.e**k * math.factorial(k))
    return KMConstants(k=k, zeta=zeta, c=c)


def apex_forest_estimate(n: int, k: int) -> mpmath.mpf:
    """c n^(-5/2) zeta^n n!, evaluated in log space."""
    if n < 1:
        raise DomainError("n must be positive")
    km = km_constants(k)
    log_value = math.log(km.c) - 2.5 * math.log(n) + n * math.log(km.zeta) + math.lgamma(n + 1)
    return mpmath.exp(log_value)


def two_connected_prob_rate(k: int) -> float:
    """Base of the exponential decay of P(2-connected): 1 / (zeta_k eta_k) = e^(-eta_k)."""
    return math.exp(-eta(k))


def planar_negligibility_check(k: int) -> bool:
    """Whether the planar blocks grow strictly slower than the apex-forest blocks (beta > eta_k)."""
    return PLANAR.beta > eta(k)
