"""
Exact coefficients of the upper-bound series next to their transfer-theorem estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from app.analytic.constants import asymp_upper_count, upper_transfer_ratio
from app.combinatorics.blocks import upper_series


@dataclass(frozen=True)
class AsymptoticRow:
    n: int
    exact_coeff: Fraction
    asymp: mpmath.mpf
    ratio: float


def asymptotic_table(k: int, n_max: int, n_min: int = 1) -> list[AsymptoticRow]:
    series = upper_series(k, n_max)
    return [
        AsymptoticRow(
            n=n,
            exact_coeff=series[n],
            asymp=asymp_upper_count(n, k),
            ratio=upper_transfer_ratio(n, k, series[n]),
        )
        for n in range(max(n_min, 1), n_max + 1)
        if series[n]
    ]
