import csv
import io
import json
import math
from collections.abc import Iterable, Sequence
from fractions import Fraction
from typing import Any

import mpmath

from app.analytic.certificate import SubcriticalityCertificate
from app.analytic.constants import (
    PLANAR,
    km_constants,
    planar_negligibility_check,
    singularity_data,
    two_connected_prob_rate,
)
from app.analytic.transfer import AsymptoticRow
from app.combinatorics.blocks import SandwichRow
from app.combinatorics.composition import GrammarCheckRow
from app.oracle.census import CENSUS_FIELDS, CensusRow

SIGNIFICANT_DIGITS = 12

SANDWICH_FIELDS = ("n", "raw_lower", "lower", "oracle_count", "upper")
ASYMPTOTIC_FIELDS = ("n", "exact_coeff", "asymp", "ratio")
GRAMMAR_FIELDS = ("n", "grammar_connected", "oracle_connected", "grammar_all", "oracle_all", "match")


def format_value(value: Any) -> Any:
    """
    Normalise a value for output: floats and mpmath numbers to 12 significant digits,
    exact rationals to floats of the same precision, big integers unchanged.
    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(value, bool) or value is None or isinstance(value, int | str):
        return value
    if isinstance(value, Fraction):
        value = mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, mpmath.mpf):
        if not mpmath.isfinite(value):
            return str(float(value))
        as_float = float(value)
        if math.isfinite(as_float) and (as_float != 0 or value == 0):
            return float(f"{as_float:.{SIGNIFICANT_DIGITS}g}")
        return mpmath.nstr(value, SIGNIFICANT_DIGITS)
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    return value


def _csv_cell(value: Any) -> str:
    value = format_value(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buffer.getvalue()


def to_json(data: Any) -> str:
    return json.dumps(_normalise(data), indent=2) + "\n"


def _normalise(data: Any) -> Any:
    if isinstance(data, dict):
        return {key: _normalise(value) for key, value in data.items()}
    if isinstance(data, list | tuple):
        return [_normalise(value) for value in data]
    return format_value(data)


def render_table(header: Sequence[str], rows: Sequence[Sequence[Any]], output_format: str) -> str:
    if output_format == "json":
        return to_json([dict(zip(header, row, strict=True)) for row in rows])
    return to_csv(header, rows)


def census_table_rows(rows: Iterable[CensusRow]) -> list[tuple]:
    return [row.as_tuple() for row in rows]


def sandwich_table_rows(rows: Iterable[SandwichRow]) -> list[tuple]:
    return [(r.n, r.raw_lower, r.lower, r.oracle_count, r.upper) for r in rows]


def asymptotic_table_rows(rows: Iterable[AsymptoticRow]) -> list[tuple]:
    return [(r.n, r.exact_coeff, r.asymp, r.ratio) for r in rows]


def grammar_table_rows(rows: Iterable[GrammarCheckRow]) -> list[tuple]:
    return [
        (r.n, r.grammar_connected, r.oracle_connected, r.grammar_all, r.oracle_all, r.match) for r in rows
    ]


def constants_record(k: int) -> dict[str, Any]:
    """All scalar constants attached to k, in a flat record."""
    data = singularity_data(k)
    km = km_constants(k)
    return {
        "k": k,
        "eta": data.eta,
        "c_upper": data.c_upper,
        "gamma_minus_three_halves": data.gamma_minus_three_halves,
        "tail_constant": data.tail_constant,
        "km_zeta": km.zeta,
        "km_c": km.c,
        "two_connected_rate": two_connected_prob_rate(k),
        "alpha": PLANAR.alpha,
        "beta": PLANAR.beta,
        "beta_check": planar_negligibility_check(k),
    }


def certificate_record(certificate: SubcriticalityCertificate) -> dict[str, Any]:
    return certificate.to_dict()
