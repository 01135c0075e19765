"""
Count-space kernels for labelled products.

A labelled class with EGF sum a_n z^n / n! is handled here through its count
sequence (n! * coefficient).  In that scaling the Cauchy product becomes the
binomial convolution and exp() becomes the usual "root block" recurrence, so
integer count sequences stay integers.  Entries may be int or Fraction; the
polynomial variants carry tuples indexed by the power of u.
"""

from collections.abc import Sequence
from fractions import Fraction
from math import comb

Number = int | Fraction
Poly = tuple[Number, ...]


def binomial_convolution(a: Sequence[Number], b: Sequence[Number], order: int) -> list[Number]:
    """c_n = sum_j C(n, j) a_j b_{n-j} for 0 <= n <= order."""
    out: list[Number] = [0] * (order + 1)
    nz_a = [(j, aj) for j, aj in enumerate(a[: order + 1]) if aj]
    for n in range(order + 1):
        acc: Number = 0
        for j, aj in nz_a:
            if j > n:
                break
            bj = b[n - j] if n - j < len(b) else 0
            if bj:
                acc += comb(n, j) * aj * bj
        out[n] = acc
    return out


def labelled_exp(a: Sequence[Number], order: int) -> list[Number]:
    """Counts of exp(A) where A has counts ``a`` and a_0 = 0.

    e_0 = 1 and e_n = sum_{j=1..n} C(n-1, j-1) a_j e_{n-j}; this is
    n e_n = sum_j j a_j e_{n-j} written for n!-scaled coefficients.
    """
    e: list[Number] = [0] * (order + 1)
    e[0] = 1
    nz_a = [(j, aj) for j, aj in enumerate(a[: order + 1]) if j > 0 and aj]
    for n in range(1, order + 1):
        acc: Number = 0
        for j, aj in nz_a:
            if j > n:
                break
            acc += comb(n - 1, j - 1) * aj * e[n - j]
        e[n] = acc
    return e


def rooted_tree_counts(weight: Number, correction: Number, order: int) -> list[Number]:
    """Counts of the solution of T = weight * z * exp(T) + correction * z.

    T_n = weight * n * E_{n-1} + correction * [n = 1], with E = exp(T) grown
    one coefficient behind T.
    """
    t: list[Number] = [0] * (order + 1)
    e: list[Number] = [0] * (order + 1)
    e[0] = 1
    for n in range(1, order + 1):
        t[n] = weight * n * e[n - 1] + (correction if n == 1 else 0)
        acc: Number = 0
        for j in range(1, n + 1):
            if t[j]:
                acc += comb(n - 1, j - 1) * t[j] * e[n - j]
        e[n] = acc
    return t


# ----------------------------------------------------------------------------
# Polynomial-valued (in u) variants
# ----------------------------------------------------------------------------


def poly_trim(p: Sequence[Number]) -> Poly:
    end = len(p)
    while end and not p[end - 1]:
        end -= 1
    return tuple(p[:end])


def poly_add(p: Sequence[Number], q: Sequence[Number]) -> Poly:
    size = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(size)])


def poly_scale(p: Sequence[Number], c: Number) -> Poly:
    if not c:
        return ()
    return poly_trim([c * x for x in p])


def poly_mul(p: Sequence[Number], q: Sequence[Number]) -> Poly:
    if not p or not q:
        return ()
    out: list[Number] = [0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if not pi:
            continue
        for j, qj in enumerate(q):
            if qj:
                out[i + j] += pi * qj
    return poly_trim(out)


def poly_eval(p: Sequence[Number], u: Number) -> Number:
    acc: Number = 0
    for c in reversed(p):
        acc = acc * u + c
    return acc


def _add_product(acc: list[Number], p: Sequence[Number], q: Sequence[Number], factor: int) -> None:
    """acc += factor * p * q, in place; acc must be long enough."""
    for i, pi in enumerate(p):
        if not pi:
            continue
        scaled = factor * pi
        for j, qj in enumerate(q):
            if qj:
                acc[i + j] += scaled * qj


def poly_binomial_convolution(a: Sequence[Poly], b: Sequence[Poly], order: int) -> list[Poly]:
    out: list[Poly] = [()] * (order + 1)
    nz_a = [(j, aj) for j, aj in enumerate(a[: order + 1]) if aj]
    for n in range(order + 1):
        terms = []
        for j, aj in nz_a:
            if j > n:
                break
            bj = b[n - j] if n - j < len(b) else ()
            if bj:
                terms.append((comb(n, j), aj, bj))
        if not terms:
            continue
        acc: list[Number] = [0] * max(len(aj) + len(bj) - 1 for _, aj, bj in terms)
        for factor, aj, bj in terms:
            _add_product(acc, aj, bj, factor)
        out[n] = poly_trim(acc)
    return out


def poly_labelled_exp(a: Sequence[Poly], order: int) -> list[Poly]:
    e: list[Poly] = [()] * (order + 1)
    e[0] = (1,)
    nz_a = [(j, aj) for j, aj in enumerate(a[: order + 1]) if j > 0 and aj]
    for n in range(1, order + 1):
        terms = [(comb(n - 1, j - 1), aj, e[n - j]) for j, aj in nz_a if j <= n and e[n - j]]
        if not terms:
            continue
        acc: list[Number] = [0] * max(len(aj) + len(ej) - 1 for _, aj, ej in terms)
        for factor, aj, ej in terms:
            _add_product(acc, aj, ej, factor)
        e[n] = poly_trim(acc)
    return e


def poly_rooted_tree_counts(correction: Poly, order: int) -> list[Poly]:
    """Counts of the solution of T = z * exp(T) + correction * z with polynomial coefficients."""
    t: list[Poly] = [()] * (order + 1)
    e: list[Poly] = [()] * (order + 1)
    e[0] = (1,)
    for n in range(1, order + 1):
        t[n] = poly_scale(e[n - 1], n)
        if n == 1:
            t[n] = poly_add(t[n], correction)
        terms = [(comb(n - 1, j - 1), t[j], e[n - j]) for j in range(1, n + 1) if t[j] and e[n - j]]
        if terms:
            acc: list[Number] = [0] * max(len(tj) + len(ej) - 1 for _, tj, ej in terms)
            for factor, tj, ej in terms:
                _add_product(acc, tj, ej, factor)
            e[n] = poly_trim(acc)
    return t
