"""Pearson chi-square test of independence and Holm-Bonferroni correction."""

from __future__ import annotations

import math
from typing import Sequence

from .errors import DegenerateInputError, RangeError, ShapeError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _lower_series(a: float, x: float) -> float:
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammaincc(a: float, x: float) -> float:
    """Regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise RangeError("shape parameter must be positive")
    if x < 0:
        raise RangeError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _lower_series(a, x)))
    return min(1.0, max(0.0, _upper_fraction(a, x)))


def chi2_sf(stat: float, dof: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if dof <= 0:
        raise RangeError("degrees of freedom must be positive")
    if stat <= 0:
        return 1.0
    return gammaincc(dof / 2.0, stat / 2.0)


def chi_square_independence(table: Sequence[Sequence[float]]) -> tuple[float, int, float]:
    """Pearson chi-square test on an r x c contingency table.

    Returns ``(statistic, dof, p_value)``. No continuity correction.
    """
    rows = [list(map(float, r)) for r in table]
    if len(rows) < 2 or any(len(r) != len(rows[0]) for r in rows) or len(rows[0]) < 2:
        raise ShapeError("need a rectangular table with at least 2 rows and 2 columns")
    if any(v < 0 for r in rows for v in r):
        raise RangeError("counts must be non-negative")
    row_tot = [math.fsum(r) for r in rows]
    col_tot = [math.fsum(c) for c in zip(*rows)]
    n = math.fsum(row_tot)
    if min(row_tot) == 0 or min(col_tot) == 0:
        raise DegenerateInputError("table has an all-zero row or column")
    stat = 0.0
    for i, r in enumerate(rows):
        for j, obs in enumerate(r):
            exp = row_tot[i] * col_tot[j] / n
            stat += (obs - exp) ** 2 / exp
    dof = (len(rows) - 1) * (len(rows[0]) - 1)
    return stat, dof, chi2_sf(stat, dof)


def holm_bonferroni(p_raw: Sequence[float], alpha: float = 0.05) -> tuple[list[float], list[bool]]:
    """Holm step-down adjusted p-values and rejection flags, in input order."""
    for p in p_raw:
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"p-value {p} outside [0, 1]")
    m = len(p_raw)
    order = sorted(range(m), key=lambda k: p_raw[k])
    adjusted = [0.0] * m
    reject = [False] * m
    running = 0.0
    still_rejecting = True
    for rank, k in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p_raw[k]))
        adjusted[k] = running
        still_rejecting = still_rejecting and running < alpha
        reject[k] = still_rejecting
    return adjusted, reject
