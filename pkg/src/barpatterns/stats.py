"""Count tables and chi-square goodness-of-fit tests."""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

TOTAL = "TOTAL"

_EPS = 1e-15
_MAX_ITER = 10_000


# --------------------------------------------------------------------------
# regularized incomplete gamma


def _gamma_series(a: float, x: float) -> float:
    # P(a, x) by its power series; converges quickly for x < a + 1
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cf(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz continued fraction; for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cf(a, x)


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x <= 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cf(a, x)


def chi2_sf(x: float, df: int) -> float:
    return gammainc_upper(df / 2.0, x / 2.0)


def chi2_critical(df: int, alpha: float, tol: float = 1e-12) -> float:
    """Upper-tail critical value: the x with ``chi2_sf(x, df) == alpha``."""
    if df < 1:
        raise ValueError("df must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = 0.0, max(1.0, float(df))
    while chi2_sf(hi, df) > alpha:
        lo, hi = hi, hi * 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if chi2_sf(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    degrees_of_freedom: int
    alpha: float
    critical_value: float
    significant: bool
    p_value: float


def chi_square_gof(observed: Sequence[float], expected: Sequence[float], alpha: float = 0.005) -> ChiSquareResult:
    """Pearson goodness of fit, df = number of cells - 1."""
    if len(observed) != len(expected):
        raise ValueError("observed and expected differ in length")
    if len(observed) < 2:
        raise ValueError("need at least two cells")
    if any(e <= 0 for e in expected):
        raise ValueError("degenerate expectation: expected counts must be positive")
    stat = math.fsum((o - e) ** 2 / e for o, e in zip(observed, expected))
    df = len(observed) - 1
    crit = chi2_critical(df, alpha)
    return ChiSquareResult(stat, df, alpha, crit, stat > crit, chi2_sf(stat, df))


# --------------------------------------------------------------------------
# count tables


def round_pct(num: int, den: int) -> float:
    """``100 * num / den`` rounded half away from zero to one decimal; 0.0 when den is 0."""
    if den == 0:
        return 0.0
    exact = Decimal(100 * num) / Decimal(den)
    return float(exact.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class CountRow:
    key: object
    total: int
    true_count: int
    false_count: int
    pct_of_total: float
    cum_pct: float | None
    true_pct: float
    false_pct: float

    @property
    def label(self) -> str:
        return getattr(self.key, "label", str(self.key))


def _rows(ordered: list[tuple[object, int, int]], with_cum: bool) -> list[CountRow]:
    grand = sum(t + f for _, t, f in ordered)
    rows = []
    running = 0
    for key, t, f in ordered:
        total = t + f
        running += total
        rows.append(CountRow(key, total, t, f, round_pct(total, grand),
                             round_pct(running, grand) if with_cum else None,
                             round_pct(t, total), round_pct(f, total)))
    t_all = sum(t for _, t, _ in ordered)
    f_all = sum(f for _, _, f in ordered)
    rows.append(CountRow(TOTAL, grand, t_all, f_all, 100.0 if grand else 0.0, None,
                         round_pct(t_all, grand), round_pct(f_all, grand)))
    return rows


def rows_by_pattern(counts: Mapping[object, tuple[int, int]]) -> list[CountRow]:
    """Table rows from ``{kind: (true, false)}``: total descending, then kind order."""
    items = [(k, t, f) for k, (t, f) in counts.items() if t + f > 0]
    items.sort(key=lambda it: (-(it[1] + it[2]), getattr(it[0], "order", 0), str(it[0])))
    return _rows(items, with_cum=True)


def rows_by_security(counts: Mapping[str, tuple[int, int]]) -> list[CountRow]:
    """Table rows from ``{security_id: (true, false)}``: true share descending."""
    items = [(k, t, f) for k, (t, f) in counts.items() if t + f > 0]
    items.sort(key=lambda it: (-Fraction(it[1], it[1] + it[2]), -(it[1] + it[2]), str(it[0])))
    return _rows(items, with_cum=False)


def _tally(trades: Iterable, key) -> dict:
    counts: dict = {}
    for tr in trades:
        t, f = counts.get(key(tr), (0, 0))
        counts[key(tr)] = (t + 1, f) if tr.verdict else (t, f + 1)
    return counts


def aggregate_by_pattern(trades: Iterable) -> list[CountRow]:
    return rows_by_pattern(_tally(trades, lambda tr: tr.pattern.kind))


def aggregate_by_security(trades: Iterable) -> list[CountRow]:
    return rows_by_security(_tally(trades, lambda tr: tr.security_id))


def truth_test(true_count: int, false_count: int, alpha: float = 0.005) -> ChiSquareResult | None:
    """True vs false against an equiprobable null; None without trades."""
    total = true_count + false_count
    if total == 0:
        return None
    return chi_square_gof([true_count, false_count], [total / 2, total / 2], alpha)


def kind_homogeneity_test(rows: Sequence[CountRow], alpha: float = 0.005) -> ChiSquareResult | None:
    """k-cell test of true counts per kind against a common true rate.

    Expected true count of each kind is its total times the pooled true share.
    None when fewer than two kinds or no true trades.
    """
    body = [r for r in rows if r.key != TOTAL]
    true_all = sum(r.true_count for r in body)
    grand = sum(r.total for r in body)
    if len(body) < 2 or true_all == 0:
        return None
    expected = [r.total * true_all / grand for r in body]
    return chi_square_gof([r.true_count for r in body], expected, alpha)
