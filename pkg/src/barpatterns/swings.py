"""Swing tops and bottoms confirmed by k following bars.

A bar is a candidate top when each of the next ``k`` highs is strictly lower
than its high, and a candidate bottom when each of the next ``k`` lows is
strictly higher than its low.  Candidates are reduced to an alternating
top/bottom sequence: a same-kind candidate that follows without an opposite
swing in between replaces the previous one only when it is more extreme.

Reduction makes the *final* list depend on later bars (a top may be
superseded by a higher one).  :func:`swing_timeline` keeps every swing that
was ever accepted, in confirmation order, which is what causal consumers
(trendlines, patterns) replay.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .market_data import Series

TOP = "top"
BOTTOM = "bottom"


@dataclass(frozen=True)
class SwingPoint:
    index: int
    kind: str
    price: float
    confirm_index: int


def _candidates_at(series: Series, i: int, k: int) -> tuple[bool, bool]:
    highs, lows = series.highs, series.lows
    h, lo = highs[i], lows[i]
    is_top = all(highs[j] < h for j in range(i + 1, i + k + 1))
    is_bottom = all(lows[j] > lo for j in range(i + 1, i + k + 1))
    return is_top, is_bottom


def _more_extreme(new: SwingPoint, old: SwingPoint) -> bool:
    if new.kind == TOP:
        return new.price > old.price
    return new.price < old.price


def _accept_order(series: Series, i: int, last_kind: str | None) -> tuple[str, ...]:
    # Bar that is both a top and a bottom candidate: put the kind that
    # alternates with the previous swing first.  With no previous swing the
    # bar's own direction decides (a falling bar made its high first).
    if last_kind == TOP:
        return (BOTTOM, TOP)
    if last_kind == BOTTOM:
        return (TOP, BOTTOM)
    bar = series.bars[i]
    if bar.close < bar.open:
        return (TOP, BOTTOM)
    if bar.close > bar.open:
        return (BOTTOM, TOP)
    return ()


def iter_swing_events(series: Series, k: int = 3) -> Iterator[tuple[SwingPoint, bool]]:
    """Yield ``(swing, replaced_previous)`` as swings enter the running list.

    Events come out in confirmation order and each depends only on bars up to
    its ``confirm_index``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(series)
    last: SwingPoint | None = None
    for i in range(0, n - k):
        is_top, is_bottom = _candidates_at(series, i, k)
        if not (is_top or is_bottom):
            continue
        kinds = [kd for kd in (TOP, BOTTOM) if (kd == TOP and is_top) or (kd == BOTTOM and is_bottom)]
        if len(kinds) == 2:
            kinds = list(_accept_order(series, i, last.kind if last else None))
        for kind in kinds:
            price = series.highs[i] if kind == TOP else series.lows[i]
            sp = SwingPoint(i, kind, price, i + k)
            if last is not None and last.kind == kind:
                if _more_extreme(sp, last):
                    last = sp
                    yield sp, True
            else:
                last = sp
                yield sp, False


def swing_timeline(series: Series, k: int = 3) -> list[SwingPoint]:
    """Every swing accepted into the running list, including superseded ones."""
    return [sp for sp, _ in iter_swing_events(series, k)]


def reduce_timeline(timeline: list[SwingPoint]) -> list[SwingPoint]:
    out: list[SwingPoint] = []
    for sp in timeline:
        if out and out[-1].kind == sp.kind:
            out[-1] = sp
        else:
            out.append(sp)
    return out


def detect_swings(series: Series, k: int = 3) -> list[SwingPoint]:
    """Alternating confirmed swings of ``series``, sorted by index."""
    return reduce_timeline(swing_timeline(series, k))
