"""Synthetic bar series: the per-kind showcase and a seeded random corpus."""
from __future__ import annotations

import math
import random
from datetime import date, timedelta
from pathlib import Path

from .market_data import Bar, Series, to_csv

START = date(1995, 1, 2)


def trading_days(start: date, count: int) -> list[date]:
    days, d = [], start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def interpolate(waypoints: list[tuple[int, float]]) -> list[float]:
    """Closes along straight segments between ``(index, price)`` waypoints."""
    closes = []
    for (i0, p0), (i1, p1) in zip(waypoints, waypoints[1:]):
        for i in range(i0, i1):
            closes.append(p0 + (p1 - p0) * (i - i0) / (i1 - i0))
    closes.append(waypoints[-1][1])
    return closes


def bars_from_closes(closes: list[float], wick: float = 0.002, open_frac: float = 0.3,
                     start: date = START) -> tuple[Bar, ...]:
    """Bars whose open sits ``open_frac`` of the way from the prior close to the close.

    Highs and lows extend ``wick`` (relative) beyond the body, so a peak close
    gives a strictly higher high than its neighbours.
    """
    bars = []
    prev = closes[0]
    for d, c in zip(trading_days(start, len(closes)), closes):
        o = prev + open_frac * (c - prev)
        o, c = round(o, 4), round(c, 4)
        h = round(max(o, c) * (1 + wick), 4)
        lo = round(min(o, c) * (1 - wick), 4)
        bars.append(Bar(d, o, h, lo, c, 1000))
        prev = c
    return tuple(bars)


def build_series(waypoints, security_id: str, **kw) -> Series:
    return Series(security_id, bars_from_closes(interpolate(list(waypoints)), **kw))


# --------------------------------------------------------------------------
# showcase: one formation per kind, isolated in its own series

# waypoints per kind, in the order of PatternKind; each series is built so
# that its own kind is confirmed exactly once
SHOWCASE: dict[str, list[tuple[int, float]]] = {
    "UpTrendline": [(0, 100), (5, 90), (10, 99), (15, 94), (22, 104)],
    "BreakingDownTrendline": [(0, 90), (5, 100), (10, 91), (15, 96), (20, 90), (26, 100)],
    "BreakingUpTrendline": [(0, 100), (5, 90), (10, 99), (15, 94), (20, 100), (26, 90)],
    "DownTrendline": [(0, 90), (5, 100), (10, 91), (15, 96), (22, 86)],
    "BreakingHorizontalResistance": [(0, 90), (5, 100), (10, 95), (15, 100.3), (20, 92), (28, 106)],
    "DoubleBottom": [(0, 110), (5, 100), (10, 106), (15, 100.4), (22, 112)],
    "BreakingHorizontalSupport": [(0, 112), (5, 100), (10, 109), (15, 99.8), (20, 107), (28, 94)],
    "DoubleTop": [(0, 90), (5, 100), (10, 94), (15, 99.6), (22, 88)],
    "UpFlag": [(0, 80), (8, 100), (12, 95), (16, 98), (20, 93), (26, 104)],
    "DownFanPrinciple": [(0, 110), (5, 100), (10, 115), (15, 108), (20, 125), (26, 110), (32, 122), (40, 108), (46, 116), (54, 104)],
    "Channel": [(0, 100), (5, 96), (10, 104), (15, 100), (20, 108), (25, 104), (32, 118)],
    "DownHeadShoulders": [(0, 90), (5, 100), (10, 95), (15, 110), (20, 96), (25, 101), (32, 88)],
    "HighFanPrinciple": [(0, 110), (5, 120), (10, 105), (15, 112), (20, 95), (26, 110), (32, 98), (40, 112), (46, 104), (54, 116)],
    "UpSymmetricalTriangle": [(0, 90), (6, 110), (12, 92), (18, 106), (24, 95), (30, 112)],
    "Rectangle": [(0, 90), (4, 95), (8, 100), (12, 95.2), (16, 100.2), (20, 95.1), (28, 106)],
    "UpHeadShoulders": [(0, 110), (5, 100), (10, 105), (15, 90), (20, 104), (25, 99), (32, 112)],
    "DownFlag": [(0, 120), (8, 100), (12, 105), (16, 102), (20, 107), (26, 96)],
    "UpPennant": [(0, 80), (8, 100), (12, 95), (16, 98.5), (20, 96.5), (26, 106)],
    "DownPennant": [(0, 120), (8, 100), (12, 105), (16, 101.5), (20, 103.5), (26, 94)],
    "DownSymmetricalTriangle": [(0, 110), (6, 90), (12, 108), (18, 94), (24, 105), (30, 88)],
}


def showcase() -> dict[str, Series]:
    return {name: build_series(wp, f"{i:02d}_{name}") for i, (name, wp) in enumerate(SHOWCASE.items())}


# --------------------------------------------------------------------------
# random corpus


def random_walk(seed: int, length: int, security_id: str, start_price: float = 50.0,
                vol: float = 0.02) -> Series:
    """Geometric random walk with seeded intraday wicks."""
    rng = random.Random(seed)
    closes = []
    c = start_price
    for _ in range(length):
        c = max(0.5, c * math.exp(rng.gauss(0.0, vol)))
        closes.append(c)
    bars = []
    prev = start_price
    for d, c in zip(trading_days(START, length), closes):
        o = prev * math.exp(rng.gauss(0.0, vol / 4))
        hi = max(o, c) * (1 + abs(rng.gauss(0.0, vol / 3)))
        lo = min(o, c) * (1 - abs(rng.gauss(0.0, vol / 3)))
        o, c2, hi, lo = (round(x, 4) for x in (o, c, hi, lo))
        hi = max(hi, o, c2)
        lo = min(lo, o, c2)
        bars.append(Bar(d, o, hi, lo, c2, rng.randrange(1000, 100000)))
        prev = c
    return Series(security_id, tuple(bars))


def corpus(seed: int = 42, count: int = 5, length: int = 750) -> list[Series]:
    return [random_walk(seed * 1000 + i, length, f"SYN{i:02d}") for i in range(count)]


def write_fixtures(outdir, seed: int = 42, count: int = 5, length: int = 750) -> list[Path]:
    outdir = Path(outdir)
    written = []
    for sub, items in (("showcase", list(showcase().values())), ("corpus", corpus(seed, count, length))):
        d = outdir / sub
        d.mkdir(parents=True, exist_ok=True)
        for s in items:
            p = d / f"{s.security_id}.csv"
            p.write_text(to_csv(s), encoding="utf-8")
            written.append(p)
    return written


# --------------------------------------------------------------------------
# 400-bar trending series: a rising leg, a falling leg, then a second rise

TRENDING: list[tuple[int, float]] = [
    (0, 50), (10, 58), (18, 54), (30, 64), (38, 60), (50, 70), (58, 66), (70, 76), (78, 71),
    (90, 82), (98, 77), (110, 88), (120, 80), (130, 84), (140, 74), (150, 80), (160, 70),
    (170, 75), (180, 65), (190, 70), (200, 60), (210, 64), (220, 55), (230, 59), (240, 50),
    (250, 56), (262, 66), (270, 61), (282, 70), (290, 66), (302, 75), (310, 70), (322, 79),
    (330, 74), (342, 83), (350, 77), (362, 72), (372, 80), (382, 70), (399, 74),
]


def trending() -> Series:
    return build_series(TRENDING, "TREND400")
