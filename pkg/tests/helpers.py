"""Shared test utilities."""
from __future__ import annotations

import io
from contextlib import redirect_stdout
from datetime import date
from pathlib import Path

from barpatterns.cli import main
from barpatterns.fixtures import bars_from_closes, trading_days
from barpatterns.market_data import Bar, Series
from barpatterns.patterns import PatternInstance, describe_boundary

DATA = Path(__file__).parent / "data"


def instance_record(p: PatternInstance) -> dict:
    return {
        "kind": p.kind.name,
        "direction": p.direction,
        "span": list(p.span),
        "confirm_index": p.confirm_index,
        "entry_trigger": p.entry_trigger,
        "invalidation": describe_boundary(p.invalidation.boundary),
        "invalidation_direction": p.invalidation.direction,
    }


def from_closes(closes, security_id: str = "T", wick: float = 0.0) -> Series:
    """Series whose swing prices equal the closes at turning points (no wicks)."""
    return Series(security_id, bars_from_closes(list(closes), wick=wick))


def from_ohlc(rows, security_id: str = "T") -> Series:
    """Series from ``(open, high, low, close)`` rows on consecutive trading days."""
    days = trading_days(date(2001, 1, 2), len(rows))
    return Series(security_id, tuple(Bar(d, *r, 100) for d, r in zip(days, rows)))


def from_highs_lows(highs, lows, security_id: str = "T") -> Series:
    rows = [(lo, h, lo, h) for h, lo in zip(highs, lows)]
    return from_ohlc(rows, security_id)


def run_cli(*argv) -> tuple[int, str]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main([str(a) for a in argv])
    return code, buf.getvalue()


def line_series(waypoints, security_id: str = "T") -> Series:
    """Flat bars (open = high = low = close) along straight waypoint segments.

    Swings land exactly on the waypoints, which keeps hand-computed examples exact.
    """
    from barpatterns.fixtures import interpolate

    return from_ohlc([(c, c, c, c) for c in interpolate(list(waypoints))], security_id)
