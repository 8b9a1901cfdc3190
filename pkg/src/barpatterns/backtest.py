"""Hypothetical trades: buy (or sell short) after confirmation, exit after invalidation."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from .config import PatternConfig
from .lines import detect_breakout
from .market_data import Series
from .patterns import BULLISH, PatternInstance

logger = logging.getLogger(__name__)

LONG = "long"
SHORT = "short"


@dataclass(frozen=True)
class Trade:
    pattern: PatternInstance
    security_id: str
    side: str
    entry_index: int
    entry_price: float
    exit_index: int
    exit_price: float
    closed_by: str  # invalidation | end_of_data
    verdict: bool

    @property
    def kind(self):
        return self.pattern.kind


@dataclass(frozen=True)
class Dropped:
    pattern: PatternInstance
    security_id: str
    reason: str


def _classify(side: str, entry: float, exit_: float) -> bool:
    # ties are false
    return exit_ > entry if side == LONG else exit_ < entry


def simulate(series: Series, inst: PatternInstance, cfg: PatternConfig, entry_price: str = "open") -> Trade | None:
    """Trade one instance; None when there is no bar after its confirmation."""
    n = len(series)
    c = inst.confirm_index
    if not 0 <= c < n:
        raise ValueError(
            f"inconsistent inputs: {inst.kind.name} confirmed at {c} outside series of length {n}"
        )
    if c + 1 >= n:
        return None
    prices = series.opens if entry_price == "open" else series.closes
    side = LONG if inst.direction == BULLISH else SHORT
    entry_index = c + 1
    inv = inst.invalidation
    br = detect_breakout(series, inv.boundary, entry_index, inv.direction, cfg.breakout_pct,
                         bars=cfg.breakout_bars, three_bar_mode=cfg.three_bar_mode)
    if br is not None and br.confirm_index + 1 < n:
        exit_index, exit_price, closed_by = br.confirm_index + 1, prices[br.confirm_index + 1], "invalidation"
    else:
        exit_index, exit_price, closed_by = n - 1, series.closes[n - 1], "end_of_data"
    entry = prices[entry_index]
    return Trade(inst, series.security_id, side, entry_index, entry, exit_index, exit_price, closed_by,
                 _classify(side, entry, exit_price))


def run_backtest(
    series: Series,
    instances: list[PatternInstance],
    cfg: PatternConfig | None = None,
    *,
    entry_price: str = "open",
    mode: str = "independent",
    dropped: list[Dropped] | None = None,
) -> list[Trade]:
    """One trade per instance, entered on the bar after confirmation.

    ``mode="independent"`` evaluates every instance on its own.
    ``mode="sequential"`` holds at most one position per security: instances
    whose entry falls before the open trade's exit are dropped.  Dropped
    instances are appended to ``dropped`` when given.
    """
    cfg = cfg or PatternConfig()
    if mode not in ("independent", "sequential"):
        raise ValueError(f"unknown mode {mode!r}")
    trades: list[Trade] = []
    busy_until = -1

    def drop(inst, reason):
        logger.info("%s: dropped %s at %d: %s", series.security_id, inst.kind.name, inst.confirm_index, reason)
        if dropped is not None:
            dropped.append(Dropped(inst, series.security_id, reason))

    for inst in sorted(instances, key=PatternInstance.sort_key):
        if mode == "sequential" and inst.confirm_index + 1 < busy_until:
            drop(inst, f"position open until bar {busy_until}")
            continue
        trade = simulate(series, inst, cfg, entry_price)
        if trade is None:
            drop(inst, "confirmed on the final bar")
            continue
        trades.append(trade)
        busy_until = trade.exit_index
    return trades
