from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import from_ohlc
from barpatterns.backtest import LONG, SHORT, Dropped, run_backtest, simulate
from barpatterns.config import PatternConfig
from barpatterns.fixtures import random_walk
from barpatterns.lines import DOWN, UP
from barpatterns.patterns import Invalidation, PatternInstance, PatternKind, PriceLevel, scan
from barpatterns.stats import aggregate_by_pattern


def bar(o, c):
    return (o, max(o, c), min(o, c), c)


def _series(n, opens, closes, default=16.0):
    rows = []
    for i in range(n):
        o = opens.get(i, default)
        c = closes.get(i, default)
        rows.append(bar(o, c))
    return from_ohlc(rows)


def _inst(kind, confirm, level, adverse):
    return PatternInstance(kind, kind.direction, (0, confirm), confirm, "test",
                           Invalidation(PriceLevel(level, 0), adverse))


def test_long_trade_true():
    s = _series(30, {11: 20.0, 21: 23.0}, {20: 14.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)])
    assert (t.side, t.entry_index, t.entry_price, t.exit_index, t.exit_price) == (LONG, 11, 20.0, 21, 23.0)
    assert t.closed_by == "invalidation" and t.verdict is True


def test_tie_is_false():
    s = _series(30, {11: 20.0, 21: 20.0}, {20: 14.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)])
    assert t.verdict is False


def test_short_trade_true():
    s = _series(30, {11: 30.0, 21: 27.0}, {20: 17.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleTop, 10, 16.5, UP)])
    assert (t.side, t.entry_price, t.exit_price, t.verdict) == (SHORT, 30.0, 27.0, True)


def test_close_entry_option():
    s = _series(30, {}, {11: 18.0, 20: 14.0, 21: 19.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)], entry_price="close")
    assert (t.entry_price, t.exit_price, t.verdict) == (18.0, 19.0, True)


def test_end_of_data_exit():
    s = _series(20, {11: 15.5}, {19: 17.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)])
    assert (t.closed_by, t.exit_index, t.exit_price, t.verdict) == ("end_of_data", 19, 17.0, True)


def test_invalidation_on_last_bar_closes_at_end_of_data():
    s = _series(21, {}, {20: 14.0})
    (t,) = run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)])
    assert (t.closed_by, t.exit_index) == ("end_of_data", 20)


def test_final_bar_confirmation_is_dropped():
    s = _series(11, {}, {})
    dropped = []
    assert run_backtest(s, [_inst(PatternKind.DoubleBottom, 10, 15.0, DOWN)], dropped=dropped) == []
    assert [d.reason for d in dropped] == ["confirmed on the final bar"]


def test_out_of_range_instance_is_an_error():
    with pytest.raises(ValueError, match="inconsistent inputs"):
        run_backtest(_series(5, {}, {}), [_inst(PatternKind.DoubleBottom, 9, 15.0, DOWN)])


def test_sequential_mode_skips_overlapping_instances():
    s = _series(40, {}, {20: 14.0})
    a = _inst(PatternKind.DoubleBottom, 5, 15.0, DOWN)
    b = _inst(PatternKind.UpTrendline, 10, 15.0, DOWN)
    c = _inst(PatternKind.UpTrendline, 25, 10.0, DOWN)
    dropped: list[Dropped] = []
    trades = run_backtest(s, [a, b, c], mode="sequential", dropped=dropped)
    assert [t.pattern for t in trades] == [a, c]
    assert [d.pattern for d in dropped] == [b]
    assert len(run_backtest(s, [a, b, c])) == 3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 5000), st.sampled_from(["independent", "sequential"]))
def test_every_instance_gets_one_verdict(seed, mode):
    s = random_walk(seed, 400, "R")
    instances = scan(s)
    dropped: list[Dropped] = []
    trades = run_backtest(s, instances, mode=mode, dropped=dropped)
    assert len(trades) + len(dropped) == len(instances)
    total = aggregate_by_pattern(trades)[-1]
    assert total.true_count + total.false_count == total.total == len(trades)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5000))
def test_trades_use_no_future_bars(seed):
    s = random_walk(seed, 300, "R")
    cfg = PatternConfig()
    for inst in scan(s):
        t = simulate(s, inst, cfg)
        if t is None or t.closed_by != "invalidation":
            continue
        assert t.entry_index == inst.confirm_index + 1
        # the same exit is found on the series cut right after the exit bar
        cut = simulate(s.truncated(t.exit_index + 1), inst, cfg)
        assert (cut.exit_index, cut.exit_price, cut.closed_by) == (t.exit_index, t.exit_price, t.closed_by)
