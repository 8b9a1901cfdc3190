from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DATA, from_highs_lows, from_ohlc
from oracles import oracle_swings
from barpatterns.market_data import Bar, Series, load_csv
from barpatterns.swings import BOTTOM, TOP, SwingPoint, detect_swings, swing_timeline


def test_monotone_rise_has_no_tops():
    s = from_highs_lows(range(1, 11), [h - 0.5 for h in range(1, 11)])
    assert [p for p in detect_swings(s) if p.kind == TOP] == []


def test_single_top():
    highs = [1, 2, 5, 4, 3, 2]
    s = from_highs_lows(highs, [h - 0.5 for h in highs])
    tops = [p for p in detect_swings(s, 3) if p.kind == TOP]
    assert tops == [SwingPoint(2, TOP, 5, 5)]


def test_ties_defeat_confirmation():
    highs = [1, 5, 5, 4, 3, 2]
    s = from_highs_lows(highs, [0.5] * 6)
    # bar 1 is tied by bar 2; bar 2 has three strictly lower highs after it
    assert [(p.index, p.kind) for p in detect_swings(s, 3)] == [(2, TOP)]


def test_short_series_is_empty_not_an_error():
    s = from_highs_lows([3, 2, 1], [2, 1, 0.5])
    assert detect_swings(s, 3) == []
    assert detect_swings(Series("E"), 3) == []


def test_bad_k():
    with pytest.raises(ValueError):
        detect_swings(from_highs_lows([1, 2], [0.5, 1]), 0)


def test_alternation_keeps_more_extreme_top():
    # two tops with no bottom between them: the higher (later) one survives
    highs = [1, 6, 5, 4, 3, 7, 6, 5, 4]
    lows = [0.5, 5, 4, 3, 2, 1.9, 1.8, 1.7, 1.6]
    s = from_highs_lows(highs, lows)
    assert [(p.index, p.kind) for p in detect_swings(s)] == [(0, BOTTOM), (5, TOP)]
    assert [(p.index, p.kind) for p in swing_timeline(s)] == [(0, BOTTOM), (1, TOP), (5, TOP)]


def test_both_candidates_with_no_history_follow_bar_direction():
    # outside bar at 0 followed by three inside bars
    falling = from_ohlc([(10, 12, 8, 9)] + [(10, 11, 9, 10)] * 3)
    rising = from_ohlc([(9, 12, 8, 10)] + [(10, 11, 9, 10)] * 3)
    doji = from_ohlc([(10, 12, 8, 10)] + [(10, 11, 9, 10)] * 3)
    assert [p.kind for p in swing_timeline(falling)] == [TOP, BOTTOM]
    assert [p.kind for p in swing_timeline(rising)] == [BOTTOM, TOP]
    assert swing_timeline(doji) == []


def test_seed42_fixture_matches_oracle_and_golden():
    s = load_csv(DATA / "swings_seed42.csv")
    assert len(s) == 200
    got = [(p.index, p.kind, p.price) for p in detect_swings(s, 3)]
    assert got == oracle_swings(s.opens, s.highs, s.lows, s.closes, 3)
    golden = json.loads((DATA / "swings_seed42_golden.json").read_text())
    assert [[p.index, p.kind, p.price, p.confirm_index] for p in detect_swings(s, 3)] == golden


@st.composite
def quantized_series(draw, max_len=60):
    n = draw(st.integers(0, max_len))
    steps = st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0])
    rows, c = [], 50.0
    for _ in range(n):
        o = c + draw(steps)
        c = o + draw(steps)
        rows.append((o, max(o, c) + abs(draw(steps)), min(o, c) - abs(draw(steps)), c))
    return from_ohlc(rows)


def _mirror(s: Series) -> Series:
    return Series(s.security_id, tuple(Bar(b.date, -b.open, -b.low, -b.high, -b.close, b.volume) for b in s.bars))


@settings(max_examples=300, deadline=None)
@given(quantized_series(), st.sampled_from([1, 2, 3, 5]))
def test_matches_oracle(s, k):
    got = [(p.index, p.kind, p.price) for p in detect_swings(s, k)]
    assert got == oracle_swings(s.opens, s.highs, s.lows, s.closes, k)


@settings(max_examples=300, deadline=None)
@given(quantized_series(), st.sampled_from([1, 2, 3, 5]))
def test_mirror_symmetry(s, k):
    flip = {TOP: BOTTOM, BOTTOM: TOP}
    mirrored = [(p.index, flip[p.kind], -p.price) for p in detect_swings(_mirror(s), k)]
    assert mirrored == [(p.index, p.kind, p.price) for p in detect_swings(s, k)]


@settings(max_examples=300, deadline=None)
@given(quantized_series(), st.sampled_from([1, 2, 3, 5]))
def test_alternation(s, k):
    kinds = [p.kind for p in detect_swings(s, k)]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))


@settings(max_examples=200, deadline=None)
@given(quantized_series(), st.sampled_from([1, 3]))
def test_prefix_stability(s, k):
    full = swing_timeline(s, k)
    for length in range(len(s) + 1):
        prefix = swing_timeline(s.truncated(length), k)
        assert prefix == [p for p in full if p.confirm_index < length]
        assert all(p.confirm_index == p.index + k for p in prefix)


def test_random_walks_match_oracle():
    from barpatterns.fixtures import random_walk
    for seed in range(20):
        s = random_walk(seed, random.Random(seed).randint(50, 300), "R")
        assert [(p.index, p.kind, p.price) for p in detect_swings(s)] == oracle_swings(
            s.opens, s.highs, s.lows, s.closes, 3)
