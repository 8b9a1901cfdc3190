"""Recognition of the twenty bar-chart pattern kinds.

All recognizers are causal: an instance confirmed at bar ``c`` is derived from
bars ``0..c`` only.  Swings are replayed from the swing timeline, so a swing
that is later superseded still produced whatever it produced while it was
the latest one.

Every instance records the boundary whose breakout (or establishment)
confirmed it; the backtest ends the trade when that same boundary is broken
in the adverse direction.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .config import PatternConfig
from .lines import (
    DOWN,
    UP,
    Breakout,
    Level,
    LevelTracker,
    Line,
    Trendline,
    detect_breakout,
    fit_trendlines,
    trendline_from_pair,
)
from .market_data import Series
from .swings import BOTTOM, TOP, SwingPoint, iter_swing_events

BULLISH = "bullish"
BEARISH = "bearish"


class PatternKind(Enum):
    UpTrendline = "Up Trendline"
    BreakingDownTrendline = "Breaking of a Down Trendline"
    BreakingUpTrendline = "Breaking of an Up Trendline"
    DownTrendline = "Down Trendline"
    BreakingHorizontalResistance = "Breaking of a Horizontal Resistance"
    DoubleBottom = "Double Bottom"
    BreakingHorizontalSupport = "Breaking of a Horizontal Support"
    DoubleTop = "Double Top"
    UpFlag = "Up Flag"
    DownFanPrinciple = "Down Fan Principle"
    Channel = "Channel"
    DownHeadShoulders = "Down Head & Shoulders"
    HighFanPrinciple = "High Fan Principle"
    UpSymmetricalTriangle = "Up Symmetrical Triangle"
    Rectangle = "Rectangle"
    UpHeadShoulders = "Up Head & Shoulders"
    DownFlag = "Down Flag"
    UpPennant = "Up Pennant"
    DownPennant = "Down Pennant"
    DownSymmetricalTriangle = "Down Symmetrical Triangle"

    @property
    def label(self) -> str:
        return self.value

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]

    @property
    def direction(self) -> str:
        return BEARISH if self in _BEARISH_KINDS else BULLISH


_KIND_ORDER = {kind: i for i, kind in enumerate(PatternKind)}
_BEARISH_KINDS = frozenset({
    PatternKind.DownTrendline,
    PatternKind.BreakingUpTrendline,
    PatternKind.BreakingHorizontalSupport,
    PatternKind.DownFanPrinciple,
    PatternKind.DownSymmetricalTriangle,
    PatternKind.DownHeadShoulders,
    PatternKind.DownFlag,
    PatternKind.DownPennant,
    PatternKind.DoubleTop,
})
# a breakout claimed by one of these is not also counted as a generic break
_GENERIC_KINDS = frozenset({
    PatternKind.BreakingDownTrendline,
    PatternKind.BreakingUpTrendline,
    PatternKind.BreakingHorizontalResistance,
    PatternKind.BreakingHorizontalSupport,
})


@dataclass(frozen=True)
class PriceLevel:
    """Horizontal boundary from a single swing price (double-pattern necklines)."""

    price: float
    from_index: int

    @property
    def defined_from(self) -> int:
        return self.from_index

    def value_at(self, index: int) -> float:
        return self.price


@dataclass(frozen=True)
class Invalidation:
    boundary: object
    direction: str  # adverse breakout direction that ends the pattern


@dataclass(frozen=True)
class PatternInstance:
    kind: PatternKind
    direction: str
    span: tuple[int, int]
    confirm_index: int
    entry_trigger: str
    invalidation: Invalidation

    def sort_key(self):
        return (self.confirm_index, self.kind.order, self.span, describe_boundary(self.invalidation.boundary))


def describe_boundary(boundary) -> str:
    if isinstance(boundary, Trendline):
        (i1, p1), (i2, p2) = boundary.anchor1, boundary.anchor2
        return f"{boundary.direction} trendline ({i1},{p1:.6g})-({i2},{p2:.6g})"
    if isinstance(boundary, Line):
        (i1, p1), (i2, p2) = boundary.anchor1, boundary.anchor2
        return f"line ({i1},{p1:.6g})-({i2},{p2:.6g})"
    if isinstance(boundary, Level):
        return f"{boundary.kind} {boundary.price:.6g} touched at {','.join(map(str, boundary.formed_by))}"
    if isinstance(boundary, PriceLevel):
        return f"level {boundary.price:.6g} from {boundary.from_index}"
    return repr(boundary)


def _boundary_key(boundary):
    if isinstance(boundary, Line):
        return ("line", boundary.anchor1, boundary.anchor2)
    if isinstance(boundary, (Level, PriceLevel)):
        return ("flat", boundary.price)
    return ("other", repr(boundary))


# --------------------------------------------------------------------------
# shared scanning state


class _Context:
    def __init__(self, series: Series, cfg: PatternConfig):
        self.series = series
        self.cfg = cfg
        self.n = len(series)
        self.events: list[tuple[SwingPoint, bool]] = list(iter_swing_events(series, cfg.swing_k))
        self.tails: list[tuple[SwingPoint, ...]] = []
        running: list[SwingPoint] = []
        for sp, replaced in self.events:
            if replaced:
                running[-1] = sp
            else:
                running.append(sp)
            self.tails.append(tuple(running[-5:]))
        self.confirm_lag = max(3, cfg.swing_k)
        self.lines = fit_trendlines(series, [sp for sp, _ in self.events], self.confirm_lag)

    def breakout(self, boundary, watch_from: int, direction: str, until: int | None = None) -> Breakout | None:
        if watch_from >= self.n or (until is not None and until < watch_from):
            return None
        return detect_breakout(
            self.series, boundary, watch_from, direction, self.cfg.breakout_pct,
            bars=self.cfg.breakout_bars, three_bar_mode=self.cfg.three_bar_mode, until=until,
        )

    def next_event_confirm(self, e: int, kind: str | None = None) -> int | None:
        """Confirm index of the first later event (of ``kind``) strictly after event ``e``'s bar."""
        c0 = self.events[e][0].confirm_index
        for sp, _ in self.events[e + 1:]:
            if sp.confirm_index > c0 and (kind is None or sp.kind == kind):
                return sp.confirm_index
        return None

    def until_before(self, e: int, kind: str | None = None) -> int | None:
        nxt = self.next_event_confirm(e, kind)
        return None if nxt is None else nxt - 1


def _instance(kind: PatternKind, start: int, br_or_confirm, boundary, adverse: str, trigger: str) -> PatternInstance:
    confirm = br_or_confirm.confirm_index if isinstance(br_or_confirm, Breakout) else br_or_confirm
    return PatternInstance(kind, kind.direction, (start, confirm), confirm, trigger,
                           Invalidation(boundary, adverse))


def _trigger(br: Breakout, boundary) -> str:
    return f"{br.rule} breakout {br.direction} at {br.cross_index} through {describe_boundary(boundary)}"


def _opposite(direction: str) -> str:
    return DOWN if direction == UP else UP


# --------------------------------------------------------------------------
# recognizers


def recognize_trendline_patterns(series: Series, cfg: PatternConfig | None = None,
                                 _ctx: _Context | None = None) -> list[PatternInstance]:
    """Trendline establishment and trendline breaks.

    Each line is watched from the bar after its establishment until its first
    confirmed break against the trend.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    out = []
    for line in ctx.lines:
        a1 = line.anchor1[0]
        if line.direction == UP:
            est, brk = PatternKind.UpTrendline, PatternKind.BreakingUpTrendline
        else:
            est, brk = PatternKind.DownTrendline, PatternKind.BreakingDownTrendline
        against = _opposite(line.direction)
        out.append(_instance(est, a1, line.confirm_index, line, against,
                             f"{line.direction} trendline established"))
        br = ctx.breakout(line, line.confirm_index + 1, against)
        if br is not None:
            out.append(_instance(brk, a1, br, line, line.direction, _trigger(br, line)))
    return out


def _inside(ctx: _Context, lower, upper, start: int, end: int) -> bool:
    tol = ctx.cfg.flatness_tol
    closes = ctx.series.closes
    for i in range(start, end + 1):
        lo, hi = lower.value_at(i), upper.value_at(i)
        if not lo * (1 - tol) <= closes[i] <= hi * (1 + tol):
            return False
    return True


def recognize_level_patterns(series: Series, cfg: PatternConfig | None = None,
                             _ctx: _Context | None = None) -> list[PatternInstance]:
    """Horizontal support/resistance breaks and rectangles.

    A rectangle is a resistance broken upward while a support formed over
    interleaved touches still holds and closes stayed inside the box.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    tol = ctx.cfg.flatness_tol
    res = LevelTracker("resistance", tol)
    sup = LevelTracker("support", tol)
    levels: list[Level] = []
    for sp, replaced in ctx.events:
        for tracker in (res, sup):
            lv = tracker.feed(sp, replaced)
            if lv is not None:
                levels.append(lv)
    supports = [lv for lv in levels if lv.kind == "support"]
    out = []
    for lv in levels:
        if lv.kind == "resistance":
            br = ctx.breakout(lv, lv.confirm_index + 1, UP)
            if br is None:
                continue
            out.append(_instance(PatternKind.BreakingHorizontalResistance, lv.from_index, br, lv, DOWN,
                                 _trigger(br, lv)))
            for s in supports:
                if s.confirm_index >= br.cross_index or s.price >= lv.price:
                    continue
                if s.from_index > max(lv.formed_by) or lv.from_index > max(s.formed_by):
                    continue
                start = min(s.from_index, lv.from_index)
                if _inside(ctx, s, lv, start, br.cross_index - 1):
                    out.append(_instance(PatternKind.Rectangle, start, br, lv, DOWN, _trigger(br, lv)))
                    break
        else:
            br = ctx.breakout(lv, lv.confirm_index + 1, DOWN)
            if br is not None:
                out.append(_instance(PatternKind.BreakingHorizontalSupport, lv.from_index, br, lv, UP,
                                     _trigger(br, lv)))
    return out


def recognize_double_patterns(series: Series, cfg: PatternConfig | None = None,
                              _ctx: _Context | None = None) -> list[PatternInstance]:
    """Double bottoms and tops.

    Two consecutive same-kind swings within ``double_tol`` of each other; the
    opposite swing between them is the neckline.  The neckline must break
    before the next swing of the pair's kind is confirmed.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    out = []
    for e, tail in enumerate(ctx.tails):
        if len(tail) < 3:
            continue
        first, neck, second = tail[-3:]
        if abs(second.price - first.price) > ctx.cfg.double_tol * first.price:
            continue
        if second.kind == BOTTOM:
            kind, direction = PatternKind.DoubleBottom, UP
        else:
            kind, direction = PatternKind.DoubleTop, DOWN
        boundary = PriceLevel(neck.price, neck.index)
        br = ctx.breakout(boundary, second.confirm_index + 1, direction, ctx.until_before(e, second.kind))
        if br is not None:
            out.append(_instance(kind, first.index, br, boundary, _opposite(direction), _trigger(br, boundary)))
    return out


def recognize_head_shoulders(series: Series, cfg: PatternConfig | None = None,
                             _ctx: _Context | None = None) -> list[PatternInstance]:
    """Head-and-shoulders tops (bearish) and inverse bottoms (bullish).

    Head beyond both shoulders by ``hs_head_min``, shoulders within
    ``hs_shoulder_tol`` of each other, neckline through the two swings between
    them, confirmed by a neckline break before the next same-kind swing.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    c = ctx.cfg
    out = []
    for e, tail in enumerate(ctx.tails):
        if len(tail) < 5:
            continue
        left, n1, head, n2, right = tail
        if right.kind == TOP:
            shoulder = max(left.price, right.price)
            if head.price < shoulder * (1 + c.hs_head_min):
                continue
            kind, direction = PatternKind.DownHeadShoulders, DOWN
        else:
            shoulder = min(left.price, right.price)
            if head.price > shoulder * (1 - c.hs_head_min):
                continue
            kind, direction = PatternKind.UpHeadShoulders, UP
        if abs(left.price - right.price) > c.hs_shoulder_tol * max(left.price, right.price):
            continue
        neckline = Line((n1.index, n1.price), (n2.index, n2.price))
        br = ctx.breakout(neckline, right.confirm_index + 1, direction, ctx.until_before(e, right.kind))
        if br is not None:
            out.append(_instance(kind, left.index, br, neckline, _opposite(direction), _trigger(br, neckline)))
    return out


def _is_flat(line: Line, tol: float) -> bool:
    p1, p2 = line.anchor1[1], line.anchor2[1]
    return abs(p2 - p1) <= tol * (p1 + p2) / 2


def _pole(ctx: _Context, first: SwingPoint) -> bool:
    c = ctx.cfg
    lo = max(0, first.index - c.flag_pole_bars)
    if first.kind == TOP:
        base = min(ctx.series.lows[lo:first.index + 1])
        return first.price >= base * (1 + c.flag_pole_pct)
    base = max(ctx.series.highs[lo:first.index + 1])
    return first.price <= base * (1 - c.flag_pole_pct)


def _apex(upper: Line, lower: Line) -> float | None:
    ds = lower.slope - upper.slope
    if ds <= 0:
        return None
    # upper(x) == lower(x), written relative to the upper anchor
    gap = upper.anchor1[1] - (lower.anchor1[1] + lower.slope * (upper.anchor1[0] - lower.anchor1[0]))
    return upper.anchor1[0] + gap / ds


def recognize_consolidations(series: Series, cfg: PatternConfig | None = None,
                             _ctx: _Context | None = None) -> list[PatternInstance]:
    """Four-swing formations: symmetrical triangles, flags, pennants and channels.

    The last four swings give an upper line through the two tops and a lower
    line through the two bottoms; closes from the later first anchor to the
    last anchor must stay between them.  Converging lines form a triangle,
    or a pennant when short and preceded by a strong move.  Parallel lines
    form a flag when short, counter to a strong prior move, and a channel
    otherwise.  The breakout must confirm before the next swing is confirmed.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    c = ctx.cfg
    out = []
    for e, tail in enumerate(ctx.tails):
        if len(tail) < 4:
            continue
        quad = tail[-4:]
        tops = [s for s in quad if s.kind == TOP]
        bottoms = [s for s in quad if s.kind == BOTTOM]
        upper = Line((tops[0].index, tops[0].price), (tops[1].index, tops[1].price))
        lower = Line((bottoms[0].index, bottoms[0].price), (bottoms[1].index, bottoms[1].price))
        if _is_flat(upper, c.flatness_tol) or _is_flat(lower, c.flatness_tol):
            continue
        formed = quad[-1].confirm_index
        if not _inside(ctx, lower, upper, max(tops[0].index, bottoms[0].index), quad[-1].index):
            continue
        su, sl = upper.slope, lower.slope
        first = quad[0]
        short = quad[-1].index - first.index <= c.max_flag_bars
        strong = short and _pole(ctx, first)
        until = ctx.until_before(e)
        watch = formed + 1
        start = first.index
        # (kind, boundary, breakout direction) candidates; first confirmed wins
        exits: list[tuple[PatternKind, Line, str]] = []
        if su < 0 < sl:
            apex = _apex(upper, lower)
            if apex is not None and apex <= formed:
                continue
            if apex is not None:
                cap = int(apex) if apex != int(apex) else int(apex) - 1
                until = cap if until is None else min(until, cap)
            if strong and first.kind == TOP:
                exits = [(PatternKind.UpPennant, upper, UP)]
            elif strong and first.kind == BOTTOM:
                exits = [(PatternKind.DownPennant, lower, DOWN)]
            else:
                exits = [(PatternKind.UpSymmetricalTriangle, upper, UP),
                         (PatternKind.DownSymmetricalTriangle, lower, DOWN)]
        elif su * sl > 0 and abs(su - sl) <= c.channel_parallel_tol * max(abs(su), abs(sl)):
            if strong and first.kind == TOP and su < 0:
                exits = [(PatternKind.UpFlag, upper, UP)]
            elif strong and first.kind == BOTTOM and su > 0:
                exits = [(PatternKind.DownFlag, lower, DOWN)]
            else:
                exits = [(PatternKind.Channel, upper, UP)]
        else:
            continue
        hits = []
        for kind, boundary, direction in exits:
            br = ctx.breakout(boundary, watch, direction, until)
            if br is not None:
                hits.append((br.confirm_index, kind.order, kind, boundary, br))
        if hits:
            _, _, kind, boundary, br = min(hits, key=lambda h: (h[0], h[1]))
            direction = br.direction
            out.append(_instance(kind, start, br, boundary, _opposite(direction), _trigger(br, boundary)))
    return out


def _fan_side(ctx: _Context, direction: str) -> list[PatternInstance]:
    """Fans over down lines (``direction == DOWN``) or up lines (``UP``)."""
    swing_kind = TOP if direction == DOWN else BOTTOM
    breaks = UP if direction == DOWN else DOWN
    kind = PatternKind.HighFanPrinciple if direction == DOWN else PatternKind.DownFanPrinciple
    flatter = (lambda s_new, s_old: s_new > s_old) if direction == DOWN else (lambda s_new, s_old: s_new < s_old)
    beyond_origin = (lambda p, o: p >= o) if direction == DOWN else (lambda p, o: p <= o)
    fitted = [ln for ln in ctx.lines if ln.direction == direction]
    out = []
    for first in fitted:
        br = ctx.breakout(first, first.confirm_index + 1, breaks)
        if br is None:
            continue
        origin = first.anchor1
        origin_sp = SwingPoint(origin[0], swing_kind, origin[1], origin[0])
        current, broken_at, stage = first, br.confirm_index, 1
        while stage < 3:
            nxt = _next_fan_line(ctx, origin, origin_sp, current, broken_at, direction, swing_kind,
                                 flatter, beyond_origin, fitted)
            if nxt is None:
                break
            line, dead_at = nxt
            br = ctx.breakout(line, line.confirm_index + 1, breaks,
                              None if dead_at is None else dead_at - 1)
            if br is None:
                break
            current, broken_at, stage = line, br.confirm_index, stage + 1
        if stage == 3:
            out.append(_instance(kind, origin[0], br, current, _opposite(breaks), _trigger(br, current)))
    return out


def _next_fan_line(ctx, origin, origin_sp, current, broken_at, direction, swing_kind,
                   flatter, beyond_origin, fitted):
    """Earliest flatter line from the fan origin established after ``broken_at``.

    Candidates are lines from the origin through later swings and fitted
    lines whose first anchor lies within ``fan_origin_tol`` bars of the
    origin.  Returns the line and the bar at which a swing beyond the origin
    kills the fan (or None).
    """
    tol = ctx.cfg.fan_origin_tol
    candidates: list[Trendline] = []
    dead_at = None
    for sp, _ in ctx.events:
        if sp.confirm_index <= broken_at or sp.kind != swing_kind:
            continue
        if beyond_origin(sp.price, origin[1]):
            dead_at = sp.confirm_index
            break
        if candidates:
            continue
        line = trendline_from_pair(origin_sp, sp, ctx.confirm_lag)
        if line is not None and line.confirm_index < ctx.n and flatter(line.slope, current.slope):
            candidates.append(line)
    for ln in fitted:
        if ln == current or ln.confirm_index <= broken_at:
            continue
        if abs(ln.anchor1[0] - origin[0]) <= tol and flatter(ln.slope, current.slope):
            candidates.append(ln)
    candidates = [ln for ln in candidates if dead_at is None or ln.confirm_index < dead_at]
    if not candidates:
        return None
    best = min(candidates, key=lambda ln: (ln.confirm_index, ln.anchor1, ln.anchor2))
    return best, dead_at


def recognize_fan_principle(series: Series, cfg: PatternConfig | None = None,
                            _ctx: _Context | None = None) -> list[PatternInstance]:
    """Three successively flatter lines from one pivot, each broken in turn.

    Down lines from a top broken upward give a high fan (bullish); up lines
    from a bottom broken downward give a down fan (bearish).  A swing beyond
    the origin pivot ends the fan.
    """
    ctx = _ctx or _Context(series, cfg or PatternConfig())
    return _fan_side(ctx, DOWN) + _fan_side(ctx, UP)


# --------------------------------------------------------------------------
# merge


def _overlap(a: tuple[int, int], b: tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0]) + 1
    if inter <= 0:
        return 0.0
    shorter = min(a[1] - a[0] + 1, b[1] - b[0] + 1)
    return inter / shorter


def _drop_generic(instances: list[PatternInstance]) -> list[PatternInstance]:
    claimed = {
        (p.confirm_index, p.invalidation.direction, _boundary_key(p.invalidation.boundary))
        for p in instances if p.kind not in _GENERIC_KINDS
    }
    return [
        p for p in instances
        if p.kind not in _GENERIC_KINDS
        or (p.confirm_index, p.invalidation.direction, _boundary_key(p.invalidation.boundary)) not in claimed
    ]


def suppress_duplicates(instances: Iterable[PatternInstance], overlap: float = 0.80) -> list[PatternInstance]:
    """Keep the earlier-confirmed of same-kind instances whose spans overlap > ``overlap``.

    Overlap is measured against the shorter span.  Input must be sorted.
    """
    kept: list[PatternInstance] = []
    by_kind: dict[PatternKind, list[PatternInstance]] = {}
    for p in instances:
        prior = by_kind.setdefault(p.kind, [])
        if any(_overlap(q.span, p.span) > overlap for q in prior):
            continue
        prior.append(p)
        kept.append(p)
    return kept


def scan(series: Series, cfg: PatternConfig | None = None) -> list[PatternInstance]:
    """All pattern instances of ``series`` in (confirm_index, kind order) order."""
    cfg = cfg or PatternConfig()
    if len(series) == 0:
        return []
    ctx = _Context(series, cfg)
    found: list[PatternInstance] = []
    for recognizer in (recognize_trendline_patterns, recognize_level_patterns, recognize_double_patterns,
                       recognize_head_shoulders, recognize_consolidations, recognize_fan_principle):
        found.extend(recognizer(series, cfg, _ctx=ctx))
    found = sorted(set(found), key=PatternInstance.sort_key)
    found = _drop_generic(found)
    return suppress_duplicates(found, cfg.dedupe_overlap)
