"""Trendlines, horizontal levels, breakout confirmation and moving averages."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol, Sequence

from .market_data import Series
from .swings import BOTTOM, TOP, SwingPoint

UP = "up"
DOWN = "down"

# absolute slack on the pct*boundary product so exactly-3% closes qualify
PCT_EPS = 1e-9


class Boundary(Protocol):
    def value_at(self, index: int) -> float: ...

    @property
    def defined_from(self) -> int: ...


@dataclass(frozen=True)
class Line:
    """Straight line through two (index, price) anchors, extended rightwards."""

    anchor1: tuple[int, float]
    anchor2: tuple[int, float]

    @property
    def slope(self) -> float:
        (i1, p1), (i2, p2) = self.anchor1, self.anchor2
        return (p2 - p1) / (i2 - i1)

    @property
    def defined_from(self) -> int:
        return self.anchor1[0]

    def value_at(self, index: int) -> float:
        return line_value_at(self, index)


@dataclass(frozen=True)
class Trendline(Line):
    direction: str = UP
    confirm_index: int = 0


def line_value_at(line: Line, index: int) -> float:
    i1, p1 = line.anchor1
    if index < i1:
        raise ValueError(f"index {index} precedes anchor at {i1}")
    if index == line.anchor2[0]:
        return line.anchor2[1]
    return p1 + line.slope * (index - i1)


@dataclass(frozen=True)
class Level:
    kind: str  # support | resistance
    price: float
    formed_by: tuple[int, ...]
    from_index: int
    confirm_index: int

    @property
    def defined_from(self) -> int:
        return self.from_index

    def value_at(self, index: int) -> float:
        return self.price


@dataclass(frozen=True)
class MovingAverageLine:
    window: int
    values: tuple[float, ...]

    @property
    def defined_from(self) -> int:
        return self.window - 1

    def value_at(self, index: int) -> float:
        if index < self.window - 1:
            raise ValueError(f"moving average undefined before index {self.window - 1}")
        return self.values[index - self.window + 1]


@dataclass(frozen=True)
class Breakout:
    target: object
    direction: str
    cross_index: int
    confirm_index: int
    rule: str  # single_day_pct | cumulative_pct | three_bar


# --------------------------------------------------------------------------
# trendlines


def _more_extreme(a: SwingPoint, b: SwingPoint) -> bool:
    return a.price > b.price if a.kind == TOP else a.price < b.price


def iter_anchor_pairs(swings: Iterable[SwingPoint]) -> Iterator[tuple[SwingPoint, SwingPoint]]:
    """Replay swings in confirmation order and pair each with its predecessor.

    The predecessor is the previous same-kind swing still in the running
    list; a swing that supersedes the last one pairs with the one before it.
    """
    running: list[SwingPoint] = []
    for sp in swings:
        if running and running[-1].kind == sp.kind and _more_extreme(sp, running[-1]):
            running.pop()
        prev = next((p for p in reversed(running) if p.kind == sp.kind), None)
        running.append(sp)
        if prev is not None:
            yield prev, sp


def trendline_from_pair(a: SwingPoint, b: SwingPoint, confirm_lag: int = 3,
                        min_separation: int = 4) -> Trendline | None:
    if b.index - a.index < min_separation:
        return None
    if a.kind == BOTTOM and b.price > a.price:
        direction = UP
    elif a.kind == TOP and b.price < a.price:
        direction = DOWN
    else:
        return None
    return Trendline((a.index, a.price), (b.index, b.price), direction, b.index + confirm_lag)


def fit_trendlines(series: Series, swings: Sequence[SwingPoint], confirm_lag: int = 3) -> list[Trendline]:
    """Up lines through rising consecutive bottoms, down lines through falling tops.

    Anchors must be at least 4 bars apart; a line is established
    ``confirm_lag`` bars after its second anchor and only if the series
    reaches that bar.
    """
    lines = []
    for a, b in iter_anchor_pairs(swings):
        line = trendline_from_pair(a, b, confirm_lag)
        if line is not None and line.confirm_index < len(series):
            lines.append(line)
    lines.sort(key=lambda ln: ln.confirm_index)
    return lines


# --------------------------------------------------------------------------
# horizontal levels


class LevelTracker:
    """Greedy left-to-right grouping of same-kind swings into flat levels.

    A swing joins the open group when every member stays within
    ``flatness_tol`` (relative) of the group mean; otherwise the group is
    closed and a new one starts.  Feed swings in confirmation order.
    """

    def __init__(self, kind: str, flatness_tol: float = 0.01):
        self.swing_kind = TOP if kind == "resistance" else BOTTOM
        self.kind = kind
        self.tol = flatness_tol
        self.group: list[SwingPoint] = []
        self.closed: list[list[SwingPoint]] = []

    def _fits(self, members: list[SwingPoint]) -> bool:
        m = sum(p.price for p in members) / len(members)
        return all(abs(p.price - m) <= self.tol * abs(m) for p in members)

    def feed(self, sp: SwingPoint, replaced: bool = False) -> Level | None:
        """Add a swing; return the Level if this swing completes its second touch."""
        if sp.kind != self.swing_kind:
            return None
        if replaced and self.group:
            self.group.pop()
        candidate = self.group + [sp]
        if self.group and self._fits(candidate):
            self.group = candidate
        else:
            if len(self.group) >= 2:
                self.closed.append(self.group)
            self.group = [sp]
        if len(self.group) == 2:
            return self.make_level(self.group)
        return None

    def make_level(self, members: list[SwingPoint]) -> Level:
        return Level(
            self.kind,
            sum(p.price for p in members) / len(members),
            tuple(p.index for p in members),
            members[0].index,
            max(p.confirm_index for p in members),
        )

    def levels(self) -> list[Level]:
        groups = self.closed + ([self.group] if len(self.group) >= 2 else [])
        return [self.make_level(g) for g in groups]


def detect_levels(series: Series, swings: Sequence[SwingPoint], flatness_tol: float = 0.01) -> list[Level]:
    """Horizontal resistances over consecutive tops and supports over bottoms.

    Level price is the mean of all its touches.
    """
    res = LevelTracker("resistance", flatness_tol)
    sup = LevelTracker("support", flatness_tol)
    for sp in swings:
        res.feed(sp)
        sup.feed(sp)
    return sorted(res.levels() + sup.levels(), key=lambda lv: (lv.from_index, lv.kind))


# --------------------------------------------------------------------------
# breakouts


def detect_breakout(
    series: Series,
    boundary: Boundary,
    watch_from: int,
    direction: str,
    pct: float = 0.03,
    *,
    bars: int = 3,
    three_bar_mode: str = "receding",
    require_cross: bool = False,
    until: int | None = None,
) -> Breakout | None:
    """First confirmed close-based breakout of ``boundary`` at or after ``watch_from``.

    A crossing bar's close lies strictly beyond the boundary.  It confirms on
    the crossing bar when the close is at least ``pct`` beyond; on one of the
    next ``bars - 1`` bars when that close is at least ``pct`` beyond with
    every close since the crossing still beyond; or on the last bar of the
    window when all ``bars`` closes are beyond and (``three_bar_mode ==
    "receding"``) strictly moving away from the boundary.  An attempt whose
    close falls back is void and scanning resumes.

    ``require_cross`` additionally demands that the close before the crossing
    bar was not beyond.  ``until`` caps the confirmation index.
    """
    n = len(series)
    if not 0 <= watch_from < n:
        raise ValueError(f"watch_from {watch_from} outside series of length {n}")
    if direction not in (UP, DOWN):
        raise ValueError(f"bad direction {direction!r}")
    last = n - 1 if until is None else min(n - 1, until)
    closes = series.closes
    sign = 1.0 if direction == UP else -1.0
    start = max(watch_from, boundary.defined_from)

    def excess(i: int) -> tuple[float, float] | None:
        b = boundary.value_at(i)
        if b <= 0:
            return None
        return sign * (closes[i] - b), b

    c = start
    while c <= last:
        ex = excess(c)
        if ex is None:
            return None
        d0, b0 = ex
        if d0 <= 0:
            c += 1
            continue
        if require_cross:
            if c - 1 < boundary.defined_from:
                c += 1
                continue
            prev = excess(c - 1)
            if prev is None or prev[0] > 0:
                c += 1
                continue
        if d0 >= pct * b0 - PCT_EPS:
            return Breakout(boundary, direction, c, c, "single_day_pct")
        dists = [d0]
        for j in range(c + 1, min(c + bars, last + 1)):
            ex = excess(j)
            if ex is None:
                return None
            d, b = ex
            if d <= 0:
                break
            if d >= pct * b - PCT_EPS:
                return Breakout(boundary, direction, c, j, "cumulative_pct")
            dists.append(d)
            if len(dists) == bars:
                receding = all(x < y for x, y in zip(dists, dists[1:]))
                if receding or three_bar_mode == "beyond":
                    return Breakout(boundary, direction, c, j, "three_bar")
        c += 1
    return None


# --------------------------------------------------------------------------
# moving averages


def moving_average(series: Series, n: int) -> list[tuple[int, float]]:
    """Arithmetic mean of the last ``n`` closes, from index ``n - 1`` on."""
    if n < 1:
        raise ValueError("window must be >= 1")
    closes = series.closes
    if n > len(closes):
        return []
    out = []
    for i in range(n - 1, len(closes)):
        window = closes[i - n + 1: i + 1]
        out.append((i, sum(window) / n))
    return out


def ma_line(ma: Sequence[tuple[int, float]]) -> MovingAverageLine:
    window = ma[0][0] + 1
    return MovingAverageLine(window, tuple(v for _, v in ma))


def ma_cross_signal(series: Series, ma: Sequence[tuple[int, float]], spread_bars: int = 3,
                    spread_pct: float = 0.03) -> list[tuple[int, str]]:
    """Buy/sell signals where closes cross the average and the breakout rule confirms."""
    if not ma:
        return []
    boundary = ma_line(ma)
    n = len(series)
    pos = boundary.defined_from + 1
    signals: list[tuple[int, str]] = []
    while pos < n:
        hits = []
        for direction, label in ((UP, "buy"), (DOWN, "sell")):
            br = detect_breakout(series, boundary, pos, direction, spread_pct,
                                 bars=spread_bars, require_cross=True)
            if br is not None:
                hits.append((br.confirm_index, label))
        if not hits:
            break
        hit = min(hits)
        signals.append(hit)
        pos = hit[0] + 1
    return signals
