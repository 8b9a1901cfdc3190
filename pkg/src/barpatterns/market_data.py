"""OHLC bar series: CSV ingestion, serialization and validation."""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import date
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable

HEADER = ("date", "open", "high", "low", "close", "volume")

_DECIMAL_RE = re.compile(r"^[+-]?\d+(\.\d{1,6})?$")


class DataError(ValueError):
    """Raised for unparsable or invariant-breaking CSV input.

    ``row`` is the 1-based line number in the file (the header is line 1).
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Bar:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: int | None = None

    def ohlc_ok(self) -> bool:
        return self.low <= min(self.open, self.close) and self.high >= max(self.open, self.close)


@dataclass(frozen=True)
class Series:
    security_id: str
    bars: tuple[Bar, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.bars, tuple):
            object.__setattr__(self, "bars", tuple(self.bars))

    def __len__(self) -> int:
        return len(self.bars)

    def __getitem__(self, index):
        return self.bars[index]

    @cached_property
    def opens(self) -> tuple[float, ...]:
        return tuple(b.open for b in self.bars)

    @cached_property
    def highs(self) -> tuple[float, ...]:
        return tuple(b.high for b in self.bars)

    @cached_property
    def lows(self) -> tuple[float, ...]:
        return tuple(b.low for b in self.bars)

    @cached_property
    def closes(self) -> tuple[float, ...]:
        return tuple(b.close for b in self.bars)

    def truncated(self, length: int) -> Series:
        return Series(self.security_id, self.bars[:length])


@dataclass(frozen=True)
class Anomaly:
    index: int
    kind: str  # OHLC | NONPOSITIVE | ORDER | ZERO_VOLUME | NEGATIVE_VOLUME
    severity: str  # error | warning
    message: str


def _price(text: str, name: str, row: int) -> float:
    text = text.strip()
    if not _DECIMAL_RE.match(text):
        raise DataError(f"unparsable {name} {text!r}", row)
    return float(text)


def _parse_row(fields: list[str], row: int) -> Bar:
    if len(fields) != len(HEADER):
        raise DataError(f"expected {len(HEADER)} fields, got {len(fields)}", row)
    try:
        day = date.fromisoformat(fields[0].strip())
    except ValueError:
        raise DataError(f"unparsable date {fields[0]!r}", row) from None
    o, h, l, c = (_price(fields[i], HEADER[i], row) for i in range(1, 5))
    vol_text = fields[5].strip()
    volume = None
    if vol_text:
        if not vol_text.isdigit():
            raise DataError(f"unparsable volume {vol_text!r}", row)
        volume = int(vol_text)
    bar = Bar(day, o, h, l, c, volume)
    if not bar.ohlc_ok() or h < l:
        raise DataError(f"OHLC violation (open={o}, high={h}, low={l}, close={c})", row)
    if l <= 0:
        raise DataError(f"non-positive low {l}", row)
    return bar


def parse_csv(stream: IO[bytes] | IO[str] | bytes | str, security_id: str = "") -> Series:
    """Parse ``date,open,high,low,close,volume`` rows into a validated Series.

    Raises DataError naming the offending row for malformed fields, OHLC
    violations and non-increasing dates.
    """
    if isinstance(stream, bytes):
        text = stream.decode("utf-8")
    elif isinstance(stream, str):
        text = stream
    else:
        raw = stream.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    reader = csv.reader(io.StringIO(text))
    bars: list[Bar] = []
    for lineno, fields in enumerate(reader, start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if lineno == 1 and fields[0].strip().lower() == "date":
            if tuple(f.strip().lower() for f in fields) != HEADER:
                raise DataError(f"bad header {','.join(fields)!r}", lineno)
            continue
        bar = _parse_row(fields, lineno)
        if bars and bar.date <= bars[-1].date:
            raise DataError(
                f"non-monotonic dates: {bars[-1].date.isoformat()} followed by {bar.date.isoformat()}",
                lineno,
            )
        bars.append(bar)
    return Series(security_id, tuple(bars))


def load_csv(path, security_id: str | None = None) -> Series:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_csv(fh, security_id if security_id is not None else path.stem)


def format_price(value: float) -> str:
    text = f"{value:.6f}".rstrip("0")
    return text + "0" if text.endswith(".") else text


def to_csv(series: Series) -> str:
    lines = [",".join(HEADER)]
    for b in series.bars:
        vol = "" if b.volume is None else str(b.volume)
        lines.append(
            ",".join(
                [b.date.isoformat(), format_price(b.open), format_price(b.high),
                 format_price(b.low), format_price(b.close), vol]
            )
        )
    return "\n".join(lines) + "\n"


def validate(series: Series) -> list[Anomaly]:
    """Report every invariant breach; never raises and never mutates."""
    report: list[Anomaly] = []
    prev: Bar | None = None
    for i, b in enumerate(series.bars):
        if not b.ohlc_ok() or b.high < b.low:
            report.append(Anomaly(i, "OHLC", "error",
                                  f"open={b.open} high={b.high} low={b.low} close={b.close}"))
        if min(b.low, b.open, b.high, b.close) <= 0:
            report.append(Anomaly(i, "NONPOSITIVE", "error", "prices must be strictly positive"))
        if prev is not None and b.date <= prev.date:
            report.append(Anomaly(i, "ORDER", "error",
                                  f"{prev.date.isoformat()} followed by {b.date.isoformat()}"))
        if b.volume is not None:
            if b.volume < 0:
                report.append(Anomaly(i, "NEGATIVE_VOLUME", "error", f"volume={b.volume}"))
            elif b.volume == 0:
                report.append(Anomaly(i, "ZERO_VOLUME", "warning", "zero volume"))
        prev = b
    return report


def has_errors(report: Iterable[Anomaly]) -> bool:
    return any(a.severity == "error" for a in report)
