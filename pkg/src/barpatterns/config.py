"""Run configuration and its ``key = value`` text format.

Every tolerance the detectors use lives here so a report header can carry the
complete effective configuration.  The file format is one ``key = value``
pair per line; ``#`` starts a comment; blank lines are ignored.  When a file
contains a ``[config]`` ... ``[end config]`` block (as report headers do),
only that block is read, with any leading ``#`` on its lines removed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class PatternConfig:
    swing_k: int = 3
    breakout_pct: float = 0.03
    breakout_bars: int = 3
    three_bar_mode: str = "receding"  # receding | beyond
    flatness_tol: float = 0.01
    double_tol: float = 0.02
    channel_parallel_tol: float = 0.10
    hs_head_min: float = 0.03
    hs_shoulder_tol: float = 0.05
    max_flag_bars: int = 15
    flag_pole_pct: float = 0.10
    flag_pole_bars: int = 15
    fan_origin_tol: int = 3
    dedupe_overlap: float = 0.80

    def __post_init__(self):
        if self.swing_k < 1:
            raise ValueError("swing_k must be >= 1")
        if self.breakout_bars < 2:
            raise ValueError("breakout_bars must be >= 2")
        if self.three_bar_mode not in ("receding", "beyond"):
            raise ValueError(f"three_bar_mode must be receding or beyond, not {self.three_bar_mode!r}")
        for name in ("breakout_pct", "flatness_tol", "double_tol", "channel_parallel_tol",
                     "hs_head_min", "hs_shoulder_tol", "flag_pole_pct", "dedupe_overlap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[str, ...] = ()
    security_ids: tuple[str, ...] = ()
    patterns: PatternConfig = field(default_factory=PatternConfig)
    entry_price: str = "open"  # open | close (of the bar after confirmation)
    include_end_of_data: bool = True
    mode: str = "independent"  # independent | sequential
    alpha: float = 0.005
    output_format: str = "text"  # text | csv | jsonl
    date_from: str = ""
    date_to: str = ""
    seed: int = 42

    def __post_init__(self):
        if self.entry_price not in ("open", "close"):
            raise ValueError("entry_price must be open or close")
        if self.mode not in ("independent", "sequential"):
            raise ValueError("mode must be independent or sequential")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.output_format not in ("text", "csv", "jsonl"):
            raise ValueError("output_format must be text, csv or jsonl")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(value)
    return repr(value) if isinstance(value, float) else str(value)


def _coerce(raw: str, like):
    if isinstance(like, bool):
        if raw.lower() in ("true", "yes", "1"):
            return True
        if raw.lower() in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, tuple):
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    return raw


def to_pairs(cfg: RunConfig) -> list[tuple[str, str]]:
    pairs = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "patterns":
            pairs.extend((pf.name, _fmt(getattr(value, pf.name))) for pf in fields(value))
        else:
            pairs.append((f.name, _fmt(value)))
    return pairs


def dumps(cfg: RunConfig) -> str:
    return "".join(f"{k} = {v}".rstrip() + "\n" for k, v in to_pairs(cfg))


def _extract_block(text: str) -> str:
    lines = text.splitlines()
    bare = [ln.lstrip("#").strip() for ln in lines]
    if "[config]" not in bare:
        return text
    start = bare.index("[config]")
    end = bare.index("[end config]") if "[end config]" in bare else len(lines)
    return "\n".join(bare[start + 1:end])


def parse_pairs(text: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(_extract_block(text).splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = value
    return out


def apply_overrides(cfg: RunConfig, overrides: dict[str, object]) -> RunConfig:
    """Return ``cfg`` with raw-string or typed overrides applied by key."""
    pattern_names = {f.name for f in fields(PatternConfig)}
    run_names = {f.name for f in fields(RunConfig)} - {"patterns"}
    pat_updates, run_updates = {}, {}
    for key, value in overrides.items():
        if key in pattern_names:
            like = getattr(cfg.patterns, key)
            pat_updates[key] = _coerce(value, like) if isinstance(value, str) else value
        elif key in run_names:
            like = getattr(cfg, key)
            run_updates[key] = _coerce(value, like) if isinstance(value, str) else value
        else:
            raise ValueError(f"unknown config key {key!r}")
    return replace(cfg, patterns=replace(cfg.patterns, **pat_updates), **run_updates)


def loads(text: str, base: RunConfig | None = None) -> RunConfig:
    return apply_overrides(base or RunConfig(), parse_pairs(text))


def load(path) -> RunConfig:
    return loads(Path(path).read_text(encoding="utf-8"))
