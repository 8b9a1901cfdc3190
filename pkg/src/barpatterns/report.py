"""Rendering of pattern listings, trade dumps and backtest reports.

Column orders are fixed; see README for the exact headers.
"""
from __future__ import annotations

import csv
import io
import json

from . import config as config_mod
from .backtest import Trade
from .config import RunConfig
from .market_data import Series, format_price
from .patterns import PatternInstance, describe_boundary
from .stats import TOTAL, ChiSquareResult, CountRow, kind_homogeneity_test, rows_by_pattern, truth_test

SCAN_COLUMNS = ("security_id", "kind", "direction", "start_index", "confirm_index", "confirm_date",
                "entry_trigger", "invalidation", "invalidation_direction")
TRADE_COLUMNS = ("security_id", "kind", "side", "confirm_index", "entry_index", "entry_date", "entry_price",
                 "exit_index", "exit_date", "exit_price", "closed_by", "verdict")
PLOT_COLUMNS = ("security_id", "index", "date", "open", "high", "low", "close", "annotation")
TABLE_COLUMNS = ("table", "key", "total", "pct_of_total", "cum_pct", "true_count", "true_pct",
                 "false_count", "false_pct")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _jsonl(header, rows) -> str:
    return "".join(json.dumps(dict(zip(header, r)), sort_keys=False) + "\n" for r in rows)


def scan_rows(series: Series, instances: list[PatternInstance]) -> list[tuple]:
    return [
        (series.security_id, p.kind.name, p.direction, p.span[0], p.confirm_index,
         series.bars[p.confirm_index].date.isoformat(), p.entry_trigger,
         describe_boundary(p.invalidation.boundary), p.invalidation.direction)
        for p in instances
    ]


def render_scan(results: list[tuple[Series, list[PatternInstance]]], fmt: str = "text") -> str:
    rows = [r for s, inst in results for r in scan_rows(s, inst)]
    if fmt == "csv":
        return _csv(SCAN_COLUMNS, rows)
    if fmt == "jsonl":
        return _jsonl(SCAN_COLUMNS, rows)
    out = []
    for s, inst in results:
        out.append(f"{s.security_id}: {len(inst)} pattern(s)")
        for r in scan_rows(s, inst):
            out.append(f"  {r[5]}  #{r[4]:<5d} {r[1]:<29s} {r[2]:<8s} {r[6]}")
    return "\n".join(out) + "\n"


def render_plot_data(results: list[tuple[Series, list[PatternInstance]]]) -> str:
    rows = []
    for s, inst in results:
        notes: dict[int, list[str]] = {}
        for p in inst:
            notes.setdefault(p.confirm_index, []).append(p.kind.name)
        for i, b in enumerate(s.bars):
            rows.append((s.security_id, i, b.date.isoformat(), format_price(b.open), format_price(b.high),
                         format_price(b.low), format_price(b.close), ";".join(notes.get(i, []))))
    return _csv(PLOT_COLUMNS, rows)


def render_trades(series_by_id: dict[str, Series], trades: list[Trade]) -> str:
    rows = []
    for t in trades:
        s = series_by_id[t.security_id]
        rows.append((t.security_id, t.kind.name, t.side, t.pattern.confirm_index, t.entry_index,
                     s.bars[t.entry_index].date.isoformat(), format_price(t.entry_price), t.exit_index,
                     s.bars[t.exit_index].date.isoformat(), format_price(t.exit_price), t.closed_by,
                     "true" if t.verdict else "false"))
    return _csv(TRADE_COLUMNS, rows)


def _pct(x: float | None) -> str:
    return "" if x is None else f"{x:.1f}"


def _chi_line(name: str, res: ChiSquareResult | None) -> str:
    if res is None:
        return f"{name}: not computed (too few counts)"
    verdict = "significant" if res.significant else "not significant"
    return (f"{name}: statistic={res.statistic:.4f} df={res.degrees_of_freedom} alpha={res.alpha!r} "
            f"critical={res.critical_value:.4f} p={res.p_value:.4g} -> {verdict}")


def _table_rows(name: str, rows: list[CountRow]) -> list[tuple]:
    return [(name, r.label if r.key != TOTAL else TOTAL, r.total, _pct(r.pct_of_total), _pct(r.cum_pct),
             r.true_count, _pct(r.true_pct), r.false_count, _pct(r.false_pct)) for r in rows]


def top_rows(by_pattern: list[CountRow], count: int = 4) -> list[CountRow]:
    """The ``count`` most frequent kinds re-totalled as their own table."""
    body = [r for r in by_pattern if r.key != TOTAL][:count]
    return rows_by_pattern({r.key: (r.true_count, r.false_count) for r in body})


def chi_square_section(by_pattern: list[CountRow], alpha: float) -> list[tuple[str, ChiSquareResult | None]]:
    total = by_pattern[-1]
    top = top_rows(by_pattern)[-1]
    return [
        ("all patterns, true vs false, equiprobable null", truth_test(total.true_count, total.false_count, alpha)),
        ("four most frequent patterns, true vs false, equiprobable null",
         truth_test(top.true_count, top.false_count, alpha)),
        ("true counts per kind vs pooled true rate (k cells)", kind_homogeneity_test(by_pattern, alpha)),
    ]


def render_backtest(cfg: RunConfig, by_pattern: list[CountRow], by_security: list[CountRow],
                    diagnostics: list[str]) -> str:
    fmt = cfg.output_format
    top = top_rows(by_pattern)
    chi = chi_square_section(by_pattern, cfg.alpha)
    if fmt in ("csv", "jsonl"):
        rows = (_table_rows("by_pattern", by_pattern) + _table_rows("top_patterns", top)
                + _table_rows("by_security", by_security))
        body = _csv(TABLE_COLUMNS, rows) if fmt == "csv" else _jsonl(TABLE_COLUMNS, rows)
        header = "# [config]\n" + "".join(f"# {k} = {v}".rstrip() + "\n" for k, v in config_mod.to_pairs(cfg)) + "# [end config]\n"
        chi_rows = []
        for name, res in chi:
            if res is not None:
                chi_rows.append((name, f"{res.statistic:.6f}", res.degrees_of_freedom, repr(res.alpha),
                                 f"{res.critical_value:.6f}", "true" if res.significant else "false"))
        chi_cols = ("test", "statistic", "df", "alpha", "critical_value", "significant")
        chi_body = _csv(chi_cols, chi_rows) if fmt == "csv" else _jsonl(chi_cols, chi_rows)
        return header + body + chi_body

    out = ["barpatterns backtest report", "", "[config]"]
    out += [f"{k} = {v}".rstrip() for k, v in config_mod.to_pairs(cfg)]
    out += ["[end config]", ""]

    out.append("Results by pattern")
    out.append(f"{'PATTERN':<38s}{'TOTAL':>7s}{'%':>7s}{'% accum.':>10s}{'TRUE':>7s}{'FALSE':>7s}")
    for r in by_pattern:
        name = TOTAL if r.key == TOTAL else r.label
        out.append(f"{name:<38s}{r.total:>7d}{_pct(r.pct_of_total):>7s}{_pct(r.cum_pct):>10s}"
                   f"{r.true_count:>7d}{r.false_count:>7d}")
    t = by_pattern[-1]
    out.append(f"{'':<38s}{'':>7s}{_pct(t.pct_of_total):>7s}{'':>10s}{_pct(t.true_pct):>7s}{_pct(t.false_pct):>7s}")
    out.append("")

    out.append("Most frequent patterns")
    out.append(f"{'PATTERN':<38s}{'TOTAL':>7s}{'TRUE':>7s}{'%':>7s}{'FALSE':>7s}{'%':>7s}")
    for r in top:
        name = TOTAL if r.key == TOTAL else r.label
        out.append(f"{name:<38s}{r.total:>7d}{r.true_count:>7d}{_pct(r.true_pct):>7s}"
                   f"{r.false_count:>7d}{_pct(r.false_pct):>7s}")
    out.append("")

    out.append("Results by security")
    out.append(f"{'SECURITY':<24s}{'TRUE':>7s}{'%':>7s}{'FALSE':>7s}{'%':>7s}{'TOTAL':>7s}")
    for r in by_security:
        name = TOTAL if r.key == TOTAL else str(r.key)
        out.append(f"{name:<24s}{r.true_count:>7d}{_pct(r.true_pct):>7s}{r.false_count:>7d}"
                   f"{_pct(r.false_pct):>7s}{r.total:>7d}")
    out.append("")

    out.append("Chi-square")
    out += [_chi_line(name, res) for name, res in chi]
    out.append("")

    out.append("Diagnostics")
    out += diagnostics or ["none"]
    return "\n".join(out) + "\n"
