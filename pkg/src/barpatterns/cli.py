"""Command-line front end: validate, scan, backtest, gen-fixtures.

Exit codes: 0 success, 1 data or validation failure, 2 I/O or usage failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from datetime import date
from pathlib import Path

from . import config as config_mod
from .backtest import Dropped, Trade, run_backtest
from .config import PatternConfig, RunConfig
from .fixtures import write_fixtures
from .market_data import DataError, Series, load_csv, validate
from .patterns import PatternInstance, scan
from .report import render_backtest, render_plot_data, render_scan, render_trades
from .stats import aggregate_by_pattern, aggregate_by_security

logger = logging.getLogger("barpatterns")

EXIT_OK, EXIT_DATA, EXIT_IO = 0, 1, 2

# RunConfig fields that get a dedicated flag; pattern fields are added generically
_RUN_FLAGS = {
    "entry_price": dict(choices=("open", "close")),
    "mode": dict(choices=("independent", "sequential")),
    "alpha": dict(type=float),
    "output_format": dict(choices=("text", "csv", "jsonl")),
    "date_from": dict(metavar="YYYY-MM-DD"),
    "date_to": dict(metavar="YYYY-MM-DD"),
    "seed": dict(type=int),
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file (a report header works too)")
    p.add_argument("--id", dest="security_ids", action="append",
                   help="security id for the matching input, in order (default: file stem)")
    g = p.add_argument_group("pattern tolerances")
    for f in fields(PatternConfig):
        default = getattr(PatternConfig(), f.name)
        kw = dict(type=type(default)) if not isinstance(default, str) else {}
        if f.name == "three_bar_mode":
            kw = dict(choices=("receding", "beyond"))
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None, **kw)
    r = p.add_argument_group("run options")
    for name, kw in _RUN_FLAGS.items():
        flag = {"output_format": "--format", "date_from": "--from", "date_to": "--to"}.get(
            name, "--" + name.replace("_", "-"))
        r.add_argument(flag, dest=name, default=None, **kw)
    r.add_argument("--exclude-end-of-data", dest="include_end_of_data", action="store_const", const=False,
                   default=None, help="drop trades still open at the last bar from the tables")
    r.add_argument("--workers", type=int, default=1, help="parallel per-security pipelines")


def _effective_config(args) -> RunConfig:
    cfg = config_mod.load(args.config) if args.config else RunConfig()
    overrides = {}
    names = [f.name for f in fields(PatternConfig)] + list(_RUN_FLAGS) + ["include_end_of_data"]
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if args.inputs:
        overrides["inputs"] = tuple(args.inputs)
    if args.security_ids:
        overrides["security_ids"] = tuple(args.security_ids)
    return config_mod.apply_overrides(cfg, overrides)


def _security_id(cfg: RunConfig, i: int, path: str) -> str:
    return cfg.security_ids[i] if i < len(cfg.security_ids) else Path(path).stem


def _in_window(series: Series, inst: PatternInstance, cfg: RunConfig) -> bool:
    d = series.bars[inst.confirm_index].date
    if cfg.date_from and d < date.fromisoformat(cfg.date_from):
        return False
    if cfg.date_to and d > date.fromisoformat(cfg.date_to):
        return False
    return True


def process_file(path: str, security_id: str, cfg: RunConfig, with_trades: bool):
    """Load, scan and (optionally) backtest one file; runs in worker processes."""
    series = load_csv(path, security_id)
    instances = [p for p in scan(series, cfg.patterns) if _in_window(series, p, cfg)]
    trades: list[Trade] = []
    dropped: list[Dropped] = []
    if with_trades:
        trades = run_backtest(series, instances, cfg.patterns, entry_price=cfg.entry_price, mode=cfg.mode,
                              dropped=dropped)
    return series, instances, trades, dropped


def _run_all(cfg: RunConfig, workers: int, with_trades: bool):
    jobs = [(p, _security_id(cfg, i, p), cfg, with_trades) for i, p in enumerate(cfg.inputs)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(process_file, *zip(*jobs)))
    else:
        results = [process_file(*job) for job in jobs]
    return sorted(results, key=lambda r: r[0].security_id)


def cmd_validate(args) -> int:
    status = EXIT_OK
    for path in args.inputs:
        try:
            series = load_csv(path)
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_IO
        except (DataError, UnicodeDecodeError) as exc:
            print(f"{path}: {exc}")
            status = EXIT_DATA
            continue
        for a in validate(series):
            print(f"{path}: index {a.index} ({series.bars[a.index].date}): {a.severity} {a.kind}: {a.message}")
            if a.severity == "error":
                status = EXIT_DATA
    return status


def cmd_scan(args) -> int:
    cfg = _effective_config(args)
    results = _run_all(cfg, args.workers, with_trades=False)
    pairs = [(s, inst) for s, inst, _, _ in results]
    text = render_plot_data(pairs) if args.plot_data else render_scan(pairs, cfg.output_format)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_backtest(args) -> int:
    cfg = _effective_config(args)
    results = _run_all(cfg, args.workers, with_trades=True)
    trades = [t for _, _, ts, _ in results for t in ts]
    dropped = [d for _, _, _, ds in results for d in ds]
    trades.sort(key=lambda t: (t.security_id, t.pattern.sort_key()))
    eod = [t for t in trades if t.closed_by == "end_of_data"]
    counted = trades if cfg.include_end_of_data else [t for t in trades if t.closed_by != "end_of_data"]
    diagnostics = [
        f"instances: {sum(len(inst) for _, inst, _, _ in results)}",
        f"trades: {len(trades)}",
        f"trades closed at end of data: {len(eod)} ({'included' if cfg.include_end_of_data else 'excluded'})",
        f"dropped: {len(dropped)}",
    ]
    diagnostics += [f"  {d.security_id} {d.pattern.kind.name} at {d.pattern.confirm_index}: {d.reason}"
                    for d in dropped]
    sys.stdout.write(render_backtest(cfg, aggregate_by_pattern(counted), aggregate_by_security(counted),
                                     diagnostics))
    if args.trades:
        series_by_id = {s.security_id: s for s, _, _, _ in results}
        Path(args.trades).write_text(render_trades(series_by_id, trades), encoding="utf-8")
    return EXIT_OK


def cmd_gen_fixtures(args) -> int:
    for p in write_fixtures(args.outdir, args.seed, args.count, args.length):
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="barpatterns", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check CSV files for OHLC and ordering problems")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scan", help="list confirmed pattern instances")
    p.add_argument("inputs", nargs="*")
    _add_config_flags(p)
    p.add_argument("--plot-data", action="store_true", help="per-bar CSV with pattern annotations")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("backtest", help="trade every instance and tabulate true/false counts")
    p.add_argument("inputs", nargs="*")
    _add_config_flags(p)
    p.add_argument("--trades", help="also write the per-trade CSV here")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("gen-fixtures", help="write the showcase and a seeded random corpus")
    p.add_argument("outdir")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--length", type=int, default=750)
    p.set_defaults(func=cmd_gen_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as exc:
        # DataError is a ValueError; bad config values land here as well
        print(f"barpatterns: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"barpatterns: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
