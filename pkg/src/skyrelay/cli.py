"""Command line entry point: ``sim run``, ``sim sweep`` and ``sim oracle``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, SCHEMES, load_config
from .engine import (
    AXES, ScheduleError, build_run, contention_snapshot, mean_rows, run_replication,
    seed_list, sweep, write_csv, write_graph_csv,
)
from .schedulers.oracle import OracleLimitError


def _csv_list(text: str, cast=str) -> list:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    try:
        return [cast(x) for x in items]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    kw = {}
    if args.sigma is not None:
        kw["sigma"] = args.sigma
    if args.oracle_max_flows is not None:
        kw["oracle_max_flows"] = args.oracle_max_flows
    if args.oracle_max_slots is not None:
        kw["oracle_max_slots"] = args.oracle_max_slots
    if getattr(args, "n_flows", None) is not None:
        kw["n_flows"] = args.n_flows
    return cfg.with_(**kw) if kw else cfg


def _run_one(cfg: RunConfig, seed: int, scheme: str, out: Path, graph_out: Path | None) -> int:
    rep = run_replication(cfg, seed, scheme)
    write_csv([rep], out)
    if graph_out is not None:
        ctx, _, _ = build_run(cfg, seed)
        write_graph_csv(contention_snapshot(rep, ctx), graph_out)
    print(f"{scheme} seed={seed}: slots={rep.slots_used} completed={rep.completed}/"
          f"{rep.n_flows} throughput={rep.throughput_paper_gbps:.4g} Gbps -> {out}")
    if scheme == "oracle" and rep.result is not None:
        info = rep.result.info
        print(f"oracle optimal={info.get('optimal')} lower_bound={info.get('lower_bound')}")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    return _run_one(cfg, args.seed, args.scheme or cfg.scheme, args.out, args.graph_dump)


def cmd_oracle(args) -> int:
    cfg = _load(args)
    return _run_one(cfg, args.seed, "oracle", args.out, args.graph_dump)


def cmd_sweep(args) -> int:
    cfg = _load(args)
    seeds = seed_list(args.seeds, args.seed_base)
    reports = sweep(cfg, args.axis, args.values, seeds, args.schemes, workers=args.workers)
    rows = list(reports)
    if args.means:
        rows += mean_rows(reports, args.axis)
    write_csv(rows, args.out)
    print(f"{len(reports)} runs ({args.axis} x {len(seeds)} seeds x {len(args.schemes)} schemes)"
          f" -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config (defaults when omitted)")
    common.add_argument("--out", type=Path, required=True, help="output CSV")
    common.add_argument("--sigma", type=float, help="override the RI threshold")
    common.add_argument("--oracle-max-flows", type=int)
    common.add_argument("--oracle-max-slots", type=int)

    r = sub.add_parser("run", parents=[common], help="one replication of one scheme")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--scheme", choices=SCHEMES)
    r.add_argument("--n-flows", type=int)
    r.add_argument("--graph-dump", type=Path, help="write contention edges flow_i,flow_j,reason")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive search on a small instance")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--n-flows", type=int)
    o.add_argument("--graph-dump", type=Path)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sweep", parents=[common], help="sweep one axis over seeds and schemes")
    s.add_argument("--axis", choices=AXES, required=True)
    s.add_argument("--values", type=lambda t: _csv_list(t, float), required=True,
                   help="comma separated, e.g. 1e-8,1e-7,1e-6")
    s.add_argument("--schemes", type=_csv_list, default=["tdma", "rr", "rcs", "jrds"])
    s.add_argument("--seeds", type=int, default=30, help="number of seeds")
    s.add_argument("--seed-base", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--means", action="store_true", help="append per-value mean rows")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "schemes", None):
        bad = [x for x in args.schemes if x not in SCHEMES]
        if bad:
            print(f"sim: error: unknown scheme(s) {bad}; choose from {SCHEMES}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ConfigError, OracleLimitError, ScheduleError, OSError) as exc:
        print(f"sim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
