"""Replications, parameter sweeps, metrics and CSV output."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .channel import v2v_range
from .config import ConfigError, MobilityConfig, RunConfig
from .relay import Flow, make_flow
from .scenario import ScenarioState, Timeline, scenario_from_config
from .schedulers import SCHEMES, SchedContext, ScheduleResult, validate_schedule

CSV_HEADER = (
    "seed", "scheme", "n_flows", "sigma", "mobility", "vbar_kmh", "low_speed_pct",
    "slots_used", "completed", "failed", "throughput_paper_gbps",
    "throughput_delivered_gbps", "num_groups", "wall_ms",
)
AXES = ("sigma", "n_flows", "speed", "low_speed_pct")


class ScheduleError(RuntimeError):
    """A scheme produced a schedule that breaks a feasibility rule."""


def seed_list(count: int, base: int = 0) -> list[int]:
    return list(range(base, base + count))


def generate_flows(state: ScenarioState, n: int, demand_gbps: tuple[float, float],
                   rng: np.random.Generator, M: int, T: float, max_range: float,
                   corridor_half_width: float = 1.0) -> list[Flow]:
    """``n`` flows over distinct ordered vehicle pairs within ``max_range`` of each other.

    Flow sets are nested: for a fixed RNG state the ``n``-flow list is a
    prefix of any longer list, so sweeps over ``n`` compare like with like.
    """
    nv = state.n_vehicles
    if nv < 2:
        raise ConfigError("need at least two vehicles to draw flows")
    pos = state.node_positions[:nv]
    dx = pos[:, None, 0] - pos[None, :, 0]
    dx -= state.road_length * np.floor(dx / state.road_length + 0.5)
    d = np.hypot(dx, pos[:, None, 1] - pos[None, :, 1])
    np.fill_diagonal(d, np.inf)
    src, dst = np.nonzero(d <= max_range)
    if src.size < n:
        raise ConfigError(f"only {src.size} vehicle pairs within range, {n} flows requested")
    pick = rng.permutation(src.size)[:n]
    lo, hi = demand_gbps
    q = rng.uniform(lo, hi, size=n) * 1e9
    return [make_flow(i, int(src[k]), int(dst[k]), float(q[i]), M, T, state, corridor_half_width)
            for i, k in enumerate(pick)]


@dataclass
class RunReport:
    seed: int
    scheme: str
    n_flows: int
    sigma: float
    mobility: str
    vbar_kmh: float
    low_speed_pct: float
    slots_used: int
    completed: int
    failed: int
    throughput_paper_gbps: float
    throughput_delivered_gbps: float
    num_groups: int
    wall_ms: float = field(default=0.0, compare=False)
    result: ScheduleResult | None = field(default=None, compare=False, repr=False)
    flows: list[Flow] = field(default_factory=list, compare=False, repr=False)

    def row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_HEADER}


def throughputs(result: ScheduleResult, flows: Sequence[Flow]) -> tuple[float, float]:
    """(rate-sum, delivered) throughput in Gbps; failed flows count for nothing.

    The rate-sum figure divides the summed demand rates of completed
    flows by the schedule duration n*T; the delivered figure divides the
    completed demand bits by the same duration.
    """
    n = result.slots_used
    if n == 0:
        return 0.0, 0.0
    done = set(result.completed)
    q = sum(f.demand_rate for f in flows if f.id in done) / 1e9
    bits = sum(f.demand_bits for f in flows if f.id in done) / 1e9
    dur = n * result.T
    return q / dur, bits / dur


def build_run(cfg: RunConfig, seed: int):
    """Scenario timeline, scheme context, flows and the scheme's RNG for one replication."""
    s_scen, s_flow, s_sched = np.random.SeedSequence(seed).spawn(3)
    state = scenario_from_config(cfg.scenario, s_scen, cfg.channel.pu)
    ctx = SchedContext(Timeline(state, cfg.T), cfg.channel, cfg.M, cfg.T, cfg.sigma,
                       cfg.epsilon_threshold)
    flows = generate_flows(state, cfg.n_flows, cfg.demand_gbps, np.random.default_rng(s_flow),
                           cfg.M, cfg.T, v2v_range(cfg.channel), cfg.corridor_half_width)
    return ctx, flows, np.random.default_rng(s_sched)


def run_scheme(name: str, flows, ctx: SchedContext, rng, cfg: RunConfig) -> ScheduleResult:
    if name not in SCHEMES:
        raise ConfigError(f"unknown scheme {name!r}")
    if name == "oracle":
        from .schedulers.oracle import oracle
        return oracle(flows, ctx, max_flows=cfg.oracle_max_flows, max_slots=cfg.oracle_max_slots)
    return SCHEMES[name](flows, ctx, rng)


def run_replication(cfg: RunConfig, seed: int, scheme: str | None = None) -> RunReport:
    name = scheme or cfg.scheme
    t0 = time.perf_counter()
    ctx, flows, rng = build_run(cfg, seed)
    result = run_scheme(name, flows, ctx, rng, cfg)
    wall = (time.perf_counter() - t0) * 1e3
    bad = validate_schedule(result, flows)
    if bad:
        raise ScheduleError(f"{name} seed {seed}: {len(bad)} violations, first: {bad[0]}")
    tp, td = throughputs(result, flows)
    mob = cfg.scenario.mobility
    return RunReport(
        seed=seed, scheme=name, n_flows=cfg.n_flows, sigma=cfg.sigma, mobility=mob.kind,
        vbar_kmh=mob.mean_speed_kmh,
        low_speed_pct=100.0 * mob.p_low if mob.kind == "IPP" else 0.0,
        slots_used=result.slots_used, completed=len(result.completed),
        failed=len(result.failed), throughput_paper_gbps=tp, throughput_delivered_gbps=td,
        num_groups=result.num_groups, wall_ms=wall, result=result, flows=flows,
    )


def apply_axis(cfg: RunConfig, axis: str, value: float) -> RunConfig:
    if axis == "sigma":
        return cfg.with_(sigma=float(value))
    if axis == "n_flows":
        return cfg.with_(n_flows=int(value))
    if axis == "speed":
        return cfg.with_scenario(mobility=MobilityConfig("PP", vbar_kmh=float(value)))
    if axis == "low_speed_pct":
        m = cfg.scenario.mobility
        return cfg.with_scenario(mobility=MobilityConfig(
            "IPP", v1_kmh=m.v1_kmh, v2_kmh=m.v2_kmh, p_low=float(value) / 100.0))
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {AXES}")


def _job(args):
    cfg, seed, scheme = args
    r = run_replication(cfg, seed, scheme)
    r.result = None
    r.flows = []
    return r


def sweep(cfg: RunConfig, axis: str, values: Sequence[float], seeds: Iterable[int],
          schemes: Sequence[str], workers: int = 1) -> list[RunReport]:
    """One replication per (value, seed, scheme), in that nesting order."""
    if not values:
        raise ConfigError("sweep needs at least one value")
    jobs = [(apply_axis(cfg, axis, v), s, sch) for v in values for s in seeds for sch in schemes]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(_job, jobs))
    return [_job(j) for j in jobs]


def mean_rows(reports: Sequence[RunReport], axis: str) -> list[dict]:
    """Per-(axis value, scheme) means, seed column set to ``mean``."""
    key_attr = {"sigma": "sigma", "n_flows": "n_flows", "speed": "vbar_kmh",
                "low_speed_pct": "low_speed_pct"}[axis]
    groups: dict[tuple, list[RunReport]] = {}
    for r in reports:
        groups.setdefault((getattr(r, key_attr), r.scheme), []).append(r)
    rows = []
    numeric = ("slots_used", "completed", "failed", "throughput_paper_gbps",
               "throughput_delivered_gbps", "num_groups", "wall_ms")
    for (_, scheme), rs in groups.items():
        row = rs[0].row()
        row["seed"] = "mean"
        for k in numeric:
            row[k] = float(np.mean([getattr(r, k) for r in rs]))
        rows.append(row)
    return rows


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def write_csv(rows: Iterable[RunReport | dict], path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for r in rows:
                d = r.row() if isinstance(r, RunReport) else r
                w.writerow([_fmt(d[k]) for k in CSV_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def with_fading(cfg: RunConfig, mode: str) -> RunConfig:
    return replace(cfg, channel=replace(cfg.channel, fading_mode=mode))


def contention_snapshot(report: RunReport, ctx: SchedContext):
    """The scheme's contention graph, or one rebuilt at slot 0 from the final relay choices."""
    from .contention import build_graph
    from .relay import path_links

    res = report.result
    if res is not None and res.graph is not None:
        return res.graph
    paths = {}
    for f in report.flows:
        out = res.outcomes.get(f.id) if res is not None else None
        relay = out.relay if out is not None else None
        if f.blocked and relay is None:
            continue
        paths[f.id] = path_links(f, relay)
    return build_graph(paths, ctx.initial, ctx.sigma, ctx.params)


def write_graph_csv(graph, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("flow_i", "flow_j", "reason"))
        w.writerows(graph.edge_rows())
