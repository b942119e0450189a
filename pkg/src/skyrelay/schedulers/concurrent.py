"""Static-grouping schemes: RCS and the random-relay RR baseline.

Both assign relays up front, build one contention graph, partition it with
the greedy grouping and then let the groups transmit one after another.
Flows left without a relay are retried in a later round once every group
of the current round has finished.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..channel import v2v_range
from ..contention import build_graph, flow_grouping
from ..relay import Flow, SelectionMode, build_candidate_set, path_links, select_relay
from ..scenario import ScenarioState
from .common import FlowProgress, SchedContext, ScheduleResult, failed_outcome, run_group

RelayPicker = Callable[[Flow, ScenarioState, set, np.random.Generator], "int | None"]


def _rcs_pick(ctx: SchedContext) -> RelayPicker:
    def pick(f, state, busy, rng):
        cand = build_candidate_set(f, state, ctx.params, ctx.M, ctx.T, busy=busy,
                                   epsilon_threshold=ctx.epsilon_threshold)
        if not cand:
            return None
        return select_relay(f, cand, SelectionMode.RANDOM, rng)
    return pick


def in_range_vehicles(f: Flow, state: ScenarioState, max_range: float,
                      busy: set | frozenset = frozenset()) -> np.ndarray:
    """Vehicles (no UAVs) within ``max_range`` of both endpoints, endpoints and busy excluded."""
    pos = state.node_positions[: state.n_vehicles]
    road = state.road_length

    def dist_to(node):
        dx = pos[:, 0] - pos[node, 0]
        dx = dx - road * np.floor(dx / road + 0.5)
        return np.hypot(dx, pos[:, 1] - pos[node, 1])

    ok = (dist_to(f.src) <= max_range) & (dist_to(f.dst) <= max_range)
    ok[[f.src, f.dst]] = False
    if busy:
        idx = [b for b in busy if b < state.n_vehicles]
        ok[idx] = False
    return np.flatnonzero(ok)


def _rr_pick(ctx: SchedContext) -> RelayPicker:
    max_range = v2v_range(ctx.params)

    def pick(f, state, busy, rng):
        pool = in_range_vehicles(f, state, max_range, busy)
        if pool.size == 0:
            return None
        return int(pool[int(rng.integers(pool.size))])
    return pick


def grouped_schedule(name: str, flows: Sequence[Flow], ctx: SchedContext,
                     rng: np.random.Generator, pick: RelayPicker) -> ScheduleResult:
    res = ScheduleResult(name, ctx.T, ctx.M, ctx.initial.n_vehicles)
    pending = sorted(flows, key=lambda f: f.id)
    t = 0
    while pending and t < ctx.M:
        state = ctx.state(t)
        busy: set[int] = set()
        chosen: dict[int, int | None] = {}
        for f in pending:
            if not f.blocked:
                chosen[f.id] = None
                continue
            r = pick(f, state, busy, rng)
            if r is not None:
                chosen[f.id] = r
                busy.add(r)
        if not chosen:
            break
        by_id = {f.id: f for f in pending}
        paths = {fid: path_links(by_id[fid], r) for fid, r in chosen.items()}
        graph = build_graph(paths, state, ctx.sigma, ctx.params)
        if res.graph is None:
            res.graph = graph
        for g in flow_grouping(graph):
            res.groups.append(sorted(g))
            if t >= ctx.M:
                for fid in g:
                    res.outcomes[fid] = failed_outcome(by_id[fid], "horizon", chosen[fid])
                continue
            members = [FlowProgress.start(by_id[fid], chosen[fid]) for fid in sorted(g)]
            t = run_group(members, t, ctx, rng, res)
        pending = [f for f in pending if f.id not in chosen]
    for f in pending:
        res.outcomes[f.id] = failed_outcome(f, "no-relay" if t < ctx.M else "horizon")
    return res


def rcs(flows: Sequence[Flow], ctx: SchedContext, rng: np.random.Generator) -> ScheduleResult:
    """Random relay from the candidate set, greedy grouping, groups served in turn."""
    return grouped_schedule("rcs", flows, ctx, rng, _rcs_pick(ctx))


def rr(flows: Sequence[Flow], ctx: SchedContext, rng: np.random.Generator) -> ScheduleResult:
    """Like RCS, but the relay is any vehicle in V2V range of both endpoints."""
    return grouped_schedule("rr", flows, ctx, rng, _rr_pick(ctx))
