"""Serial TDMA baseline: one flow at a time, one hop at a time."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..relay import Flow, SelectionMode, build_candidate_set, select_relay
from .common import (
    Activation, FlowProgress, SchedContext, ScheduleResult, failed_outcome, link_rates,
    outcome_from,
)


def tdma(flows: Sequence[Flow], ctx: SchedContext, rng: np.random.Generator) -> ScheduleResult:
    """Serve flows in id order; blocked flows use a random candidate relay.

    Each slot the lone active link gets its interference-free rate at the
    current geometry. Flows without candidate relays when their turn comes
    are failed and skipped. Stops at the horizon M.
    """
    res = ScheduleResult("tdma", ctx.T, ctx.M, ctx.initial.n_vehicles)
    consts = ctx.consts()
    t = 0
    for f in sorted(flows, key=lambda f: f.id):
        if t >= ctx.M:
            res.outcomes[f.id] = failed_outcome(f, "horizon")
            continue
        relay = None
        if f.blocked:
            cand = build_candidate_set(f, ctx.state(t), ctx.params, ctx.M, ctx.T,
                                       epsilon_threshold=ctx.epsilon_threshold)
            if not cand:
                res.outcomes[f.id] = failed_outcome(f, "no-relay")
                continue
            relay = select_relay(f, cand, SelectionMode.RANDOM, rng)
        prog = FlowProgress.start(f, relay)
        res.groups.append([f.id])
        last = None
        while not prog.done and t < ctx.M:
            link = prog.current
            r = float(link_rates([link], ctx.state(t), ctx, rng, consts)[0])
            res.add(t, t + 1, [Activation(link, r)])
            prog.deliver(r * ctx.T)
            last = t
            t += 1
        res.outcomes[f.id] = outcome_from(prog, last)
    return res
