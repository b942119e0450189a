"""JRDS: joint relay selection and dynamic scheduling.

Flows are admitted into a single running set instead of fixed groups.
Admission happens at slot 0, after every hop completion and whenever the
running set is empty: first a greedy independent set of the waiting
direct flows that do not collide with anything running, then, per waiting
blocked flow in id order, the least-contended candidate relay if it
collides with nothing (ties go to the relay with the shortest two-hop
serial time at the current geometry). Rates are recomputed every slot at the current
geometry.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..channel import solo_rates
from ..contention import build_graph, generate_group, link_conflicts
from ..relay import Flow, build_candidate_set, conflict_counts, path_links
from .common import (
    Activation, FlowProgress, SchedContext, ScheduleResult, failed_outcome, link_rates,
    outcome_from,
)


class _Admission:
    def __init__(self, flows: Sequence[Flow], ctx: SchedContext):
        self.ctx = ctx
        self.direct = [f for f in sorted(flows, key=lambda f: f.id) if not f.blocked]
        self.blocked = [f for f in sorted(flows, key=lambda f: f.id) if f.blocked]
        self.active: dict[int, FlowProgress] = {}
        self.busy: set[int] = set()

    @property
    def waiting(self) -> bool:
        return bool(self.direct or self.blocked)

    def _ongoing(self):
        return [l for p in self.active.values() for l in p.remaining_links]

    def admit(self, t: int) -> list[int]:
        ctx = self.ctx
        state = ctx.state(t)
        ongoing = self._ongoing()
        batch: list[int] = []

        if self.direct:
            links = [path_links(f)[0] for f in self.direct]
            if ongoing:
                hit = link_conflicts(links, ongoing, state, ctx.params, ctx.sigma).any(axis=1)
            else:
                hit = np.zeros(len(links), dtype=bool)
            free = {f.id: (l,) for f, l, h in zip(self.direct, links, hit) if not h}
            if free:
                graph = build_graph(free, state, ctx.sigma, ctx.params)
                chosen = set(generate_group(free, graph.adj))
                for f in self.direct:
                    if f.id in chosen:
                        self.active[f.id] = FlowProgress.start(f, None)
                        ongoing.extend(free[f.id])
                        batch.append(f.id)
                self.direct = [f for f in self.direct if f.id not in chosen]

        admitted = set()
        for f in self.blocked:
            cand = build_candidate_set(f, state, ctx.params, ctx.M, ctx.T, busy=self.busy,
                                       epsilon_threshold=ctx.epsilon_threshold)
            if not cand:
                continue
            relays = cand.combined
            counts = conflict_counts(f, relays, ongoing, state, ctx.params, ctx.sigma)
            k = len(relays)
            with np.errstate(divide="ignore"):
                hop_time = (1.0 / solo_rates([f.src] * k, relays, state, ctx.params)
                            + 1.0 / solo_rates(relays, [f.dst] * k, state, ctx.params))
            c, _, r = min(zip((int(x) for x in counts), hop_time.tolist(), relays))
            if c > 0:
                continue
            prog = FlowProgress.start(f, r)
            self.active[f.id] = prog
            self.busy.add(r)
            ongoing.extend(prog.links)
            admitted.add(f.id)
            batch.append(f.id)
        self.blocked = [f for f in self.blocked if f.id not in admitted]
        return sorted(batch)

    def finish(self, fid: int) -> FlowProgress:
        p = self.active.pop(fid)
        if p.relay is not None:
            self.busy.discard(p.relay)
        return p


def jrds(flows: Sequence[Flow], ctx: SchedContext, rng: np.random.Generator) -> ScheduleResult:
    res = ScheduleResult("jrds", ctx.T, ctx.M, ctx.initial.n_vehicles)
    adm = _Admission(flows, ctx)
    consts = ctx.consts()
    last: dict[int, int] = {}
    t = 0
    event = True
    while t < ctx.M and (adm.active or adm.waiting):
        if event or not adm.active:
            if adm.waiting:
                batch = adm.admit(t)
                if batch:
                    res.groups.append(batch)
            event = False
            if not adm.active:
                break
        progs = list(adm.active.values())
        links = [p.current for p in progs]
        rates = link_rates(links, ctx.state(t), ctx, rng, consts)
        res.add(t, t + 1, [Activation(l, float(r)) for l, r in zip(links, rates)])
        for p, r in zip(progs, rates):
            last[p.flow.id] = t
            if p.deliver(float(r) * ctx.T):
                event = True
                if p.done:
                    adm.finish(p.flow.id)
                    res.outcomes[p.flow.id] = outcome_from(p, t)
        t += 1
    for p in adm.active.values():
        res.outcomes[p.flow.id] = outcome_from(p, last.get(p.flow.id))
    reason = "horizon" if t >= ctx.M else "not-admitted"
    for f in adm.direct + adm.blocked:
        res.outcomes[f.id] = failed_outcome(f, reason)
    return res
