"""Constraint checker for produced schedules.

Checks, per slot: path exclusivity (a flow is served either directly or
over a relay, never both), pairwise node-role feasibility of co-active
links, one hop per flow per slot, store-and-forward hop order, and the
horizon bound n <= M.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..contention import adjacent
from ..relay import Flow
from .common import ScheduleResult

PATH_EXCLUSIVE = "path-exclusive"   # N_i + N'_i <= 1
NODE_ROLE = "node-role"             # no adjacent pair co-active
ONE_HOP = "one-hop"                 # at most one hop per flow per slot
HOP_ORDER = "hop-order"             # hop 2 only after hop 1
MIXED_PATH = "mixed-path"           # direct and relay hops never co-occur
HORIZON = "horizon"                 # n <= M
DEMAND = "demand"                   # completed flows delivered their demand


@dataclass(frozen=True)
class Violation:
    rule: str
    slot: int | None
    flows: tuple[int, ...]
    message: str


def validate_schedule(result: ScheduleResult, flows: Sequence[Flow],
                      literal_prefix_counts: bool = False) -> list[Violation]:
    """All rule violations of ``result``; an empty list means the schedule is feasible.

    Hop order is checked as precedence: no hop-2 slot before the last hop-1
    slot. With ``literal_prefix_counts`` the raw count form (hop-2 slots
    never outnumber hop-1 slots in any prefix) is checked as well; it
    rejects relay paths whose second hop is simply slower than the first.
    """
    out: list[Violation] = []
    by_id = {f.id: f for f in flows}
    nv = result.n_vehicles

    for fid, o in result.outcomes.items():
        if o.direct + o.relayed > 1:
            out.append(Violation(PATH_EXCLUSIVE, None, (fid,), "flow served twice"))
        if o.completed:
            f = by_id[fid]
            short = [h for h, b in enumerate(o.delivered) if b < f.demand_bits]
            if short:
                out.append(Violation(DEMAND, None, (fid,), f"hops {short} below demand"))

    if result.slots_used > result.M:
        out.append(Violation(HORIZON, None, (), f"n={result.slots_used} exceeds M={result.M}"))

    hop1: dict[int, int] = {}
    hop2: dict[int, int] = {}
    last1: dict[int, int] = {}
    first2: dict[int, int] = {}
    kinds: dict[int, set[str]] = {}
    for seg in result.segments:
        acts = seg.activations
        n = len(seg)
        t = seg.start
        per_flow: dict[int, int] = {}
        for a in acts:
            per_flow[a.flow] = per_flow.get(a.flow, 0) + 1
        for fid, c in per_flow.items():
            if c > 1:
                out.append(Violation(ONE_HOP, t, (fid,), f"{c} hops active in one slot"))
        for i in range(len(acts)):
            for j in range(i + 1, len(acts)):
                la, lb = acts[i].link, acts[j].link
                if la.flow != lb.flow and adjacent(la, lb, nv):
                    out.append(Violation(NODE_ROLE, t, (la.flow, lb.flow),
                                         f"{la} and {lb} share a node role"))
        for a in acts:
            fid = a.flow
            seen = kinds.setdefault(fid, set())
            seen.add("direct" if a.hop == 0 else "relay")
            if len(seen) > 1:
                out.append(Violation(MIXED_PATH, t, (fid,), "direct and relay hops both used"))
            if a.hop == 1:
                hop1[fid] = hop1.get(fid, 0) + n
                last1[fid] = seg.stop - 1
            elif a.hop == 2:
                # counts only grow inside a segment, so checking its end suffices
                if literal_prefix_counts and hop2.get(fid, 0) + n > hop1.get(fid, 0):
                    out.append(Violation(HOP_ORDER, t, (fid,), "hop-2 count exceeds hop-1 count"))
                hop2[fid] = hop2.get(fid, 0) + n
                first2.setdefault(fid, t)
    # store-and-forward: every hop-1 slot precedes the first hop-2 slot
    for fid, t2 in first2.items():
        if last1.get(fid, -1) >= t2:
            out.append(Violation(HOP_ORDER, t2, (fid,), "hop 1 active after hop 2 started"))
    return out
