"""Schedule data model and shared transmission machinery.

A schedule is stored as a list of :class:`Segment` objects: maximal runs of
consecutive slots in which the same links are active at the same rates.
Per-slot :class:`SlotRecord` views are expanded on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ..channel import Link, active_sinrs, kernel_consts, rate
from ..config import ChannelParams
from ..contention import ContentionGraph
from ..relay import Flow, path_links
from ..scenario import ScenarioState, Timeline


@dataclass(frozen=True)
class Activation:
    link: Link
    rate: float  # bits/s

    @property
    def flow(self) -> int:
        return self.link.flow

    @property
    def hop(self) -> int:
        return self.link.hop


@dataclass(frozen=True)
class SlotRecord:
    t: int
    activations: tuple[Activation, ...]
    T: float

    def bits(self, a: Activation) -> float:
        return a.rate * self.T


@dataclass(frozen=True)
class Segment:
    """Slots ``start .. stop-1`` all carry ``activations``."""

    start: int
    stop: int
    activations: tuple[Activation, ...]

    def __len__(self):
        return self.stop - self.start


@dataclass
class FlowOutcome:
    flow: int
    relay: int | None = None
    completed: bool = False
    completion_slot: int | None = None  # last slot that carried bits for the flow
    delivered: list[float] = field(default_factory=list)  # bits per hop
    reason: str = ""

    @property
    def direct(self) -> int:
        """N_i: served over the direct path."""
        return int(self.completed and self.relay is None)

    @property
    def relayed(self) -> int:
        """N'_i: served over a relay path."""
        return int(self.completed and self.relay is not None)


@dataclass
class ScheduleResult:
    scheme: str
    T: float
    M: int
    n_vehicles: int
    segments: list[Segment] = field(default_factory=list)
    outcomes: dict[int, FlowOutcome] = field(default_factory=dict)
    groups: list[list[int]] = field(default_factory=list)
    graph: ContentionGraph | None = None
    info: dict = field(default_factory=dict)

    @property
    def slots_used(self) -> int:
        return max((s.stop for s in self.segments), default=0)

    @property
    def objective(self) -> float:
        """delta = n * T seconds."""
        return self.slots_used * self.T

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def completed(self) -> list[int]:
        return sorted(f for f, o in self.outcomes.items() if o.completed)

    @property
    def failed(self) -> list[int]:
        return sorted(f for f, o in self.outcomes.items() if not o.completed)

    def slot_records(self) -> Iterator[SlotRecord]:
        for seg in self.segments:
            for t in range(seg.start, seg.stop):
                yield SlotRecord(t, seg.activations, self.T)

    def add(self, start: int, stop: int, activations: Sequence[Activation]) -> None:
        if stop <= start:
            return
        acts = tuple(activations)
        if self.segments and self.segments[-1].start > start:
            raise ValueError("segments must be appended in time order")
        self.segments.append(Segment(start, stop, acts))


@dataclass(frozen=True)
class SchedContext:
    """Everything a scheme needs besides the flow list and its RNG."""

    timeline: Timeline
    params: ChannelParams
    M: int
    T: float
    sigma: float
    epsilon_threshold: float = 0.5

    @property
    def initial(self) -> ScenarioState:
        return self.timeline.initial

    def state(self, t: int) -> ScenarioState:
        return self.timeline.at(t)

    def consts(self) -> np.ndarray:
        return kernel_consts(self.params, self.initial.road_length)


def quantum_slots(remaining: float, quantum: float) -> int:
    """Smallest s >= 1 with s * quantum >= remaining."""
    if quantum <= 0:
        return math.inf
    s = max(1, math.ceil(remaining / quantum))
    while s > 1 and (s - 1) * quantum >= remaining:
        s -= 1
    while s * quantum < remaining:
        s += 1
    return s


def link_rates(links: Sequence[Link], state: ScenarioState, ctx: SchedContext,
               rng: np.random.Generator | None, consts=None) -> np.ndarray:
    if not links:
        return np.zeros(0)
    s = active_sinrs(links, state, ctx.params, rng, consts if consts is not None else ctx.consts())
    return np.asarray(rate(s, ctx.params), dtype=float).reshape(-1)


@dataclass
class FlowProgress:
    """Transmission state of one admitted flow."""

    flow: Flow
    relay: int | None
    links: tuple[Link, ...]
    hop_idx: int = 0
    bits: float = 0.0
    delivered: list[float] = field(default_factory=list)

    @classmethod
    def start(cls, flow: Flow, relay: int | None) -> "FlowProgress":
        links = path_links(flow, relay)
        return cls(flow, relay, links, delivered=[0.0] * len(links))

    @property
    def current(self) -> Link:
        return self.links[self.hop_idx]

    @property
    def remaining_links(self) -> tuple[Link, ...]:
        return self.links[self.hop_idx:]

    @property
    def done(self) -> bool:
        return self.hop_idx >= len(self.links)

    def deliver(self, bits: float) -> bool:
        """Add one slot of bits to the current hop; True when the hop completes."""
        self.bits += bits
        if self.bits >= self.flow.demand_bits:
            self.delivered[self.hop_idx] = self.flow.demand_bits
            self.hop_idx += 1
            self.bits = 0.0
            return True
        self.delivered[self.hop_idx] = self.bits
        return False


def outcome_from(progress: FlowProgress, last_slot: int | None) -> FlowOutcome:
    return FlowOutcome(
        flow=progress.flow.id,
        relay=progress.relay,
        completed=progress.done,
        completion_slot=last_slot if progress.done else None,
        delivered=list(progress.delivered),
        reason="" if progress.done else "horizon",
    )


def run_group(members: Sequence[FlowProgress], t0: int, ctx: SchedContext,
              rng: np.random.Generator | None, result: ScheduleResult,
              horizon: int | None = None) -> int:
    """Concurrent transmission of one group with event-driven rate updates.

    All members' current hops transmit together. Rates are computed at the
    group start and again whenever some hop completes; between events they
    are held, so a run of slots is emitted as one segment. Returns the first
    slot after the group finished (or the horizon).
    """
    horizon = ctx.M if horizon is None else horizon
    consts = ctx.consts()
    live = [p for p in members if not p.done]
    last: dict[int, int] = {}
    t = t0
    while live and t < horizon:
        links = [p.current for p in live]
        rates = link_rates(links, ctx.state(t), ctx, rng, consts)
        quanta = rates * ctx.T
        need = [quantum_slots(p.flow.demand_bits - p.bits, q) for p, q in zip(live, quanta)]
        step = min(min(need), horizon - t)
        result.add(t, t + step, [Activation(l, float(r)) for l, r in zip(links, rates)])
        for p, q, n in zip(live, quanta, need):
            if n == step:
                p.bits = p.flow.demand_bits
                p.deliver(0.0)
            else:
                p.bits += step * q
                p.delivered[p.hop_idx] = p.bits
            last[p.flow.id] = t + step - 1
        t += step
        live = [p for p in live if not p.done]
    for p in members:
        result.outcomes[p.flow.id] = outcome_from(p, last.get(p.flow.id))
    return t


def failed_outcome(flow: Flow, reason: str, relay: int | None = None) -> FlowOutcome:
    n_hops = flow.h_max
    return FlowOutcome(flow.id, relay, False, None, [0.0] * n_hops, reason)
