"""Candidate relay sets for blocked flows and relay selection policies."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import Link, rate, solo_sinr
from .config import ChannelParams
from .contention import link_conflicts
from .scenario import BlockageCase, ScenarioState, classify_blockage, wrap

EPSILON_THRESHOLD = 0.5


@dataclass(frozen=True)
class Flow:
    """Traffic demand between two vehicles over the whole horizon of M slots."""

    id: int
    src: int
    dst: int
    demand_rate: float  # bits/s
    demand_bits: float  # demand_rate * M * T
    blockage: BlockageCase = BlockageCase.DIRECT
    blocker: int | None = None

    @property
    def blocked(self) -> bool:
        return self.blockage.blocked

    @property
    def h_max(self) -> int:
        return 2 if self.blocked else 1


def make_flow(fid: int, src: int, dst: int, demand_rate: float, M: int, T: float,
              state: ScenarioState, corridor_half_width: float = 1.0) -> Flow:
    b = classify_blockage(src, dst, state, corridor_half_width)
    return Flow(fid, src, dst, demand_rate, demand_rate * M * T, b.case, b.blocker)


def path_links(flow: Flow, relay: int | None = None) -> tuple[Link, ...]:
    """Hop links of the flow: one direct hop, or source->relay and relay->destination."""
    if relay is None:
        if flow.blocked:
            raise ValueError(f"flow {flow.id} is blocked and needs a relay")
        return (Link(flow.id, 0, flow.src, flow.dst),)
    if relay in (flow.src, flow.dst):
        raise ValueError("relay must differ from the flow endpoints")
    return (Link(flow.id, 1, flow.src, relay), Link(flow.id, 2, relay, flow.dst))


def estimate_slots(flow: Flow, interference_free_rate: float, M: int, T: float) -> int | None:
    """Slots needed at the interference-free rate; None when the rate is zero."""
    if interference_free_rate <= 0:
        return None
    ratio = (flow.demand_rate * M * T) / (interference_free_rate * T)
    return math.ceil(round(ratio, 9))


def direct_rate(flow: Flow, state: ScenarioState, params: ChannelParams) -> float:
    """Deterministic interference-free rate of the flow's own src->dst link."""
    return rate(solo_sinr(flow.src, flow.dst, state, params), params)


@dataclass(frozen=True)
class IdealPath:
    """Road segment [start, start + length] on ``lane`` (ring coordinates)."""

    lane: int
    start: float
    length: float


def ideal_path(flow: Flow, state: ScenarioState, xi: int, T: float,
               lane: int | None = None) -> IdealPath:
    """Predicted path of the ideal relay over the flow's estimated duration.

    Case1 runs along the middle lane from the midpoint of the pair and has
    the mean endpoint displacement as length. Case2 (and the UAV coverage
    check of Case3) spans the pair distance plus the receiver displacement,
    anchored at the trailing vehicle of the pair.
    """
    if flow.blockage in (BlockageCase.DIRECT,):
        raise ValueError("ideal path is defined for blocked flows only")
    road = state.road_length
    xs, xr = float(state.x[flow.src]), float(state.x[flow.dst])
    vs, vr = float(state.speed[flow.src]), float(state.speed[flow.dst])
    d = float(wrap(xr - xs, road))
    dur = xi * T
    ls, ld = int(state.lane[flow.src]), int(state.lane[flow.dst])
    if flow.blockage is BlockageCase.CASE1:
        length = 0.5 * (vs * dur + vr * dur)
        start = float(np.mod(xs + d / 2.0, road))
        return IdealPath((ls + ld) // 2 if lane is None else lane, start, length)
    length = abs(d) + vr * dur
    start = xs if d >= 0 else xr
    if lane is None:
        lane = ls
    return IdealPath(lane, float(start), length)


def overlap_ratio(candidate_x: float, candidate_speed: float, ideal: IdealPath, xi: int, T: float,
                  road_length: float) -> float:
    """Fraction of the candidate's own predicted path that lies on the ideal path."""
    own = candidate_speed * xi * T
    if own <= 0:
        return 0.0
    rel = float(wrap(candidate_x - ideal.start, road_length))
    inter = min(rel + own, ideal.length) - max(rel, 0.0)
    return float(min(max(inter / own, 0.0), 1.0))


def _overlap_many(xs: np.ndarray, speeds: np.ndarray, ideal: IdealPath, xi: int, T: float,
                  road_length: float) -> np.ndarray:
    own = speeds * xi * T
    rel = wrap(xs - ideal.start, road_length)
    inter = np.minimum(rel + own, ideal.length) - np.maximum(rel, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.where(own > 0, inter / own, 0.0)
    return np.clip(eps, 0.0, 1.0)


def uavs_covering(path: IdealPath, state: ScenarioState, xi: int, T: float,
                  exclude: frozenset = frozenset()) -> list[int]:
    """UAV node ids whose coverage disk holds the whole path at every slot offset 0..xi."""
    if state.n_uavs == 0:
        return []
    road = state.road_length
    y = float(state.layout.lane_centers[path.lane])
    radius = state.coverage_radius
    if path.length > 2 * radius:
        return []
    ends = np.array([path.start, path.start + path.length])
    offsets = np.arange(xi + 1) * T
    out = []
    for k in range(state.n_uavs):
        node = state.n_vehicles + k
        if node in exclude:
            continue
        cx, cy = state.uav_center[k]
        r = state.uav_orbit_radius[k]
        # quick reject: path endpoints farther than radius + orbit from the orbit centre
        dcx = wrap(ends - cx, road)
        if np.any(np.hypot(dcx, y - cy) > radius + r):
            continue
        omega = state.uav_speed[k] / r if r > 0 else 0.0
        ph = state.uav_phase[k] + omega * offsets
        ux = cx + r * np.cos(ph)
        uy = cy + r * np.sin(ph)
        ok = True
        for e in ends:
            dx = wrap(e - ux, road)
            if np.any(dx * dx + (y - uy) ** 2 > radius * radius):
                ok = False
                break
        if ok:
            out.append(node)
    return out


@dataclass(frozen=True)
class CandidateRelaySet:
    flow: int
    vehicle_relays: tuple[int, ...]
    uav_relays: tuple[int, ...]
    epsilon: Mapping[int, float] = field(default_factory=dict)
    xi: int | None = None

    @property
    def combined(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.vehicle_relays) | set(self.uav_relays)))

    def __len__(self):
        return len(self.combined)

    def __bool__(self):
        return bool(self.vehicle_relays or self.uav_relays)


def build_candidate_set(flow: Flow, state: ScenarioState, params: ChannelParams, M: int, T: float,
                        busy: frozenset | set = frozenset(),
                        epsilon_threshold: float = EPSILON_THRESHOLD) -> CandidateRelaySet:
    """Vehicle relays passing the overlap filter plus UAVs covering the ideal path.

    Endpoints and nodes in ``busy`` are never candidates. An empty result
    means the flow cannot be served at this slot.
    """
    if not flow.blocked:
        raise ValueError("candidate relays are only built for blocked flows")
    exclude = frozenset(busy) | {flow.src, flow.dst}
    xi = estimate_slots(flow, direct_rate(flow, state, params), M, T)
    if xi is None:
        return CandidateRelaySet(flow.id, (), (), {}, None)

    eps: dict[int, float] = {}
    if flow.blockage is BlockageCase.CASE3:
        vehicles = () if flow.blocker in exclude else (flow.blocker,)
        if vehicles:
            eps[flow.blocker] = 1.0
        path = ideal_path(flow, state, xi, T)
    else:
        if flow.blockage is BlockageCase.CASE1:
            lanes = [(int(state.lane[flow.src]) + int(state.lane[flow.dst])) // 2]
        else:
            ls = int(state.lane[flow.src])
            lanes = [l for l in (ls - 1, ls + 1) if 0 <= l < state.layout.num_lanes]
        best = None
        for lane in lanes:
            path_l = ideal_path(flow, state, xi, T, lane=lane)
            members = np.array([m for m in state.lane_members[lane] if int(m) not in exclude],
                               dtype=np.intp)
            e = _overlap_many(state.x[members], state.speed[members], path_l, xi, T,
                              state.road_length)
            keep = e >= epsilon_threshold
            chosen = members[keep]
            if best is None or chosen.size > best[1].size:
                best = (path_l, chosen, e[keep])
        path, chosen, e_kept = best
        vehicles = tuple(int(v) for v in chosen)
        eps.update({int(v): float(x) for v, x in zip(chosen, e_kept)})
    uavs = tuple(uavs_covering(path, state, xi, T, exclude))
    return CandidateRelaySet(flow.id, tuple(sorted(vehicles)), uavs, eps, xi)


class SelectionMode(enum.Enum):
    RANDOM = "random"
    MIN_DEGREE = "min_degree"


def conflict_counts(flow: Flow, relays: Sequence[int], ongoing: Sequence[Link],
                    state: ScenarioState, params: ChannelParams, sigma: float) -> np.ndarray:
    """Number of ongoing links each candidate two-hop path would conflict with."""
    if not ongoing:
        return np.zeros(len(relays), dtype=int)
    cand = [l for r in relays for l in path_links(flow, r)]
    codes = link_conflicts(cand, list(ongoing), state, params, sigma)
    hit = codes.astype(bool).reshape(len(relays), 2, len(ongoing)).any(axis=1)
    return hit.sum(axis=1)


def ranked_relays(relays: Sequence[int], counts: Sequence[int]) -> list[tuple[int, int]]:
    """Candidates ordered by ascending conflict count, ties by smaller id."""
    return sorted(zip((int(c) for c in counts), (int(r) for r in relays)))


def select_relay(flow: Flow, candidates: CandidateRelaySet | Sequence[int], mode: SelectionMode,
                 rng: np.random.Generator | None = None,
                 counts: Mapping[int, int] | None = None) -> int:
    """Pick a relay: uniformly at random, or the least-contended candidate."""
    pool = candidates.combined if isinstance(candidates, CandidateRelaySet) else tuple(candidates)
    if not pool:
        raise ValueError(f"flow {flow.id}: empty candidate set")
    if mode is SelectionMode.RANDOM:
        return int(pool[int(rng.integers(len(pool)))])
    if counts is None:
        raise ValueError("MinDegree selection needs conflict counts")
    return min(pool, key=lambda r: (counts[r], r))
