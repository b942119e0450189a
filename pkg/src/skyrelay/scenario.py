"""Highway world state: vehicle platoons, orbiting UAVs and LoS blockage.

The road is treated as a ring of circumference ``road_length``: vehicles
leaving the far end re-enter at the near end, and every longitudinal offset
is taken along the shorter arc. This keeps density constant over long runs
without creating artificial link breaks at the wrap point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .config import ConfigError, MobilityConfig, ScenarioConfig, kmh_to_ms

MIN_GAP = 2.0  # meters; safety distance floor between consecutive vehicles
HEADWAY = 2.0  # seconds; mean gap = speed * headway


def wrap(dx, road_length):
    """Signed longitudinal offset folded into [-road_length/2, road_length/2)."""
    return dx - road_length * np.floor(dx / road_length + 0.5)


@dataclass(frozen=True)
class RoadLayout:
    num_lanes: int = 3
    lane_width: float = 3.5
    road_length: float = 6000.0

    @property
    def lane_centers(self) -> np.ndarray:
        return self.lane_width * (np.arange(self.num_lanes) + 0.5)


@dataclass(frozen=True)
class VehicleState:
    id: int
    lane: int
    x: float
    speed: float


@dataclass(frozen=True)
class UavState:
    id: int  # node index (vehicles come first)
    center: tuple[float, float]
    orbit_radius: float
    phase: float
    height: float
    speed: float
    coverage_radius: float
    power_avg: float
    power_peak: float

    @property
    def position(self) -> tuple[float, float, float]:
        cx, cy = self.center
        return (
            cx + self.orbit_radius * math.cos(self.phase),
            cy + self.orbit_radius * math.sin(self.phase),
            self.height,
        )


@dataclass(frozen=True)
class MobilityModel:
    """Inter-vehicle gap law.

    PP: gap ~ Exp(mean ``HEADWAY * v``). IPP: each vehicle belongs to the
    low-speed class with probability ``low_speed_fraction``; its gap and
    speed follow that class's mean speed.
    """

    kind: str = "PP"
    mean_speeds: tuple[float, ...] = (kmh_to_ms(100.0),)  # m/s
    low_speed_fraction: float = 0.0

    def __post_init__(self):
        if self.kind == "PP" and len(self.mean_speeds) != 1:
            raise ConfigError("PP mobility takes exactly one mean speed")
        if self.kind == "IPP" and len(self.mean_speeds) != 2:
            raise ConfigError("IPP mobility takes (low, high) mean speeds")
        if self.kind not in ("PP", "IPP"):
            raise ConfigError(f"unknown mobility kind {self.kind!r}")

    @classmethod
    def from_config(cls, cfg: MobilityConfig) -> "MobilityModel":
        if cfg.kind == "PP":
            return cls("PP", (kmh_to_ms(cfg.vbar_kmh),))
        return cls("IPP", (kmh_to_ms(cfg.v1_kmh), kmh_to_ms(cfg.v2_kmh)), cfg.p_low)

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw ``n`` (speed, raw gap) pairs; the gap is before the max with MIN_GAP."""
        if self.kind == "PP":
            speed = np.full(n, self.mean_speeds[0])
        else:
            low = rng.random(n) < self.low_speed_fraction
            speed = np.where(low, self.mean_speeds[0], self.mean_speeds[1])
        gaps = rng.exponential(HEADWAY * speed)
        return speed, gaps


class BlockageCase(enum.Enum):
    DIRECT = "direct"
    CASE1 = "case1"  # non-adjacent lanes, middle lane obstructs
    CASE2 = "case2"  # same lane, two or more vehicles between
    CASE3 = "case3"  # same lane, exactly one vehicle between

    @property
    def blocked(self) -> bool:
        return self is not BlockageCase.DIRECT


class Blockage(NamedTuple):
    case: BlockageCase
    blocker: int | None = None


@dataclass(frozen=True, eq=False)
class ScenarioState:
    """Immutable snapshot of all vehicles and UAVs at one slot.

    Vehicle ``i`` is node ``i``; UAV ``k`` is node ``n_vehicles + k``.
    """

    layout: RoadLayout
    slot: int
    lane: np.ndarray
    x: np.ndarray
    speed: np.ndarray
    uav_center: np.ndarray  # (U, 2)
    uav_orbit_radius: np.ndarray
    uav_phase: np.ndarray
    uav_height: np.ndarray
    uav_speed: np.ndarray
    coverage_radius: float = 500.0
    uav_power_avg: float = 1.0
    uav_power_peak: float = 2.0

    def __post_init__(self):
        for name in ("lane", "x", "speed", "uav_center", "uav_orbit_radius", "uav_phase",
                     "uav_height", "uav_speed"):
            getattr(self, name).setflags(write=False)

    @property
    def n_vehicles(self) -> int:
        return int(self.x.shape[0])

    @property
    def n_uavs(self) -> int:
        return int(self.uav_phase.shape[0])

    @property
    def n_nodes(self) -> int:
        return self.n_vehicles + self.n_uavs

    @property
    def road_length(self) -> float:
        return self.layout.road_length

    def is_uav_node(self, node: int) -> bool:
        return node >= self.n_vehicles

    @cached_property
    def y(self) -> np.ndarray:
        return self.layout.lane_centers[self.lane]

    @cached_property
    def uav_xy(self) -> np.ndarray:
        ang = self.uav_phase
        xy = self.uav_center + self.uav_orbit_radius[:, None] * np.column_stack(
            (np.cos(ang), np.sin(ang))
        )
        xy[:, 0] = np.mod(xy[:, 0], self.road_length)
        return xy

    @cached_property
    def node_positions(self) -> np.ndarray:
        pos = np.zeros((self.n_nodes, 3))
        pos[: self.n_vehicles, 0] = self.x
        pos[: self.n_vehicles, 1] = self.y
        pos[self.n_vehicles :, :2] = self.uav_xy
        pos[self.n_vehicles :, 2] = self.uav_height
        pos.setflags(write=False)
        return pos

    @cached_property
    def is_uav(self) -> np.ndarray:
        mask = np.zeros(self.n_nodes, dtype=np.uint8)
        mask[self.n_vehicles :] = 1
        mask.setflags(write=False)
        return mask

    @cached_property
    def lane_members(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.lane == k) for k in range(self.layout.num_lanes)]

    @property
    def vehicles(self) -> list[VehicleState]:
        return [self.vehicle(i) for i in range(self.n_vehicles)]

    @property
    def uavs(self) -> list[UavState]:
        return [self.uav(k) for k in range(self.n_uavs)]

    def vehicle(self, i: int) -> VehicleState:
        return VehicleState(int(i), int(self.lane[i]), float(self.x[i]), float(self.speed[i]))

    def uav(self, k: int) -> UavState:
        return UavState(
            id=self.n_vehicles + k,
            center=(float(self.uav_center[k, 0]), float(self.uav_center[k, 1])),
            orbit_radius=float(self.uav_orbit_radius[k]),
            phase=float(self.uav_phase[k]),
            height=float(self.uav_height[k]),
            speed=float(self.uav_speed[k]),
            coverage_radius=self.coverage_radius,
            power_avg=self.uav_power_avg,
            power_peak=self.uav_power_peak,
        )

    def dx(self, a: int, b: int) -> float:
        """Signed shorter-arc longitudinal offset from node a to node b."""
        pos = self.node_positions
        return float(wrap(pos[b, 0] - pos[a, 0], self.road_length))

    def distance(self, a: int, b: int) -> float:
        pos = self.node_positions
        d = pos[b] - pos[a]
        d0 = wrap(d[0], self.road_length)
        return math.sqrt(d0 * d0 + d[1] * d[1] + d[2] * d[2])

    def same_state(self, other: "ScenarioState") -> bool:
        return (
            self.slot == other.slot
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.speed, other.speed)
            and np.array_equal(self.lane, other.lane)
            and np.array_equal(self.uav_phase, other.uav_phase)
        )


def generate_scenario(
    layout: RoadLayout,
    mobility: MobilityModel,
    vehicles_per_lane: int,
    uav_count: int,
    rng_seed,
    *,
    uav_height: float = 100.0,
    uav_speed: float = 20.0,
    orbit_radius: float = 100.0,
    coverage_radius: float = 500.0,
    uav_power_avg: float = 1.0,
    uav_power_peak: float | None = None,
) -> ScenarioState:
    """Place platoons lane by lane and park UAVs over evenly spaced road segments.

    ``rng_seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if vehicles_per_lane < 1:
        raise ConfigError("vehicles_per_lane must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    road = layout.road_length
    lanes, xs, speeds = [], [], []
    for lane in range(layout.num_lanes):
        speed, raw = mobility.sample(vehicles_per_lane, rng)
        gaps = np.maximum(MIN_GAP, raw[1:])
        span = float(gaps.sum())
        required = span + (MIN_GAP if vehicles_per_lane > 1 else 0.0)
        if required > road:
            raise ConfigError(
                f"lane {lane}: {vehicles_per_lane} vehicles need {required:.0f} m "
                f"but the road is {road:.0f} m"
            )
        front = rng.uniform(span, road)
        x = front - np.concatenate(([0.0], np.cumsum(gaps)))
        lanes.append(np.full(vehicles_per_lane, lane))
        xs.append(np.mod(x, road))
        speeds.append(speed)

    seg = road / uav_count if uav_count else 0.0
    centers = np.column_stack(
        (seg * (np.arange(uav_count) + 0.5), np.full(uav_count, float(layout.lane_centers.mean())))
    )
    return ScenarioState(
        layout=layout,
        slot=0,
        lane=np.concatenate(lanes).astype(np.intp),
        x=np.concatenate(xs),
        speed=np.concatenate(speeds),
        uav_center=centers.reshape(uav_count, 2),
        uav_orbit_radius=np.full(uav_count, float(orbit_radius)),
        uav_phase=np.zeros(uav_count),
        uav_height=np.full(uav_count, float(uav_height)),
        uav_speed=np.full(uav_count, float(uav_speed)),
        coverage_radius=coverage_radius,
        uav_power_avg=uav_power_avg,
        uav_power_peak=2 * uav_power_avg if uav_power_peak is None else uav_power_peak,
    )


def scenario_from_config(cfg: ScenarioConfig, rng_seed, uav_power_avg: float = 1.0) -> ScenarioState:
    return generate_scenario(
        RoadLayout(cfg.lanes, cfg.lane_width, cfg.road_length),
        MobilityModel.from_config(cfg.mobility),
        cfg.vehicles_per_lane,
        cfg.uav_count,
        rng_seed,
        uav_height=cfg.uav_height,
        uav_speed=cfg.uav_speed,
        orbit_radius=cfg.orbit_radius,
        coverage_radius=cfg.coverage_radius,
        uav_power_avg=uav_power_avg,
    )


def advance(state: ScenarioState, slots: int, T: float) -> ScenarioState:
    """Move every vehicle and UAV forward by ``slots`` slots of ``T`` seconds."""
    if slots < 0:
        raise ValueError("slots must be >= 0")
    if slots == 0:
        return state
    dt = slots * T
    omega = np.divide(
        state.uav_speed, state.uav_orbit_radius,
        out=np.zeros_like(state.uav_speed), where=state.uav_orbit_radius > 0,
    )
    return ScenarioState(
        layout=state.layout,
        slot=state.slot + slots,
        lane=state.lane.copy(),
        x=np.mod(state.x + state.speed * dt, state.road_length),
        speed=state.speed.copy(),
        uav_center=state.uav_center.copy(),
        uav_orbit_radius=state.uav_orbit_radius.copy(),
        uav_phase=state.uav_phase + omega * dt,
        uav_height=state.uav_height.copy(),
        uav_speed=state.uav_speed.copy(),
        coverage_radius=state.coverage_radius,
        uav_power_avg=state.uav_power_avg,
        uav_power_peak=state.uav_power_peak,
    )


class Timeline:
    """Scenario states indexed by absolute slot, always derived from slot 0.

    Every scheme and the oracle read geometry through the same timeline so
    that a given slot has bit-identical coordinates everywhere.
    """

    def __init__(self, initial: ScenarioState, T: float, cache_size: int = 4096):
        if initial.slot != 0:
            raise ValueError("timeline must start from a slot-0 state")
        self.initial = initial
        self.T = T
        self._cache: dict[int, ScenarioState] = {0: initial}
        self._cache_size = cache_size

    def at(self, slot: int) -> ScenarioState:
        st = self._cache.get(slot)
        if st is None:
            st = advance(self.initial, slot, self.T)
            if len(self._cache) >= self._cache_size:
                self._cache.clear()
                self._cache[0] = self.initial
            self._cache[slot] = st
        return st


def classify_blockage(
    src: int, dst: int, state: ScenarioState, corridor_half_width: float = 1.0
) -> Blockage:
    """LoS classification of the vehicle pair (src, dst).

    Adjacent lanes never block. On the same lane the count of vehicles
    strictly between the pair decides between direct, one blocker (Case3)
    and a platoon (Case2). Across a middle lane the pair is blocked (Case1)
    when a middle-lane vehicle sits within ``corridor_half_width`` of the
    LoS segment.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    lane_s, lane_d = int(state.lane[src]), int(state.lane[dst])
    gap_lanes = abs(lane_s - lane_d)
    if gap_lanes == 1:
        return Blockage(BlockageCase.DIRECT)

    road = state.road_length
    d = float(wrap(state.x[dst] - state.x[src], road))
    if gap_lanes == 0:
        others = state.lane_members[lane_s]
        others = others[(others != src) & (others != dst)]
        e = wrap(state.x[others] - state.x[src], road)
        between = others[(e > min(0.0, d)) & (e < max(0.0, d))]
        if between.size == 0:
            return Blockage(BlockageCase.DIRECT)
        if between.size == 1:
            return Blockage(BlockageCase.CASE3, int(between[0]))
        return Blockage(BlockageCase.CASE2)

    y_s, y_d = float(state.y[src]), float(state.y[dst])
    lo, hi = min(lane_s, lane_d), max(lane_s, lane_d)
    mid = np.concatenate([state.lane_members[k] for k in range(lo + 1, hi)])
    e = wrap(state.x[mid] - state.x[src], road)
    inside = (e > min(0.0, d)) & (e < max(0.0, d))
    if not inside.any():
        return Blockage(BlockageCase.DIRECT)
    ex, ey = e[inside], state.y[mid[inside]] - y_s
    # distance from each middle-lane vehicle to the LoS segment (src at origin)
    sx, sy = d, y_d - y_s
    seg2 = sx * sx + sy * sy
    u = np.clip((ex * sx + ey * sy) / seg2, 0.0, 1.0)
    dist = np.hypot(ex - u * sx, ey - u * sy)
    if np.any(dist <= corridor_half_width):
        return Blockage(BlockageCase.CASE1)
    return Blockage(BlockageCase.DIRECT)
