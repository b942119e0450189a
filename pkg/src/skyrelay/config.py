"""Run configuration: default system parameters and the JSON config schema.

The JSON document has three sections::

    {
      "scenario": {"lanes": 3, "lane_width_m": 3.5, "road_length_m": 6000,
                   "vehicles_per_lane": 60,
                   "mobility": {"kind": "PP", "vbar_kmh": 100},
                   "uavs": {"count": 5, "height_m": 100, "speed_ms": 20,
                            "orbit_radius_m": 100, "coverage_radius_m": 500,
                            "p_avg_dbm": 30}},
      "channel": {"freq_ghz": 30, "bandwidth_mhz": 2000, ...},
      "run": {"n_flows": 80, "M": 2000, "T": 0.1, "sigma": 1e-3,
              "demand_gbps": [0.1, 1.0], "scheme": "jrds",
              "fading": "stochastic"}
    }

Missing keys take the defaults below.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1e3


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def kmh_to_ms(kmh: float) -> float:
    return kmh / 3.6


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget and fading parameters (linear SI units unless noted)."""

    carrier_freq: float = 30e9
    alpha_v: float = 2.5
    alpha_u: float = 2.0
    nakagami_m: float = 2.0
    rician_k: float = db_to_linear(9.0)
    g0_dbi: float = 20.0
    theta_3db: float = 30.0
    pt: float = dbm_to_watts(40.0)
    pu: float = dbm_to_watts(30.0)
    pu_peak: float = 2 * dbm_to_watts(30.0)
    n0: float = dbm_to_watts(-134.0) / 1e6
    bandwidth: float = 2000e6
    eta: float = 0.8
    beta: float = 1e-9
    fading_mode: str = "stochastic"

    def __post_init__(self):
        for name in ("pt", "pu", "pu_peak", "n0", "bandwidth", "carrier_freq"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"channel parameter {name} must be positive")
        if not 0 < self.eta <= 1:
            raise ConfigError("eta must lie in (0, 1]")
        if not 1e-11 <= self.beta <= 1e-7:
            raise ConfigError("beta must lie in [1e-11, 1e-7]")
        if self.nakagami_m <= 0 or self.rician_k < 0:
            raise ConfigError("nakagami m must be > 0 and Rician K >= 0")
        if self.fading_mode not in ("stochastic", "deterministic"):
            raise ConfigError(f"unknown fading mode {self.fading_mode!r}")
        # UAV transmits at its average power every slot: peak and mean caps hold by construction
        if self.pu > self.pu_peak:
            raise ConfigError("UAV transmit power exceeds its peak power")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def k_v(self) -> float:
        return (self.wavelength / (4 * math.pi)) ** self.alpha_v

    @property
    def k_u(self) -> float:
        return (self.wavelength / (4 * math.pi)) ** self.alpha_u

    @property
    def g0(self) -> float:
        return db_to_linear(self.g0_dbi)

    @property
    def noise(self) -> float:
        return self.n0 * self.bandwidth

    @property
    def si_power(self) -> float:
        return self.beta * self.pt

    @property
    def deterministic(self) -> bool:
        return self.fading_mode == "deterministic"

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "ChannelParams":
        unknown = set(d) - _CHANNEL_KEYS
        if unknown:
            raise ConfigError(f"unknown channel keys: {sorted(unknown)}")
        base = cls()
        pu = dbm_to_watts(d["pu_avg_dbm"]) if "pu_avg_dbm" in d else base.pu
        kw = dict(
            carrier_freq=d.get("freq_ghz", base.carrier_freq / 1e9) * 1e9,
            bandwidth=d.get("bandwidth_mhz", base.bandwidth / 1e6) * 1e6,
            n0=dbm_to_watts(d["n0_dbm_per_mhz"]) / 1e6 if "n0_dbm_per_mhz" in d else base.n0,
            pt=dbm_to_watts(d["pt_dbm"]) if "pt_dbm" in d else base.pt,
            pu=pu,
            pu_peak=2 * pu,
            eta=d.get("eta", base.eta),
            nakagami_m=d.get("m", base.nakagami_m),
            rician_k=db_to_linear(d["rician_k_db"]) if "rician_k_db" in d else base.rician_k,
            alpha_v=d.get("alpha_v", base.alpha_v),
            alpha_u=d.get("alpha_u", base.alpha_u),
            beta=db_to_linear(d["beta_db"]) if "beta_db" in d else base.beta,
            g0_dbi=d.get("g0_dbi", base.g0_dbi),
            theta_3db=d.get("theta3db_deg", base.theta_3db),
            fading_mode=d.get("fading", base.fading_mode),
        )
        return cls(**kw)

    def to_json(self) -> dict[str, Any]:
        return {
            "freq_ghz": self.carrier_freq / 1e9,
            "bandwidth_mhz": self.bandwidth / 1e6,
            "n0_dbm_per_mhz": 10 * math.log10(self.n0 * 1e6 * 1e3),
            "pt_dbm": 10 * math.log10(self.pt * 1e3),
            "pu_avg_dbm": 10 * math.log10(self.pu * 1e3),
            "eta": self.eta,
            "m": self.nakagami_m,
            "rician_k_db": 10 * math.log10(self.rician_k) if self.rician_k > 0 else -math.inf,
            "alpha_v": self.alpha_v,
            "alpha_u": self.alpha_u,
            "beta_db": 10 * math.log10(self.beta),
            "g0_dbi": self.g0_dbi,
            "theta3db_deg": self.theta_3db,
            "fading": self.fading_mode,
        }


_CHANNEL_KEYS = {
    "freq_ghz", "bandwidth_mhz", "n0_dbm_per_mhz", "pt_dbm", "pu_avg_dbm", "eta", "m",
    "rician_k_db", "alpha_v", "alpha_u", "beta_db", "g0_dbi", "theta3db_deg", "fading",
}


@dataclass(frozen=True)
class MobilityConfig:
    kind: str = "PP"
    vbar_kmh: float = 100.0
    v1_kmh: float = 60.0
    v2_kmh: float = 100.0
    p_low: float = 0.0

    def __post_init__(self):
        if self.kind not in ("PP", "IPP"):
            raise ConfigError(f"mobility kind must be PP or IPP, got {self.kind!r}")
        if not 0.0 <= self.p_low <= 1.0:
            raise ConfigError("low-speed fraction must lie in [0, 1]")

    @property
    def mean_speed_kmh(self) -> float:
        if self.kind == "PP":
            return self.vbar_kmh
        return self.p_low * self.v1_kmh + (1 - self.p_low) * self.v2_kmh

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "MobilityConfig":
        kind = d.get("kind", "PP")
        if kind == "PP":
            return cls(kind="PP", vbar_kmh=float(d.get("vbar_kmh", 100.0)))
        triple = d.get("vbar_kmh", [60.0, 100.0, 0.0])
        if not isinstance(triple, (list, tuple)) or len(triple) != 3:
            raise ConfigError("IPP mobility needs vbar_kmh = [v1_kmh, v2_kmh, p]")
        v1, v2, p = (float(v) for v in triple)
        return cls(kind="IPP", v1_kmh=v1, v2_kmh=v2, p_low=p)

    def to_json(self) -> dict[str, Any]:
        if self.kind == "PP":
            return {"kind": "PP", "vbar_kmh": self.vbar_kmh}
        return {"kind": "IPP", "vbar_kmh": [self.v1_kmh, self.v2_kmh, self.p_low]}


@dataclass(frozen=True)
class ScenarioConfig:
    lanes: int = 3
    lane_width: float = 3.5
    road_length: float = 6000.0
    vehicles_per_lane: int = 60
    mobility: MobilityConfig = field(default_factory=MobilityConfig)
    uav_count: int = 5
    uav_height: float = 100.0
    uav_speed: float = 20.0
    orbit_radius: float = 100.0
    coverage_radius: float = 500.0

    def __post_init__(self):
        if self.lanes < 1 or self.vehicles_per_lane < 1:
            raise ConfigError("need at least one lane and one vehicle per lane")
        if self.uav_count < 0:
            raise ConfigError("uav count must be >= 0")

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> tuple["ScenarioConfig", float | None]:
        base = cls()
        u = d.get("uavs", {})
        cfg = cls(
            lanes=int(d.get("lanes", base.lanes)),
            lane_width=float(d.get("lane_width_m", base.lane_width)),
            road_length=float(d.get("road_length_m", base.road_length)),
            vehicles_per_lane=int(d.get("vehicles_per_lane", base.vehicles_per_lane)),
            mobility=MobilityConfig.from_json(d.get("mobility", {})),
            uav_count=int(u.get("count", base.uav_count)),
            uav_height=float(u.get("height_m", base.uav_height)),
            uav_speed=float(u.get("speed_ms", base.uav_speed)),
            orbit_radius=float(u.get("orbit_radius_m", base.orbit_radius)),
            coverage_radius=float(u.get("coverage_radius_m", base.coverage_radius)),
        )
        return cfg, u.get("p_avg_dbm")

    def to_json(self, pu_dbm: float) -> dict[str, Any]:
        return {
            "lanes": self.lanes,
            "lane_width_m": self.lane_width,
            "road_length_m": self.road_length,
            "vehicles_per_lane": self.vehicles_per_lane,
            "mobility": self.mobility.to_json(),
            "uavs": {
                "count": self.uav_count,
                "height_m": self.uav_height,
                "speed_ms": self.uav_speed,
                "orbit_radius_m": self.orbit_radius,
                "coverage_radius_m": self.coverage_radius,
                "p_avg_dbm": pu_dbm,
            },
        }


SCHEMES = ("tdma", "rr", "rcs", "jrds", "oracle")


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    n_flows: int = 80
    M: int = 2000
    T: float = 0.1
    sigma: float = 1e-3
    demand_gbps: tuple[float, float] = (0.1, 1.0)
    scheme: str = "jrds"
    epsilon_threshold: float = 0.5
    corridor_half_width: float = 1.0
    oracle_max_flows: int = 6
    oracle_max_slots: int = 200

    def __post_init__(self):
        if self.n_flows < 1:
            raise ConfigError("n_flows must be >= 1")
        if self.M < 1 or self.T <= 0:
            raise ConfigError("M must be >= 1 and T > 0")
        lo, hi = self.demand_gbps
        if not 0 < lo <= hi:
            raise ConfigError("demand range must satisfy 0 < lo <= hi")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

    def with_channel(self, **kw) -> "RunConfig":
        return replace(self, channel=replace(self.channel, **kw))

    def with_scenario(self, **kw) -> "RunConfig":
        return replace(self, scenario=replace(self.scenario, **kw))

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "RunConfig":
        unknown = set(doc) - {"scenario", "channel", "run"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        scen, uav_pu_dbm = ScenarioConfig.from_json(doc.get("scenario", {}))
        chan_doc = dict(doc.get("channel", {}))
        run = doc.get("run", {})
        if uav_pu_dbm is not None:
            chan_doc["pu_avg_dbm"] = uav_pu_dbm
        if "fading" in run:
            chan_doc["fading"] = run["fading"]
        channel = ChannelParams.from_json(chan_doc)
        base = cls()
        demand = run.get("demand_gbps", list(base.demand_gbps))
        if len(demand) != 2:
            raise ConfigError("demand_gbps must be [lo, hi]")
        return cls(
            scenario=scen,
            channel=channel,
            n_flows=int(run.get("n_flows", base.n_flows)),
            M=int(run.get("M", base.M)),
            T=float(run.get("T", base.T)),
            sigma=float(run.get("sigma", base.sigma)),
            demand_gbps=(float(demand[0]), float(demand[1])),
            scheme=run.get("scheme", base.scheme),
            epsilon_threshold=float(run.get("epsilon_threshold", base.epsilon_threshold)),
            corridor_half_width=float(run.get("corridor_half_width_m", base.corridor_half_width)),
            oracle_max_flows=int(run.get("oracle_max_flows", base.oracle_max_flows)),
            oracle_max_slots=int(run.get("oracle_max_slots", base.oracle_max_slots)),
        )

    def to_json(self) -> dict[str, Any]:
        chan = self.channel.to_json()
        return {
            "scenario": self.scenario.to_json(chan["pu_avg_dbm"]),
            "channel": chan,
            "run": {
                "n_flows": self.n_flows,
                "M": self.M,
                "T": self.T,
                "sigma": self.sigma,
                "demand_gbps": list(self.demand_gbps),
                "scheme": self.scheme,
                "fading": self.channel.fading_mode,
                "epsilon_threshold": self.epsilon_threshold,
                "corridor_half_width_m": self.corridor_half_width,
                "oracle_max_flows": self.oracle_max_flows,
                "oracle_max_slots": self.oracle_max_slots,
            },
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return RunConfig.from_json(doc)


def default_config() -> RunConfig:
    return RunConfig()


__all__ = [
    "ChannelParams", "ConfigError", "MobilityConfig", "RunConfig", "ScenarioConfig",
    "SCHEMES", "db_to_linear", "dbm_to_watts", "default_config", "kmh_to_ms",
    "load_config",
]
