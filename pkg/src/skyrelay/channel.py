"""Antenna gains, small-scale fading, received power, SINR and achievable rate.

V2V paths use Nakagami-m power fading (Gamma, shape m, unit mean); any path
with a UAV endpoint uses Rician power fading with unit total power. The
receiver always points its beam at its intended transmitter; interference
is weighted by the receiver's gain toward the interferer only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .config import ChannelParams
from .scenario import ScenarioState, wrap

SIDELOBE_FLOOR_DB = 26.0


class LinkKind(enum.Enum):
    V2V = "v2v"
    U2V_DOWN = "u2v_down"
    U2V_UP = "u2v_up"


class FadingKind(enum.Enum):
    NAKAGAMI = "nakagami"
    RICIAN = "rician"


@dataclass(frozen=True)
class Link:
    """One hop of a flow. ``hop`` is 0 for a direct path, 1/2 for relay hops."""

    flow: int
    hop: int
    tx: int
    rx: int

    def kind(self, n_vehicles: int) -> LinkKind:
        if self.tx >= n_vehicles:
            return LinkKind.U2V_DOWN
        if self.rx >= n_vehicles:
            return LinkKind.U2V_UP
        return LinkKind.V2V


@dataclass(frozen=True)
class ActiveSet:
    """Links transmitting in the same slot."""

    links: tuple[Link, ...]

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))

    def __len__(self):
        return len(self.links)

    def __iter__(self):
        return iter(self.links)

    def index(self, link: Link) -> int:
        try:
            return self.links.index(link)
        except ValueError:
            raise ValueError(f"{link} is not in the active set") from None

    @property
    def tx(self) -> np.ndarray:
        return np.fromiter((l.tx for l in self.links), dtype=np.intp, count=len(self.links))

    @property
    def rx(self) -> np.ndarray:
        return np.fromiter((l.rx for l in self.links), dtype=np.intp, count=len(self.links))

    def mui_indicator(self, i: int) -> np.ndarray:
        """a_i^j: link j transmits while link i's receiver listens (excluding SI)."""
        tgt = self.links[i]
        return np.array([j != i and l.tx != tgt.rx for j, l in enumerate(self.links)])

    def si_indicator(self, i: int, n_vehicles: int) -> np.ndarray:
        """b_i^j: link i's receiving vehicle is itself transmitting link j."""
        tgt = self.links[i]
        if tgt.rx >= n_vehicles:
            return np.zeros(len(self.links), dtype=bool)
        return np.array([j != i and l.tx == tgt.rx for j, l in enumerate(self.links)])


def antenna_gain(theta_dev, params: ChannelParams):
    """Receive gain [dBi] at ``theta_dev`` degrees off boresight."""
    theta = np.asarray(theta_dev, dtype=float)
    if np.any((theta < 0) | (theta > 180)):
        raise ValueError("deviation angle must lie in [0, 180] degrees")
    g = params.g0_dbi - np.minimum((theta / params.theta_3db) ** 2, SIDELOBE_FLOOR_DB)
    return float(g) if g.ndim == 0 else g


def sample_fading(kind: FadingKind, params: ChannelParams, rng: np.random.Generator | None,
                  size=None):
    """Unit-mean power fading gain(s); exactly 1 in deterministic mode."""
    if params.deterministic:
        return 1.0 if size is None else np.ones(size)
    if kind is FadingKind.NAKAGAMI:
        m = params.nakagami_m
        return rng.gamma(m, 1.0 / m, size=size)
    k = params.rician_k
    return rng.noncentral_chisquare(2.0, 2.0 * k, size=size) / (2.0 * (k + 1.0))


def fading_matrix(tx: np.ndarray, rx: np.ndarray, is_uav: np.ndarray, params: ChannelParams,
                  rng: np.random.Generator | None) -> np.ndarray | None:
    """Per-(receiver, transmitter) fading for an active set, or None when deterministic."""
    if params.deterministic:
        return None
    k = len(tx)
    rician = (is_uav[rx][:, None] | is_uav[tx][None, :]).astype(bool)
    out = np.empty((k, k))
    out[~rician] = sample_fading(FadingKind.NAKAGAMI, params, rng, size=int((~rician).sum()))
    out[rician] = sample_fading(FadingKind.RICIAN, params, rng, size=int(rician.sum()))
    return out


def noise_power(params: ChannelParams) -> float:
    """Thermal noise N0*W in watts."""
    return params.n0 * params.bandwidth


def rx_power(kind: LinkKind, tx_pos, rx_pos, gain_dbi: float, fading: float,
             params: ChannelParams, road_length: float | None = None) -> float:
    """Received power [W] for one transmitter-receiver path.

    ``gain_dbi`` is the receiver gain toward the transmitter (G0 for a
    desired link). Positions are (x, y[, z]); z defaults to 0.
    """
    tp = np.zeros(3)
    rp = np.zeros(3)
    tp[: len(tx_pos)] = tx_pos
    rp[: len(rx_pos)] = rx_pos
    d = tp - rp
    if road_length is not None:
        d[0] = wrap(d[0], road_length)
    dist = math.sqrt(float(d @ d))
    if dist == 0.0:
        raise ValueError("rx_power undefined at zero distance")
    g = 10.0 ** (gain_dbi / 10.0)
    if kind is LinkKind.U2V_DOWN:
        return params.k_u * params.pu * g * fading * dist ** (-params.alpha_u)
    return params.k_v * params.pt * g * fading * dist ** (-params.alpha_v)


def kernel_consts(params: ChannelParams, road_length: float) -> np.ndarray:
    return np.array([
        params.k_v * params.pt,
        params.k_u * params.pu,
        params.alpha_v,
        params.alpha_u,
        params.g0_dbi,
        params.theta_3db,
        road_length,
        noise_power(params),
        params.si_power,
    ])


def active_sinrs(active: ActiveSet | Sequence[Link], state: ScenarioState, params: ChannelParams,
                 rng: np.random.Generator | None = None, consts: np.ndarray | None = None) -> np.ndarray:
    """SINR of every link in ``active`` at the geometry of ``state``."""
    links = active.links if isinstance(active, ActiveSet) else tuple(active)
    if not links:
        return np.zeros(0)
    tx = np.fromiter((l.tx for l in links), dtype=np.intp, count=len(links))
    rx = np.fromiter((l.rx for l in links), dtype=np.intp, count=len(links))
    if consts is None:
        consts = kernel_consts(params, state.road_length)
    fad = fading_matrix(tx, rx, state.is_uav, params, rng)
    return kernels.link_sinr(tx, rx, state.node_positions, state.is_uav, fad, consts)


def sinr(target: Link, active: ActiveSet, state: ScenarioState, params: ChannelParams,
         rng: np.random.Generator | None = None) -> float:
    """SINR of ``target`` given every other link in ``active`` transmits concurrently."""
    i = active.index(target)
    return float(active_sinrs(active, state, params, rng)[i])


def rate(sinr_value, params: ChannelParams):
    """Shannon rate eta*W*log2(1+SINR) in bits/s."""
    s = np.asarray(sinr_value, dtype=float)
    if np.any(s < 0):
        raise ValueError("SINR must be non-negative")
    r = params.eta * params.bandwidth * np.log1p(s) / math.log(2.0)
    return float(r) if r.ndim == 0 else r


def solo_sinr(tx: int, rx: int, state: ScenarioState, params: ChannelParams) -> float:
    """Interference-free SINR with unit fading."""
    consts = kernel_consts(params, state.road_length)
    return float(kernels.link_sinr(np.array([tx]), np.array([rx]), state.node_positions,
                                   state.is_uav, None, consts)[0])


def v2v_range(params: ChannelParams) -> float:
    """Distance at which the interference-free deterministic V2V SNR falls to 0 dB."""
    return (params.k_v * params.pt * params.g0 / noise_power(params)) ** (1.0 / params.alpha_v)


def solo_rates(tx, rx, state: ScenarioState, params: ChannelParams) -> np.ndarray:
    """Interference-free deterministic rates of many links at once."""
    tx = np.asarray(tx, dtype=np.intp)
    rx = np.asarray(rx, dtype=np.intp)
    pos = state.node_positions
    d = pos[tx] - pos[rx]
    d[:, 0] = wrap(d[:, 0], state.road_length)
    dist = np.sqrt((d * d).sum(axis=1))
    if np.any(dist == 0):
        raise ValueError("zero-length link")
    down = state.is_uav[tx].astype(bool)
    coef = np.where(down, params.k_u * params.pu, params.k_v * params.pt)
    alpha = np.where(down, params.alpha_u, params.alpha_v)
    snr = coef * params.g0 * dist ** -alpha / noise_power(params)
    return params.eta * params.bandwidth * np.log2(1.0 + snr)
