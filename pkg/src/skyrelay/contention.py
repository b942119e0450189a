"""Link conflicts, relative interference, contention graphs and flow grouping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .channel import Link, kernel_consts
from .config import ChannelParams
from .scenario import ScenarioState

NODE_CONFLICT = "NodeConflict"
FD_CONFLICT = "FD"
RI_CONFLICT = "RI"
REASONS = {kernels.NODE: NODE_CONFLICT, kernels.FD: FD_CONFLICT, kernels.RI: RI_CONFLICT}


def adjacent(link_a: Link, link_b: Link, n_vehicles: int) -> bool:
    """True when the two links cannot share a slot for node-role reasons.

    Vehicles are full duplex (one transmission plus one reception), so they
    clash only when used twice in the same role. UAVs are half duplex and
    clash whenever both links touch them.
    """
    if link_a.tx == link_b.tx or link_a.rx == link_b.rx:
        return True
    shared = {link_a.tx, link_a.rx} & {link_b.tx, link_b.rx}
    return any(node >= n_vehicles for node in shared)


def relative_interference(victim: Link, interferer: Link, state: ScenarioState,
                          params: ChannelParams) -> float:
    """Interference-to-signal power ratio at ``victim``'s receiver, unit fading."""
    if {victim.tx, victim.rx} & {interferer.tx, interferer.rx}:
        raise ValueError("relative interference needs node-disjoint links")
    consts = kernel_consts(params, state.road_length)
    p = kernels.power_matrix(np.array([victim.tx, interferer.tx]),
                             np.array([victim.rx, interferer.rx]),
                             state.node_positions, state.is_uav, consts)
    return float(p[0, 1] / p[0, 0])


def link_conflicts(links_a: Sequence[Link], links_b: Sequence[Link], state: ScenarioState,
                   params: ChannelParams, sigma: float, consts=None) -> np.ndarray:
    """Conflict codes (0 none, 1 node, 2 FD, 3 RI) between two link lists."""
    if consts is None:
        consts = kernel_consts(params, state.road_length)
    ta = np.fromiter((l.tx for l in links_a), dtype=np.intp, count=len(links_a))
    ra = np.fromiter((l.rx for l in links_a), dtype=np.intp, count=len(links_a))
    tb = np.fromiter((l.tx for l in links_b), dtype=np.intp, count=len(links_b))
    rb = np.fromiter((l.rx for l in links_b), dtype=np.intp, count=len(links_b))
    return kernels.conflict_codes(ta, ra, tb, rb, state.node_positions, state.is_uav, consts,
                                  float(sigma))


@dataclass
class ContentionGraph:
    """Flows as vertices; an edge marks flows that must not share a slot."""

    vertices: list[int]
    links: dict[int, tuple[Link, ...]] = field(default_factory=dict)
    edges: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self):
        self.adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for (a, b) in self.edges:
            self.adj[a].add(b)
            self.adj[b].add(a)

    def add_edge(self, a: int, b: int, reason: str) -> None:
        if a == b:
            raise ValueError("self-edges are not allowed")
        key = (a, b) if a < b else (b, a)
        self.edges.setdefault(key, reason)
        self.adj[a].add(b)
        self.adj[b].add(a)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.adj.get(a, ())

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def reason(self, a: int, b: int) -> str | None:
        return self.edges.get((a, b) if a < b else (b, a))

    def edge_rows(self) -> list[tuple[int, int, str]]:
        return [(a, b, r) for (a, b), r in sorted(self.edges.items())]

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[tuple[int, int]],
                   reason: str = NODE_CONFLICT) -> "ContentionGraph":
        g = cls(sorted(vertices))
        for a, b in edges:
            g.add_edge(a, b, reason)
        return g


def build_graph(paths: Mapping[int, Sequence[Link]], state: ScenarioState, sigma: float,
                params: ChannelParams) -> ContentionGraph:
    """Contention graph over flows with resolved paths.

    Two flows are joined when any hop of one conflicts with any hop of the
    other; the edge carries the strongest reason (node > FD > RI).
    """
    ids = sorted(paths)
    graph = ContentionGraph(ids, {i: tuple(paths[i]) for i in ids})
    flat = [(i, l) for i in ids for l in paths[i]]
    if len(ids) < 2:
        return graph
    owner = np.array([i for i, _ in flat])
    links = [l for _, l in flat]
    codes = link_conflicts(links, links, state, params, sigma)
    same = owner[:, None] == owner[None, :]
    codes[same] = 0
    # the kernel checks both directions, so codes is symmetric
    ia, ib = np.nonzero(np.triu(codes, k=1))
    pair_code: dict[tuple[int, int], int] = {}
    for a, b in zip(ia, ib):
        c = int(codes[a, b])
        fa, fb = int(owner[a]), int(owner[b])
        key = (fa, fb) if fa < fb else (fb, fa)
        prev = pair_code.get(key)
        if prev is None or c < prev:
            pair_code[key] = int(c)
    for (fa, fb), c in sorted(pair_code.items()):
        graph.add_edge(fa, fb, REASONS[c])
    return graph


def generate_group(vertices: Iterable[int], adj: Mapping[int, set[int]]) -> list[int]:
    """Greedy independent set: repeatedly take the minimum-degree vertex and drop its neighbours.

    Degrees are counted inside the shrinking working set; ties go to the
    smallest id.
    """
    work = set(vertices)
    nbrs = {v: adj.get(v, set()) & work for v in work}
    deg = {v: len(n) for v, n in nbrs.items()}
    group = []
    while work:
        v = min(work, key=lambda u: (deg[u], u))
        group.append(v)
        removed = {v} | nbrs[v]
        work -= removed
        for r in removed:
            for u in nbrs[r]:
                if u in work:
                    deg[u] -= 1
                    nbrs[u].discard(r)
    return group


def flow_grouping(graph: ContentionGraph) -> list[list[int]]:
    """Partition all vertices into independent groups, built one greedy group at a time."""
    remaining = set(graph.vertices)
    groups = []
    while remaining:
        g = generate_group(remaining, graph.adj)
        remaining.difference_update(g)
        groups.append(g)
    return groups
