"""Exhaustive minimum-makespan scheduler for small deterministic instances.

Branch and bound over (a) one relay per blocked flow, drawn from every
candidate set the flow has before the incumbent makespan, and (b) per-slot
activation sets: any node-role-feasible subset of the flows' current hops.
Geometry still advances every slot; fading is fixed to its mean so the
optimum is well defined.

Pruning:
  * a lower bound from the best future interference-free rate of every
    remaining hop, per flow and per shared node role;
  * progress dominance at equal slots: a flow's progress only ever helps,
    since dropping a link from a slot never lowers the others' SINR.
The idle slot is never branched on: it is dominated by any non-empty
activation set.
"""

from __future__ import annotations

import itertools
import math
import time
from typing import Sequence

import numpy as np

from scipy.optimize import linprog

from .. import kernels
from ..channel import Link, solo_rates
from ..contention import adjacent
from ..relay import Flow, build_candidate_set, path_links
from .common import (
    Activation, FlowOutcome, SchedContext, ScheduleResult, link_rates,
)
from .jrds import jrds
from .tdma import tdma


class OracleLimitError(ValueError):
    """Instance outside the sizes the exhaustive search accepts."""


def _check_limits(flows, ctx: SchedContext, max_flows: int, max_slots: int) -> None:
    problems = []
    if len(flows) > max_flows:
        problems.append(f"{len(flows)} flows > max {max_flows}")
    if ctx.M > max_slots:
        problems.append(f"M={ctx.M} > max {max_slots}")
    if not ctx.params.deterministic:
        problems.append("fading must be deterministic")
    if problems:
        raise OracleLimitError("oracle refused: " + "; ".join(problems)
                               + f" (limits: flows <= {max_flows}, M <= {max_slots}, "
                               "deterministic fading)")


class _Search:
    """Depth-first search over per-slot activation sets for fixed relay paths."""

    def __init__(self, flows: Sequence[Flow], ctx: SchedContext, horizon: int,
                 node_budget: int):
        self.flows = list(flows)
        self.demands = [f.demand_bits for f in self.flows]
        self.ctx = ctx
        self.horizon = horizon  # slots 0..horizon-1 may be used
        self.T = ctx.T
        self.nv = ctx.initial.n_vehicles
        self.budget = node_budget
        self.nodes = 0
        self.exhausted = False
        self._rates: dict = {}
        self._subsets: dict = {}
        self._consts = ctx.consts()
        self._positions = [ctx.state(t).node_positions for t in range(horizon)]
        self._is_uav = ctx.initial.is_uav

    # -- bounds -----------------------------------------------------------
    def prepare(self, paths) -> float:
        """Per-combination tables; returns the root lower bound in slots."""
        self.paths = paths
        self.flat = [l for p in paths for l in p]
        self.index = {l: j for j, l in enumerate(self.flat)}
        owner = [i for i, p in enumerate(paths) for _ in p]
        L = len(self.flat)
        tx = np.array([l.tx for l in self.flat])
        rx = np.array([l.rx for l in self.flat])
        noise, si_power = self._consts[7], self._consts[8]
        si = ((tx[None, :] == rx[:, None]) & ~self._is_uav[rx].astype(bool)[:, None]) * si_power
        pr = np.empty((self.horizon, L, L))
        for t in range(self.horizon):
            P = kernels.power_matrix(tx, rx, self._positions[t], self._is_uav, self._consts)
            des = np.diag(P).copy()
            np.fill_diagonal(P, 0.0)
            sinr = des[:, None] / (noise + P + si)
            np.fill_diagonal(sinr, des / noise)
            pr[t] = sinr
        pr = self.ctx.params.eta * self.ctx.params.bandwidth * np.log2(1.0 + pr)
        # suffix maxima of the solo rates for the per-flow bound
        solo = np.einsum("tll->tl", pr)
        self.solo_suf = np.maximum.accumulate(solo[::-1], axis=0)[::-1]
        # activation sets: at most one hop per flow, no shared node role
        clash = np.array([[a != b and (owner[a] == owner[b] or
                                       adjacent(self.flat[a], self.flat[b], self.nv))
                           for b in range(L)] for a in range(L)], dtype=bool)
        sets = []
        for size in range(1, len(paths) + 1):
            for combo in itertools.combinations(range(L), size):
                if not any(clash[a, b] for a, b in itertools.combinations(combo, 2)):
                    sets.append(combo)
        # A_t[l, S]: upper bound on bits per slot of link l inside set S from slot t on
        per_set = np.zeros((self.horizon, L, len(sets)))
        for k, S in enumerate(sets):
            for l in S:
                others = [m for m in S if m != l]
                per_set[:, l, k] = pr[:, l, others].min(axis=1) if others else pr[:, l, l]
        suffix = np.maximum.accumulate(per_set[::-1], axis=0)[::-1] * self.T
        w0 = np.array([self.demands[o] for o in owner])
        self.pi = np.zeros((self.horizon, L))
        self._suffix = suffix
        self._pi_ready = np.zeros(self.horizon, dtype=bool)
        self.pi[0] = _dual_weights(suffix[0], w0)
        self._pi_ready[0] = True
        return float(self.pi[0] @ w0)

    def _pi_at(self, t: int, w: np.ndarray) -> np.ndarray:
        if not self._pi_ready[t]:
            self.pi[t] = _dual_weights(self._suffix[t], w)
            self._pi_ready[t] = True
        return self.pi[t]

    def bound(self, prog, t: int) -> float:
        """Slots still needed from ``t`` on, whatever the schedule."""
        if t >= self.horizon:
            return math.inf
        per_flow = 0
        load: dict[tuple, float] = {}
        w = np.zeros(len(self.flat))
        for i, (links, (h, bits)) in enumerate(zip(self.paths, prog)):
            need_i = 0
            for k in range(h, len(links)):
                rem = self.demands[i] - (bits if k == h else 0.0)
                j = self.index[links[k]]
                w[j] = rem
                q = self.solo_suf[t, j] * self.T
                s = math.ceil(rem / q) if q > 0 else math.inf
                need_i += s
                l = links[k]
                for key in (("u", l.tx) if l.tx >= self.nv else ("t", l.tx),
                            ("u", l.rx) if l.rx >= self.nv else ("r", l.rx)):
                    load[key] = load.get(key, 0) + s
            per_flow = max(per_flow, need_i)
        lp = math.ceil(float(self._pi_at(t, w) @ w) * (1 - 1e-9) - 1e-9)
        return max(per_flow, lp, *load.values()) if load else max(per_flow, lp)

    # -- search -----------------------------------------------------------
    def subsets(self, current: tuple[Link, ...]) -> list[tuple[int, ...]]:
        got = self._subsets.get(current)
        if got is not None:
            return got
        k = len(current)
        clash = [[i != j and adjacent(current[i], current[j], self.nv) for j in range(k)]
                 for i in range(k)]
        out = []
        for size in range(k, 0, -1):
            for combo in itertools.combinations(range(k), size):
                if all(not clash[a][b] for a, b in itertools.combinations(combo, 2)):
                    out.append(combo)
        self._subsets[current] = out
        return out

    def rates(self, t: int, links: tuple[Link, ...]) -> np.ndarray:
        key = (t, links)
        r = self._rates.get(key)
        if r is None:
            r = link_rates(list(links), self.ctx.state(t), self.ctx, None, self._consts)
            self._rates[key] = r
        return r

    def solve(self, best: int, cap: int | None = None, deadline: float = math.inf):
        """Best schedule strictly shorter than ``best`` for the prepared paths, or None.

        ``exhausted`` is set when ``cap`` nodes or the deadline stopped the search early.
        """
        self.cap = min(self.budget, cap if cap is not None else self.budget)
        self.deadline = deadline
        self.exhausted = False
        self.best = best
        self.found = None
        self.failed: dict[int, list] = {}
        self.stack: list[tuple[int, tuple[Link, ...], np.ndarray]] = []
        self._dfs(0, tuple((0, 0.0) for _ in self.paths))
        return self.found

    def _dominated(self, t: int, vec) -> bool:
        memo = self.failed.get(t)
        if memo is None:
            return False
        arr, n = memo
        return n > 0 and bool(np.any(np.all(arr[:n] >= vec, axis=1)))

    def _remember(self, t: int, vec) -> None:
        memo = self.failed.get(t)
        if memo is None:
            memo = self.failed[t] = [np.empty((16, len(vec))), 0]
        arr, n = memo
        if n == arr.shape[0]:
            arr = memo[0] = np.concatenate([arr, np.empty_like(arr)])
        arr[n] = vec
        memo[1] = n + 1

    def _dfs(self, t: int, prog) -> None:
        if all(h >= len(p) for (h, _), p in zip(prog, self.paths)):
            self.best = t
            self.found = (t, list(self.stack))
            return
        if self.nodes >= self.cap or (self.nodes & 1023 == 0
                                      and time.perf_counter() > self.deadline):
            self.exhausted = True
            return
        self.nodes += 1
        if t + self.bound(prog, t) >= self.best:
            return
        vec = np.array([h * d + b for (h, b), d in zip(prog, self.demands)])
        if self._dominated(t, vec):
            return
        live = [i for i, ((h, _), p) in enumerate(zip(prog, self.paths)) if h < len(p)]
        current = tuple(self.paths[i][prog[i][0]] for i in live)
        for combo in self.subsets(current):
            links = tuple(current[j] for j in combo)
            r = self.rates(t, links)
            nxt = list(prog)
            for j, rate_j in zip(combo, r):
                i = live[j]
                h, b = prog[i]
                b += rate_j * self.T
                nxt[i] = (h + 1, 0.0) if b >= self.demands[i] else (h, b)
            self.stack.append((t, links, r))
            self._dfs(t + 1, tuple(nxt))
            self.stack.pop()
            if t + 1 >= self.best:
                break
        self._remember(t, vec)


def _dual_weights(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Dual-feasible weights pi (A.T @ pi <= 1) of the time-sharing relaxation.

    Any such pi turns remaining work into a valid bound pi @ w_remaining;
    the optimal one for the root work vector is returned.
    """
    scale = float(w.max(initial=0.0)) or 1.0
    res = linprog(np.ones(A.shape[1]), A_ub=-A / scale, b_ub=-w / scale, bounds=(0, None),
                  method="highs")
    if res.status != 0:
        return np.zeros(A.shape[0])
    pi = np.maximum(-res.ineqlin.marginals, 0.0) / scale
    worst = float((A.T @ pi).max(initial=0.0))
    return pi / worst if worst > 1.0 else pi


def relay_domains(flows: Sequence[Flow], ctx: SchedContext, horizon: int) -> dict[int, list[int]]:
    """Every relay any candidate set offers a blocked flow before ``horizon``."""
    out = {}
    for f in flows:
        if not f.blocked:
            continue
        dom: set[int] = set()
        for t in range(horizon):
            c = build_candidate_set(f, ctx.state(t), ctx.params, ctx.M, ctx.T,
                                    epsilon_threshold=ctx.epsilon_threshold)
            dom.update(c.combined)
        out[f.id] = sorted(dom)
    return out


def oracle(flows: Sequence[Flow], ctx: SchedContext, max_flows: int = 6, max_slots: int = 200,
           node_budget: int = 400_000, time_budget: float = 6.0) -> ScheduleResult:
    """Minimum-slot schedule serving every flow, seeded with the JRDS/TDMA incumbents.

    ``info['optimal']`` is False when the node or time budget ran out before
    the search closed, or no schedule serves every flow within M; the best
    schedule found is returned either way and ``info['lower_bound']`` holds
    the proven lower bound on the optimum.
    """
    _check_limits(flows, ctx, max_flows, max_slots)
    deadline = time.perf_counter() + time_budget
    flows = sorted(flows, key=lambda f: f.id)
    heur = [jrds(flows, ctx, np.random.default_rng(0)), tdma(flows, ctx, np.random.default_rng(0))]
    full = [h for h in heur if len(h.completed) == len(flows)]
    incumbent = min(full, key=lambda h: h.slots_used) if full else None
    best = incumbent.slots_used if incumbent else ctx.M + 1
    horizon = min(best, ctx.M)

    domains = relay_domains(flows, ctx, horizon)
    search = _Search(flows, ctx, horizon, node_budget)
    if any(not d for d in domains.values()):
        return _fallback(incumbent, heur, flows, ctx, "flow without any relay", search)

    options = []
    for f in flows:
        if f.blocked:
            options.append([(r, path_links(f, r)) for r in domains[f.id]])
        else:
            options.append([(None, path_links(f))])
    # cheap screening: each path's own interference-free time; good relays first
    floors = _path_floors(options, flows, ctx, horizon)
    for k, (opts, fl) in enumerate(zip(options, floors)):
        order = sorted(range(len(opts)), key=lambda j: (fl[j], -1 if opts[j][0] is None else opts[j][0]))
        options[k] = [(opts[j][0], opts[j][1], fl[j]) for j in order]

    # relay combinations by their interference-free floor, cheapest first
    ranked = sorted(((max(o[2] for o in choice), choice)
                     for choice in itertools.product(*options)), key=lambda rc: rc[0])

    found = None
    found_relays = None
    combos = 0
    open_bounds = []  # bounds of combinations not searched to the end
    for k, (floor, choice) in enumerate(ranked):
        if floor >= best:
            break
        left = node_budget - search.nodes
        if left <= 0 or time.perf_counter() > deadline:
            open_bounds.extend(r for r, _ in ranked[k:] if r < best)
            break
        root = math.ceil(search.prepare([o[1] for o in choice]) * (1 - 1e-9) - 1e-9)
        if root >= best:
            continue
        combos += 1
        # the most promising combination gets a deep dive, the rest share what is left
        share = left // 2 if combos == 1 else left // min(len(ranked) - k, 8)
        sol = search.solve(best, cap=search.nodes + max(share, 1), deadline=deadline)
        if sol is not None:
            best = sol[0]
            found, found_relays = sol, [o[0] for o in choice]
        if search.exhausted:
            open_bounds.append(max(root, floor))
    lower = min([best] + [r for r in open_bounds if r < best])
    exact = lower >= best

    if found is None:
        res = _fallback(incumbent, heur, flows, ctx,
                        "no improvement on the incumbent" if incumbent else "no full schedule", search)
        res.info.update(optimal=incumbent is not None and exact, combos=combos,
                        lower_bound=lower if incumbent else None)
        return res

    res = ScheduleResult("oracle", ctx.T, ctx.M, ctx.initial.n_vehicles)
    last: dict[int, int] = {}
    for t, links, r in found[1]:
        res.add(t, t + 1, [Activation(l, float(x)) for l, x in zip(links, r)])
        for l in links:
            last[l.flow] = t
    for f, relay in zip(flows, found_relays):
        n_hops = f.h_max
        res.outcomes[f.id] = FlowOutcome(f.id, relay, True, last[f.id],
                                         [f.demand_bits] * n_hops)
    res.info.update(optimal=exact, nodes=search.nodes, combos=combos, lower_bound=lower,
                    upper_bound=incumbent.slots_used if incumbent else None)
    return res


def _path_floors(options, flows, ctx: SchedContext, horizon: int) -> list[list[float]]:
    """Per option, slots its path needs alone at the best interference-free rate."""
    links = sorted({l for opts in options for _, p in opts for l in p},
                   key=lambda l: (l.flow, l.hop, l.tx, l.rx))
    tx = [l.tx for l in links]
    rx = [l.rx for l in links]
    best = np.zeros(len(links))
    for t in range(horizon):
        np.maximum(best, solo_rates(tx, rx, ctx.state(t), ctx.params), out=best)
    top = dict(zip(links, best))
    out = []
    for f, opts in zip(flows, options):
        row = []
        for _, path in opts:
            q = [top[l] * ctx.T for l in path]
            row.append(sum(math.ceil(f.demand_bits / x) if x > 0 else math.inf for x in q))
        out.append(row)
    return out


def _fallback(incumbent, heur, flows, ctx, why: str, search: _Search) -> ScheduleResult:
    src = incumbent or max(heur, key=lambda h: (len(h.completed), -h.slots_used))
    res = ScheduleResult("oracle", ctx.T, ctx.M, ctx.initial.n_vehicles,
                         segments=list(src.segments), outcomes=dict(src.outcomes))
    res.info.update(optimal=False, reason=why, nodes=search.nodes,
                    upper_bound=incumbent.slots_used if incumbent else None)
    return res
