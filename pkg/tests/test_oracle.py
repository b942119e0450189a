import math

import numpy as np
import pytest

from skyrelay.channel import rate, solo_sinr
from skyrelay.config import RunConfig
from skyrelay.engine import build_run
from skyrelay.relay import make_flow
from skyrelay.scenario import Timeline
from skyrelay.schedulers import SchedContext, jrds, tdma, validate_schedule
from skyrelay.schedulers.oracle import OracleLimitError, oracle, relay_domains

from conftest import make_state

T = 0.1


def ctx_for(state, params, M=200, sigma=1e-3):
    return SchedContext(Timeline(state, T), params, M, T, sigma)


def test_one_flow_equals_tdma(det_params):
    st = make_state([(0, 1000, 20), (0, 1150, 20)])
    f = [make_flow(0, 0, 1, 0.8e9, 200, T, st)]
    ctx = ctx_for(st, det_params)
    o = oracle(f, ctx)
    assert o.slots_used == tdma(f, ctx, np.random.default_rng(0)).slots_used
    assert o.info["optimal"]


def test_conflict_free_flows_take_max_solo_time(det_params):
    st = make_state([(0, 1000, 20), (0, 1100, 20), (2, 4000, 20), (2, 4250, 20)])
    fs = [make_flow(0, 0, 1, 1e9, 200, T, st), make_flow(1, 2, 3, 1e9, 200, T, st)]
    ctx = ctx_for(st, det_params, sigma=np.inf)
    solo = []
    for f in fs:
        r = rate(solo_sinr(f.src, f.dst, st, det_params), det_params)
        solo.append(math.ceil(f.demand_bits / (r * T)))
    o = oracle(fs, ctx)
    assert o.slots_used == max(solo)
    assert o.info["optimal"]
    assert validate_schedule(o, fs) == []


def test_refuses_over_limits(det_params):
    st = make_state([(0, 1000, 20), (0, 1100, 20)])
    f = [make_flow(0, 0, 1, 1e9, 200, T, st)]
    with pytest.raises(OracleLimitError, match="M <= 200"):
        oracle(f, SchedContext(Timeline(st, T), det_params, 2000, T, 1e-3))
    with pytest.raises(OracleLimitError, match="deterministic"):
        oracle(f, ctx_for(st, det_params.__class__()))
    with pytest.raises(OracleLimitError, match="flows <= 0"):
        oracle(f, ctx_for(st, det_params), max_flows=0)


def test_blocked_flow_uses_best_relay(det_params):
    st = make_state([(1, 1000, 20), (1, 1040, 20), (1, 1080, 20)], uavs=[(1040, 5.25, 0.0)])
    f = [make_flow(0, 0, 2, 0.3e9, 200, T, st)]
    ctx = ctx_for(st, det_params)
    assert relay_domains(f, ctx, 200)[0] == [1, 3]
    o = oracle(f, ctx)
    assert o.info["optimal"]
    assert o.slots_used <= tdma(f, ctx, np.random.default_rng(0)).slots_used
    assert o.outcomes[0].relay in (1, 3)
    assert validate_schedule(o, f) == []


@pytest.mark.parametrize("seed", [0, 8, 13])
def test_dominates_heuristics(seed):
    cfg = RunConfig(n_flows=2 + seed % 3, M=200).with_channel(fading_mode="deterministic")
    ctx, flows, rng = build_run(cfg, seed)
    o = oracle(flows, ctx, time_budget=2.0)
    j = jrds(flows, ctx, np.random.default_rng(0))
    t = tdma(flows, ctx, np.random.default_rng(0))
    assert validate_schedule(o, flows) == []
    if len(j.completed) == len(flows):
        assert o.slots_used <= j.slots_used
    if len(t.completed) == len(flows):
        assert o.slots_used <= t.slots_used
    lb = o.info.get("lower_bound")
    if lb is not None:
        assert lb <= o.slots_used
    if o.info["optimal"]:
        assert lb == o.slots_used
