import json

import numpy as np
import pytest

from skyrelay.config import ConfigError, RunConfig, load_config
from skyrelay.engine import (
    CSV_HEADER, apply_axis, build_run, generate_flows, mean_rows, read_csv, run_replication,
    sweep, throughputs, write_csv,
)
from skyrelay.scenario import scenario_from_config
from skyrelay.channel import v2v_range

from conftest import make_state


def test_generate_flows_basic():
    cfg = RunConfig()
    st = scenario_from_config(cfg.scenario, 0)
    fs = generate_flows(st, 1, (0.1, 1.0), np.random.default_rng(0), 2000, 0.1,
                        v2v_range(cfg.channel))
    assert len(fs) == 1 and fs[0].src != fs[0].dst
    assert st.distance(fs[0].src, fs[0].dst) <= v2v_range(cfg.channel)


def test_generate_flows_deterministic_and_distinct():
    cfg = RunConfig()
    _, a, _ = build_run(cfg, 11)
    _, b, _ = build_run(cfg, 11)
    assert a == b
    assert len({(f.src, f.dst) for f in a}) == 80


def test_demand_mean():
    cfg = RunConfig()
    st = scenario_from_config(cfg.scenario, 0)
    fs = generate_flows(st, 10_000, (0.1, 1.0), np.random.default_rng(1), 2000, 0.1,
                        v2v_range(cfg.channel))
    q = np.array([f.demand_rate for f in fs]) / 1e9
    assert q.mean() == pytest.approx(0.55, rel=0.02)
    assert q.min() >= 0.1 and q.max() <= 1.0
    assert fs[0].demand_bits == pytest.approx(fs[0].demand_rate * 2000 * 0.1)


def test_too_few_pairs():
    st = make_state([(0, 0, 20), (0, 3000, 20)])
    with pytest.raises(ConfigError):
        generate_flows(st, 1, (0.1, 1.0), np.random.default_rng(0), 2000, 0.1, 2188.0)


def test_run_replication_report():
    cfg = RunConfig(n_flows=10, M=500)
    r = run_replication(cfg, 3, "rcs")
    assert r.completed + r.failed == 10
    assert r.throughput_delivered_gbps >= 0
    assert set(r.row()) == set(CSV_HEADER)
    assert r == run_replication(cfg, 3, "rcs")  # wall time excluded from equality


def test_throughput_definitions():
    cfg = RunConfig(n_flows=6, M=400)
    r = run_replication(cfg, 2, "tdma")
    done = set(r.result.completed)
    n = r.result.slots_used
    q = sum(f.demand_rate for f in r.flows if f.id in done) / 1e9
    assert r.throughput_paper_gbps == pytest.approx(q / (n * 0.1))
    assert r.throughput_delivered_gbps == pytest.approx(q * 400 * 0.1 / (n * 0.1))
    # the two columns differ by exactly the factor M*T
    assert r.throughput_delivered_gbps == pytest.approx(r.throughput_paper_gbps * 40.0)


def test_apply_axis():
    cfg = RunConfig()
    assert apply_axis(cfg, "sigma", 1e-5).sigma == 1e-5
    assert apply_axis(cfg, "n_flows", 40).n_flows == 40
    m = apply_axis(cfg, "speed", 60).scenario.mobility
    assert m.kind == "PP" and m.vbar_kmh == 60
    m = apply_axis(cfg, "low_speed_pct", 30).scenario.mobility
    assert m.kind == "IPP" and m.p_low == pytest.approx(0.3)
    with pytest.raises(ConfigError):
        apply_axis(cfg, "colour", 1)


def test_sweep_and_csv(tmp_path):
    cfg = RunConfig(n_flows=5, M=200)
    reps = sweep(cfg, "sigma", [1e-4, 1e-2], [0, 1], ["tdma", "jrds"])
    assert len(reps) == 8
    assert [(r.sigma, r.seed, r.scheme) for r in reps[:3]] == \
        [(1e-4, 0, "tdma"), (1e-4, 0, "jrds"), (1e-4, 1, "tdma")]
    out = tmp_path / "s.csv"
    write_csv(reps + mean_rows(reps, "sigma"), out)
    rows = read_csv(out)
    assert list(rows[0]) == list(CSV_HEADER)
    assert len(rows) == 12
    assert rows[-1]["seed"] == "mean"
    with pytest.raises(ConfigError):
        sweep(cfg, "sigma", [], [0], ["tdma"])


def test_sweep_parallel_matches_serial():
    cfg = RunConfig(n_flows=5, M=150)
    a = sweep(cfg, "n_flows", [3, 5], [0], ["rcs"])
    b = sweep(cfg, "n_flows", [3, 5], [0], ["rcs"], workers=2)
    assert a == b


def test_config_roundtrip(tmp_path):
    cfg = RunConfig(n_flows=7, M=300, sigma=1e-5).with_channel(fading_mode="deterministic")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_json()))
    back = load_config(p)
    assert back.n_flows == 7 and back.M == 300 and back.sigma == 1e-5
    assert back.channel.fading_mode == "deterministic"
    assert back.channel.pt == pytest.approx(cfg.channel.pt)
    assert back.scenario == cfg.scenario


@pytest.mark.parametrize("doc", [
    {"bogus": {}},
    {"run": {"n_flows": 0}},
    {"run": {"demand_gbps": [1.0, 0.1]}},
    {"run": {"scheme": "magic"}},
    {"channel": {"fading": "maybe"}},
    {"channel": {"colour": 3}},
])
def test_config_errors(tmp_path, doc):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        load_config(p)


def test_config_unreadable(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "x.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_flow_sets_nested_across_n():
    _, small, _ = build_run(RunConfig(n_flows=40), 3)
    _, big, _ = build_run(RunConfig(n_flows=160), 3)
    assert big[:40] == small
