import numpy as np
import pytest

from skyrelay.config import ChannelParams, RunConfig
from skyrelay.scenario import RoadLayout, ScenarioState


def make_state(vehicles, uavs=(), road=6000.0, lanes=3, coverage=500.0, uav_speed=20.0,
               orbit=100.0, height=100.0):
    """Hand-placed snapshot. ``vehicles`` holds (lane, x, speed); ``uavs`` holds (cx, cy, phase)."""
    v = np.array(vehicles, dtype=float).reshape(-1, 3)
    u = np.array(uavs, dtype=float).reshape(-1, 3)
    k = len(u)
    return ScenarioState(
        layout=RoadLayout(lanes, 3.5, road),
        slot=0,
        lane=v[:, 0].astype(np.intp),
        x=v[:, 1].copy(),
        speed=v[:, 2].copy(),
        uav_center=u[:, :2].copy(),
        uav_orbit_radius=np.full(k, orbit),
        uav_phase=u[:, 2].copy(),
        uav_height=np.full(k, height),
        uav_speed=np.full(k, uav_speed),
        coverage_radius=coverage,
    )


@pytest.fixture
def det_params():
    return ChannelParams(fading_mode="deterministic")


@pytest.fixture
def small_cfg():
    return RunConfig(n_flows=4, M=200).with_channel(fading_mode="deterministic")


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
