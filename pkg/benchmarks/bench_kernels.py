"""Time the compiled link kernels against the numpy reference.

    python3 benchmarks/bench_kernels.py --links 10 40 160 --repeat 50
"""

import argparse
import timeit

import numpy as np

from skyrelay import _pykernels
from skyrelay.channel import kernel_consts
from skyrelay.config import ChannelParams

try:
    from skyrelay import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def make_case(k, rng, n_vehicles=400, n_uavs=5, road=6000.0):
    n = n_vehicles + n_uavs
    pos = np.zeros((n, 3))
    pos[:n_vehicles, 0] = rng.uniform(0, road, n_vehicles)
    pos[:n_vehicles, 1] = rng.integers(0, 3, n_vehicles) * 3.5
    pos[n_vehicles:, 0] = rng.uniform(0, road, n_uavs)
    pos[n_vehicles:, 2] = 100.0
    is_uav = np.zeros(n, dtype=bool)
    is_uav[n_vehicles:] = True
    nodes = rng.choice(n, size=2 * k, replace=False)  # k <= n // 2
    tx, rx = nodes[:k].astype(np.intp), nodes[k:].astype(np.intp)
    return tx, rx, pos, is_uav


def bench(mod, name, k, repeat, rng):
    tx, rx, pos, is_uav = make_case(k, rng)
    consts = kernel_consts(ChannelParams(), 6000.0)
    calls = {
        "power_matrix": lambda: mod.power_matrix(tx, rx, pos, is_uav, consts),
        "link_sinr": lambda: mod.link_sinr(tx, rx, pos, is_uav, None, consts),
        "conflict_codes": lambda: mod.conflict_codes(tx, rx, tx, rx, pos, is_uav, consts, 1e-3),
    }
    out = {}
    for fn, call in calls.items():
        t = min(timeit.repeat(call, number=repeat, repeat=3)) / repeat
        out[fn] = t * 1e6
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--links", type=int, nargs="+", default=[10, 40, 160])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not available; only the numpy backend is timed")
    print(f"{'kernel':<16}{'links':>6}{'numpy us':>12}{'cython us':>12}{'speedup':>9}")
    for k in args.links:
        py = bench(_pykernels, "numpy", k, args.repeat, np.random.default_rng(args.seed))
        cy = (bench(_ckernels, "cython", k, args.repeat, np.random.default_rng(args.seed))
              if _ckernels else {})
        for fn, t_py in py.items():
            t_cy = cy.get(fn)
            extra = f"{t_cy:12.1f}{t_py / t_cy:9.1f}x" if t_cy else f"{'-':>12}{'-':>9}"
            print(f"{fn:<16}{k:>6}{t_py:12.1f}{extra}")


if __name__ == "__main__":
    main()
