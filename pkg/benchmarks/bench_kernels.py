"""numba vs pure-numpy timings for the hot kernels.

Each backend runs in its own interpreter because the switch is read at import:

    python3 benchmarks/bench_kernels.py            # both backends, side by side
    python3 benchmarks/bench_kernels.py --worker   # current backend only, JSON out
"""
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat=3):
    fn()  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def worker():
    from vortexring import backend, kernel_table, solve_profile, RingParams, velocity_many
    from vortexring.biotsavart import QuadratureRule, accumulate, source_nodes

    rng = np.random.default_rng(1)
    table = kernel_table()
    s = np.exp(rng.uniform(np.log(1e-8), np.log(1e4), 1_000_000))
    prof = solve_profile(1.0)
    params = RingParams()
    t = 1e-2
    nodes = source_nodes(prof, 0.1, 1.0, 0.0, 1.03, 0.02, QuadratureRule())
    r_in = 1.0 + 0.08 * rng.random(20)
    z_in = 0.08 * rng.random(20) - 0.04
    r_out = 1.5 + rng.random(100)
    z_out = rng.random(100) - 0.5
    res = {
        "backend": backend(),
        "table_eval_1e6": _best(lambda: table(s)),
        "kernel_sum_%d_nodes" % len(nodes[2]): _best(lambda: accumulate(1.03, 0.02, *nodes, table), 5),
        "velocity_20_core_points": _best(lambda: velocity_many(params, prof, t, r_in, z_in), 1),
        "velocity_100_far_points": _best(lambda: velocity_many(params, prof, t, r_out, z_out), 1),
    }
    print(json.dumps(res))


def main():
    rows = []
    for disable in ("0", "1"):
        env = dict(os.environ, VORTEXRING_DISABLE_NUMBA=disable)
        out = subprocess.run([sys.executable, __file__, "--worker"], env=env, check=True,
                             capture_output=True, text=True).stdout
        rows.append(json.loads(out.strip().splitlines()[-1]))
    keys = [k for k in rows[0] if k != "backend"]
    print(f"{'case':28s} {rows[0]['backend']:>10s} {rows[1]['backend']:>10s} {'speedup':>8s}")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:28s} {a:10.4f} {b:10.4f} {b / a:8.1f}x")


if __name__ == "__main__":
    worker() if "--worker" in sys.argv else main()
