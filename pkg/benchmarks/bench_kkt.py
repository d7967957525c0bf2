#!/usr/bin/env python3
"""Benchmark the block-tridiagonal KKT kernels: numba @njit vs pure numpy.

Two workloads:
  * raw factor+solve on representative quasi-definite block systems at a
    range of horizon lengths,
  * one full interior-point solve of the bundled default scenario's k = 0
    problem through each backend.

Run:  python benchmarks/bench_kkt.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from hema.kernels import get_backend
from hema.ocp import assemble, solve
from hema.scenarios import load_scenario
from hema.scheduling import schedule


def make_system(n, b=6, seed=0):
    """Random symmetric quasi-definite block-tridiagonal system."""
    rng = np.random.default_rng(seed)
    diag = np.zeros((n, b, b))
    sub = rng.standard_normal((n, b, b)) * 0.3
    for i in range(n):
        a = rng.standard_normal((b, b))
        spd = a @ a.T + b * np.eye(b)
        spd[b - 1, b - 1] = -abs(rng.standard_normal()) - 1.0  # dual row
        diag[i] = 0.5 * (spd + spd.T)
    rhs = rng.standard_normal(n * b)
    return diag, sub, rhs


def time_backend(backend, n, repeats):
    best = np.inf
    for r in range(repeats):
        diag, sub, rhs = make_system(n, seed=r)
        t0 = time.perf_counter()
        fact = backend.factor(diag, sub)
        x = backend.solve(fact, sub, rhs)
        best = min(best, time.perf_counter() - t0)
        assert np.all(np.isfinite(x))
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = {name: get_backend(name) for name in ("numpy", "numba")}

    # warm up JIT outside the timed region
    d, s, r = make_system(8)
    backends["numba"].solve(backends["numba"].factor(d, s), s, r)

    print(f"{'N':>6} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for n in (30, 90, 180, 360, 720):
        t_np = time_backend(backends["numpy"], n, args.repeats)
        t_nb = time_backend(backends["numba"], n, args.repeats)
        print(f"{n:>6} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>9.1f}x")

    print("\nfull interior-point solve, default scenario, N = 360:")
    sc = load_scenario("default")
    stages = schedule(sc.plan, sc.m0, sc.fan_map, sc.table, sc.limits,
                      sc.aero, sc.battery)
    prob = assemble(stages, sc.m0, sc.E0, sc.battery, sc.limits, lam=sc.lam)
    solve(prob, backend="numba")  # warm
    for name in ("numpy", "numba"):
        best = np.inf
        for _ in range(max(args.repeats // 2, 1)):
            t0 = time.perf_counter()
            sol = solve(prob, backend=name)
            best = min(best, time.perf_counter() - t0)
        print(f"  {name:>6}: {best * 1e3:8.1f} ms  "
              f"({sol.status}, {sol.iterations} iterations)")


if __name__ == "__main__":
    main()
