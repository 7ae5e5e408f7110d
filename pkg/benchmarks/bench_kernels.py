#!/usr/bin/env python3
"""Benchmark the hot kernels on both execution paths.

Runs each kernel through its active handle (compiled when numba is on,
plain numpy otherwise) and through the always-interpreted twin, then
prints the best wall time per path.  Set FINCASCADE_NUMBA=0 to see the
fallback numbers; leave it unset to measure the compiled path.

    python benchmarks/bench_kernels.py --repeats 5
"""

import argparse
import time

import numpy as np

from fincascade import _kernels as kern


def best_time(make_args, fn, repeats):
    """Best wall time over repeats; fresh arguments each call because
    the simplex kernels mutate their tableau in place."""
    best = float("inf")
    for _ in range(repeats):
        args = make_args()
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_gauss(rng, repeats):
    n = 250
    A = rng.uniform(-1.0, 1.0, (n, n)) + n * np.eye(n)
    b = rng.uniform(-1.0, 1.0, n)
    make = lambda: (A, b, 1e-12)
    return [
        ("gauss_solve", "active", best_time(make, kern.gauss_solve, repeats)),
        ("gauss_solve", "plain", best_time(make, kern.gauss_solve_py, repeats)),
    ]


def bench_power(rng, repeats):
    n = 400
    M = rng.uniform(0.0, 1.0, (n, n))
    x0 = np.ones(n)
    make = lambda: (M, x0, 300, 1e-14)
    return [
        ("power_iter", "active", best_time(make, kern.power_iter, repeats)),
        ("power_iter", "plain", best_time(make, kern.power_iter_py, repeats)),
    ]


def bench_simulate(rng, repeats):
    n = 100
    W = rng.uniform(0.0, 1.0, (n, n))
    np.fill_diagonal(W, 0.0)
    W *= 0.9 / W.sum(axis=1).max()
    drive = rng.uniform(-1.0, 1.0, n)
    pen = rng.uniform(0.0, 2.0, n)
    x0 = rng.uniform(-5.0, 5.0, n)
    make = lambda: (W, drive, pen, x0, 3000)
    return [
        ("simulate_steps", "active", best_time(make, kern.simulate_steps, repeats)),
        ("simulate_steps", "plain", best_time(make, kern.simulate_steps_py, repeats)),
    ]


def bench_simplex(rng, repeats):
    m, k = 60, 600
    # nonnegative rows keep the region bounded, so the run ends at an
    # optimum instead of escaping along a ray after a few pivots
    A = rng.uniform(0.05, 1.0, (m, k))
    rhs = rng.uniform(0.5, 4.0, m)
    cost = rng.uniform(-1.0, 0.5, k)
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A
    T[:m, k : k + m] = np.eye(m)
    T[:m, -1] = rhs
    T[m, :k] = cost

    def make():
        return T.copy(), np.arange(k, k + m, dtype=np.int64), k + m, 1e-9, 1e-11, 20_000, 10_000

    rows = [
        ("simplex_iterate", "active", best_time(make, kern.simplex_iterate, repeats)),
        ("simplex_iterate", "loops", best_time(make, kern.simplex_iterate_loops_py, repeats)),
        ("simplex_iterate", "numpy", best_time(make, kern.simplex_iterate_numpy, repeats)),
    ]
    status, iters = kern.simplex_iterate_numpy(*make())
    print(f"# simplex problem: {m} rows x {k} columns, status {status}, {iters} pivots")
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"# numba enabled: {kern.NUMBA_ENABLED}")

    rows = []
    rows += bench_gauss(rng, args.repeats)
    rows += bench_power(rng, args.repeats)
    rows += bench_simulate(rng, args.repeats)
    rows += bench_simplex(rng, args.repeats)

    width = max(len(name) for name, _, _ in rows)
    base = {}
    for name, path, t in rows:
        base.setdefault(name, t)
        ratio = t / base[name] if base[name] > 0 else float("inf")
        print(f"{name:<{width}}  {path:<6}  {t * 1e3:9.3f} ms  {ratio:7.2f}x active")


if __name__ == "__main__":
    main()
