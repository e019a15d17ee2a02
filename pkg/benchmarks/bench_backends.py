"""Compare the numba and numpy backends on the hot kernels and on a full
training run.

Usage: python3 benchmarks/bench_backends.py [--sizes 500,1000,2000] [--reps 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dsom import backends
from dsom.core import TrainConfig, train
from dsom.dissim import DissimMatrix
from dsom.topology import build_grid


def _best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        begin = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - begin)
    return best


def _random_dissim(rng, n):
    a = rng.random((n, n))
    m = a + a.T
    np.fill_diagonal(m, 0.0)
    return m


def bench_kernels(sizes, reps):
    rng = np.random.default_rng(0)
    grid = build_grid(5, 5)
    m = grid.num_neurons
    rows = []
    for n in sizes:
        values = _random_dissim(rng, n)
        assign = rng.integers(0, m, size=n).astype(np.int64)
        protos = rng.permutation(n)[:m].reshape(m, 1)
        costs = rng.random((m, n))
        points = rng.normal(size=(n, 3))
        for name, args in (
            ("cluster_sums", (values, assign, m)),
            ("set_sums", (values, protos)),
            ("greedy_select", (costs, 1)),
            ("pairwise_sq_euclidean", (points,)),
        ):
            timings = {}
            for backend_name in backends.available_backends():
                impl = getattr(backends.get_backend(backend_name), name)
                impl(*args)  # warmup (JIT compile on first call)
                timings[backend_name] = _best_of(lambda: impl(*args), reps)
            rows.append((name, n, timings))
    return rows


def bench_train(sizes, reps):
    rng = np.random.default_rng(1)
    grid = build_grid(5, 5)
    rows = []
    for n in sizes:
        matrix = DissimMatrix(_random_dissim(rng, n), [str(i) for i in range(n)])
        cfg = TrainConfig(num_steps=20, restarts=1, seed=0)
        timings = {}
        for backend_name in backends.available_backends():
            backends.set_backend(backend_name)
            train(matrix, grid, cfg)  # warmup
            timings[backend_name] = _best_of(lambda: train(matrix, grid, cfg), max(1, reps // 2))
        rows.append(("train[20 steps]", n, timings))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="500,1000,2000")
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    names = backends.available_backends()
    print(f"backends: {', '.join(names)}")
    header = f"{'kernel':<22} {'N':>6}"
    for name in names:
        header += f" {name + ' [ms]':>12}"
    if len(names) > 1:
        header += f" {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, n, timings in bench_kernels(sizes, args.reps) + bench_train(sizes, args.reps):
        line = f"{label:<22} {n:>6}"
        for name in names:
            line += f" {timings[name] * 1e3:>12.3f}"
        if "numpy" in timings and "numba" in timings and timings["numba"] > 0:
            line += f" {timings['numpy'] / timings['numba']:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
