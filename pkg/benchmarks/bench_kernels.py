#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the pair-layout and grouped-layout objective/gradient kernels on
synthetic workloads sized like the Monte Carlo studies, plus one full
rank-test run per backend. Select a backend at runtime with
MRCTEST_BACKEND=numpy|numba; this script times both in one process.

Usage: python benchmarks/bench_kernels.py [--n 100] [--repeat 50]
"""

import argparse
import time

import numpy as np

from mrctest import _kernels
from mrctest.objective import ObjectiveContext, SmoothedObjective
from mrctest.rank_test import TestConfig, run_test
from mrctest.simulate import ScenarioConfig, simulate_dataset


def _time(fn, repeat):
    fn()  # warm up (numba compilation, cache loads)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_backend(name, ds, repeat):
    prev = _kernels.set_backend(name)
    try:
        ctx = ObjectiveContext.from_dataset(ds)
        ev = SmoothedObjective(ctx)
        beta = np.array([0.6, 0.8])
        h = 0.4

        rows = {}
        rows["grouped value+grad"] = _time(lambda: ev.value_and_gradient(beta, h), repeat)
        rows["grouped exact"] = _time(lambda: ev.exact(beta), repeat)

        # force the pair layout by jittering covariates to distinct rows
        rng = np.random.default_rng(0)
        Xj = ds.X + rng.normal(0, 1e-9, ds.X.shape)
        ctx_pair = ObjectiveContext(ds.y, Xj, ds.subject_codes(), n=ds.n)
        assert not ctx_pair.grouped
        evp = SmoothedObjective(ctx_pair)
        rows["pair value+grad"] = _time(lambda: evp.value_and_gradient(beta, h), repeat)
        rows["pair exact"] = _time(lambda: evp.exact(beta), repeat)

        t0 = time.perf_counter()
        run_test(ds, TestConfig(B=25, Q=3, seed=1))
        rows["rank test (B=25)"] = time.perf_counter() - t0
        return rows
    finally:
        _kernels.set_backend(prev)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100, help="subjects in the workload")
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    ds = simulate_dataset(ScenarioConfig(n=args.n, beta1=0.25, gamma1=0.1), 7)
    ctx = ObjectiveContext.from_dataset(ds)
    print(
        f"workload: n={ds.n} N={ds.N} strict pairs={ctx.num_pairs} "
        f"grouped={ctx.grouped}"
    )

    results = {}
    for name in _kernels.available_backends():
        results[name] = bench_backend(name, ds, args.repeat)

    kernels = list(next(iter(results.values())))
    both = "numba" in results and "numpy" in results
    width = max(len(k) for k in kernels)
    header = f"{'kernel':<{width}}" + "".join(f"{b:>14}" for b in results)
    if both:
        header += f"{'numba speedup':>16}"
    print(header)
    for k in kernels:
        line = f"{k:<{width}}" + "".join(f"{results[b][k] * 1e3:>12.3f}ms" for b in results)
        if both and results["numba"][k] > 0:
            line += f"{results['numpy'][k] / results['numba'][k]:>15.1f}x"
        print(line)


if __name__ == "__main__":
    main()
