"""Compare the numba and numpy kernels on ensemble sweeps.

    python benchmarks/bench_sweep.py [--modes 1000 10000] [--points 2000] [--repeat 5]

The first numba call compiles (or loads from cache); it is timed separately
and excluded from the per-call figures.
"""

import argparse
import time

import numpy as np

from gravdec import _kernels
from gravdec.core import Scenario
from gravdec.ensemble import FrequencyDistribution, StateTemplate, default_time_grid, run_sweep, sample_partition


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, nargs="+", default=[1000, 10000])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    sc = Scenario(1e-6)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable; timing numpy only")
    print(f"{'modes':>8} {'points':>7} " + " ".join(f"{b + ' [s]':>12}" for b in backends) + f" {'speedup':>8} {'max dlog':>9}")
    for n in args.modes:
        part = sample_partition(FrequencyDistribution.uniform(1e11, 5e11), n, n, 1,
                                StateTemplate(1.0, temperature=10.0), seed=2016)
        grid = default_time_grid(part, sc, points=args.points)
        if "numba" in backends:
            t0 = time.perf_counter()
            run_sweep(part, sc, grid[:2], backend="numba")
            warm = time.perf_counter() - t0
        res = {b: run_sweep(part, sc, grid, backend=b) for b in backends}
        secs = {b: best_of(lambda b=b: run_sweep(part, sc, grid, backend=b), args.repeat) for b in backends}
        if len(backends) == 2:
            a, c = res["numpy"], res["numba"]
            dlog = max(np.max(np.abs(a.log_gamma - c.log_gamma)), np.max(np.abs(a.log_b_mac - c.log_b_mac)))
            extra = f" {secs['numpy'] / secs['numba']:>7.1f}x {dlog:>9.1e}"
        else:
            extra = f" {'-':>8} {'-':>9}"
        print(f"{n:>8} {args.points:>7} " + " ".join(f"{secs[b]:>12.4f}" for b in backends) + extra)
    if "numba" in backends:
        print(f"numba warm-up (compile or cache load): {warm:.2f} s")


if __name__ == "__main__":
    main()
