"""Benchmark the compiled kernels against the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py [--samples N]

Both backends consume randomness identically, so the comparison is on
equal work: same trees, same node counts.
"""

from __future__ import annotations

import argparse
import time

from bbmlab import rng
from bbmlab.kernels import pykernels


def _bench(mod, n_samples: int, seed: int):
    total_work = 0
    t0 = time.perf_counter()
    for i in range(n_samples):
        kh, kl = rng.stream_key(seed, rng.DOMAIN_BRW, i)
        count, status, pruned, work, _ = mod.brw_explore(
            kh, kl, 0.0, 0.0, 8.0, 1 - (2 + 2**0.5) / 4,
            2**0.5 - 1, 2**0.5 + 1, 10**7, 10**5, 1 << 22)
        total_work += work
    dt = time.perf_counter() - t0
    return dt, total_work


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=None)
    args = ap.parse_args()

    try:
        from bbmlab.kernels import ckernels
    except ImportError:
        ckernels = None
    print(f"compiled backend available: {ckernels is not None}")

    n_c = args.samples or 20_000
    n_py = args.samples or 300

    if ckernels is not None:
        dt, work = _bench(ckernels, n_c, seed=777)
        print(f"cython : {n_c} samples, {work} nodes, {dt:.2f}s "
              f"-> {1e9 * dt / work:.1f} ns/node")
        c_rate = work / dt
    else:
        c_rate = None

    dt, work = _bench(pykernels, n_py, seed=777)
    print(f"python : {n_py} samples, {work} nodes, {dt:.2f}s "
          f"-> {1e9 * dt / work:.1f} ns/node")
    if c_rate:
        print(f"speedup: {c_rate / (work / dt):.1f}x")


if __name__ == "__main__":
    main()
