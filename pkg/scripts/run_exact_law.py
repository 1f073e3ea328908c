"""Compute the contour-inversion law of N for mu = 2.0 and mu = 2.1.

Long-running (hours): each point on the contour is a dense quasi-Newton
solve of the generating-function fixed point.  Results are saved as npz
files next to the Monte Carlo archives.
"""
from __future__ import annotations

import os
import time

import numpy as np

from bbmlab.exact import exact_law

OUT = "bbmlab-data"


def run(mu: float, n_max: int, decay: float, tag: str) -> None:
    if os.path.exists(f"{OUT}/{tag}.npz"):
        print(f"{tag}: already present, skipping", flush=True)
        return
    t0 = time.time()
    law = exact_law(mu=mu, n_max=n_max, decay=decay, progress=True)
    dt = time.time() - t0
    np.savez_compressed(
        f"{OUT}/{tag}.npz", pmf=law.pmf, overflow=law.overflow, mu=mu,
        n_max=n_max, decay=decay)
    print(f"{tag}: done in {dt / 60:.1f} min, overflow={law.overflow:.3e}",
          flush=True)
    for n in (100, 1000, 10000):
        if n < n_max:
            print(f"  n*sf({n}) = {n * law.sf(n):.6f}", flush=True)


if __name__ == "__main__":
    run(2.1, 2048, 8.0, "exact_mu21")
    run(2.0, 16384, 4.0, "exact_mu2")
