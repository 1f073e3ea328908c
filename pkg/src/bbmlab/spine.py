"""Laplace spine walk: many-to-one checks, ballot probes, boundary moments.

The change-of-measure weight e^{S_n} has infinite variance against the
Laplace step whenever the test functional is unbounded above (the step MGF
radius is sqrt(2) < 2), so every Monte Carlo functional here is required
to be supported on {S_n <= K}; the constant functional is handled in
closed form instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .laws import displacement_law, spine_step_law
from .params import ModelParams, make_params
from .rng import generator
from .stats import EstimateCI, MeanStat

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class SpinePath:
    values: np.ndarray
    running_min: float
    running_max: float


@dataclass(frozen=True)
class PathIndicator:
    """f(S_1..S_n) = 1{S_n <= upper, min_k S_k >= -alpha}; upper <= 2 keeps
    the many-to-one weight e^{S_n} bounded."""

    upper: float
    alpha: float = math.inf

    def __post_init__(self):
        if self.upper > 2.0:
            raise ValueError("indicator upper bound must be <= 2 "
                             "(unbounded weight otherwise)")


@dataclass(frozen=True)
class BallotProbe:
    kind: str
    n: int
    alpha: float
    h: float
    a: float
    estimate: EstimateCI
    hits: int

    @property
    def starved(self) -> bool:
        return self.hits < 50


def simulate_spine(n: int, start: float,
                   key: tuple[int, int]) -> SpinePath:
    """Partial sums of i.i.d. Laplace(rate sqrt(2)) steps from `start`."""
    if n < 0:
        raise ValueError("n must be >= 0")
    gen = generator(key)
    law = spine_step_law(make_params(2.0))
    values = np.empty(n + 1)
    values[0] = start
    if n:
        values[1:] = start + np.cumsum(law.sample(gen, n))
    return SpinePath(values=values,
                     running_min=float(values.min()),
                     running_max=float(values.max()))


def _batched_endpoints(sample_steps, n: int, samples: int, gen,
                       batch: int = 50_000):
    """Yield (S_n, running_min over k=1..n) arrays batch by batch."""
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        steps = sample_steps(gen, (m, n))
        s = np.cumsum(steps, axis=1)
        yield s[:, -1], s.min(axis=1)
        done += m


def many_to_one_check(f: PathIndicator | str, n: int, samples: int,
                      key: tuple[int, int]):
    """Both sides of the many-to-one identity for a path functional.

    lhs: 2^n * E[f] along one displacement-walk ancestral line (linearity
    of expectation: all 2^n generation-n lines share this marginal).
    rhs: E[e^{S_n} f] over the Laplace spine walk.
    Returns (lhs, rhs) as EstimateCI.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if f == "one":
        # closed form: E[e^{S_n}] = (MGF at 1)^n = 2^n on both sides
        exact = float(2.0**n)
        e = EstimateCI(exact, 0.0, exact, exact, n_samples=samples)
        return e, e
    if not isinstance(f, PathIndicator):
        raise TypeError("f must be a PathIndicator or 'one'")

    params = make_params(2.0)
    disp = displacement_law(params)
    spine = spine_step_law(params)
    gen_l = generator((key[0], key[1] ^ 0x1))
    gen_r = generator((key[0], key[1] ^ 0x2))

    lhs_parts, rhs_parts = [], []
    for sn, smin in _batched_endpoints(disp.sample, n, samples, gen_l):
        ind = (sn <= f.upper) & (smin >= -f.alpha)
        lhs_parts.append(MeanStat.from_values(2.0**n * ind.astype(float)))
    for sn, smin in _batched_endpoints(spine.sample, n, samples, gen_r):
        ind = (sn <= f.upper) & (smin >= -f.alpha)
        rhs_parts.append(MeanStat.from_values(np.exp(sn) * ind))
    from .stats import pairwise_merge
    return (EstimateCI.from_meanstat(pairwise_merge(lhs_parts)),
            EstimateCI.from_meanstat(pairwise_merge(rhs_parts)))


def ballot_probe(kind: str, n: int, alpha: float, h: float, a: float,
                 samples: int, key: tuple[int, int]) -> BallotProbe:
    """Monte Carlo estimate of one ballot-type event probability.

    kinds: 'local_limit'     sup_z P(S_n in [z, z+1])
           'ballot'          P(min >= -alpha)
           'ballot_backward' P(min >= -alpha, S_n in [h-alpha, h-alpha+1])
           'three_factor'    P(min >= -alpha, S_n in [a, a+h])
    """
    if kind == "three_factor" and n > 400:
        raise ValueError("three_factor probes limited to n <= 400 "
                         "(event probability ~ n^{-3/2})")
    spine = spine_step_law(make_params(2.0))
    gen = generator(key)

    if kind == "local_limit":
        # histogram of S_n over unit bins, track the max bin
        lo, hi = -6.0 * math.sqrt(n), 6.0 * math.sqrt(n)
        nbins = int(hi - lo) + 1
        counts = np.zeros(nbins, dtype=np.int64)
        total = 0
        for sn, _ in _batched_endpoints(spine.sample, n, samples, gen):
            idx = np.floor(sn - lo).astype(np.int64)
            np.add.at(counts, np.clip(idx, 0, nbins - 1), 1)
            total += sn.size
        k = int(counts.max())
    else:
        k = 0
        total = 0
        for sn, smin in _batched_endpoints(spine.sample, n, samples, gen):
            if kind == "ballot":
                hit = smin >= -alpha
            elif kind == "ballot_backward":
                hit = (smin >= -alpha) & (sn >= h - alpha) & (sn <= h - alpha + 1)
            elif kind == "three_factor":
                hit = (smin >= -alpha) & (sn >= a) & (sn <= a + h)
            else:
                raise ValueError(f"unknown probe kind {kind!r}")
            k += int(hit.sum())
            total += sn.size

    p = k / total
    se = math.sqrt(p * (1 - p) / total)
    z = 1.959963984540054
    est = EstimateCI(p, se, max(p - z * se, 0.0), min(p + z * se, 1.0),
                     n_samples=total)
    return BallotProbe(kind=kind, n=n, alpha=alpha, h=h, a=a,
                       estimate=est, hits=k)


def boundary_identities(params: ModelParams, tol: float = 1e-10):
    """Quadrature of 2 * integral of w(v) * density(v) for w in
    {e^{-v}, v e^{-v}, v^2 e^{-v}}: targets (1, 0, 1)."""
    if not params.boundary:
        raise ValueError("boundary identities require mu = 2")
    law = displacement_law(params)

    def moment(k: int) -> float:
        # combined exponents: e^{-v} * pdf(v) written as a single exp so
        # the two factors cannot overflow/underflow separately
        def f(v):
            if v < 0:
                return 2.0 * v**k * (1 - law.p) * law.r_minus \
                    * math.exp((law.r_minus - 1.0) * v)
            return 2.0 * v**k * law.p * law.r_plus \
                * math.exp(-(law.r_plus + 1.0) * v)
        neg, err_n = integrate.quad(f, -np.inf, 0.0, epsabs=tol, epsrel=tol)
        pos, err_p = integrate.quad(f, 0.0, np.inf, epsabs=tol, epsrel=tol)
        if err_n + err_p > 100 * tol:
            raise RuntimeError(f"quadrature did not converge for moment {k}")
        return neg + pos

    return moment(0), moment(1), moment(2)
