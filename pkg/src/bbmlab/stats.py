"""Estimators and tests turning raw samples into quantitative claims.

N has infinite mean, so only truncated and threshold statistics are
expressible here.  Mean-type accumulators merge by pairwise tree reduction
in batch-index order, which makes pooled results bit-reproducible for any
worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


# ---------------------------------------------------------------------------
# mergeable accumulators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeanStat:
    """Sufficient statistics for a mean: mergeable across disjoint batches."""

    n: int = 0
    s: float = 0.0
    s2: float = 0.0

    @classmethod
    def from_values(cls, values) -> "MeanStat":
        v = np.asarray(values, dtype=float)
        return cls(n=v.size, s=float(v.sum()), s2=float(np.sum(v * v)))

    def merge(self, other: "MeanStat") -> "MeanStat":
        return MeanStat(self.n + other.n, self.s + other.s, self.s2 + other.s2)

    @property
    def mean(self) -> float:
        return self.s / self.n

    @property
    def stderr(self) -> float:
        if self.n < 2:
            return math.inf
        var = max(self.s2 / self.n - self.mean**2, 0.0) * self.n / (self.n - 1)
        return math.sqrt(var / self.n)


def pairwise_merge(items: list):
    """Fixed-order pairwise tree reduction (deterministic pooled results)."""
    items = list(items)
    if not items:
        raise ValueError("nothing to merge")
    while len(items) > 1:
        nxt = [items[i].merge(items[i + 1]) if i + 1 < len(items)
               else items[i] for i in range(0, len(items), 2)]
        items = nxt
    return items[0]


@dataclass(frozen=True)
class EstimateCI:
    value: float
    stderr: float
    ci_low: float
    ci_high: float
    level: float = 0.95
    n_samples: int = 0

    @classmethod
    def from_meanstat(cls, m: MeanStat, level: float = 0.95) -> "EstimateCI":
        z = sps.norm.ppf(0.5 + level / 2.0)
        return cls(value=m.mean, stderr=m.stderr,
                   ci_low=m.mean - z * m.stderr, ci_high=m.mean + z * m.stderr,
                   level=level, n_samples=m.n)


# ---------------------------------------------------------------------------
# censored empirical tails
# ---------------------------------------------------------------------------

@dataclass
class EmpiricalTail:
    """Sampled counts with right-censoring at a common threshold."""

    values: np.ndarray            # stored value, == censor_threshold if censored
    censored: np.ndarray          # bool mask
    censor_threshold: int | None = None

    @classmethod
    def from_samples(cls, values, statuses=None,
                     censor_threshold: int | None = None) -> "EmpiricalTail":
        v = np.asarray(values, dtype=np.int64)
        if statuses is not None:
            cen = np.asarray(
                [s == "count_capped" for s in statuses], dtype=bool)
        else:
            cen = (v >= censor_threshold) if censor_threshold else \
                np.zeros(v.size, dtype=bool)
        return cls(values=v, censored=cen, censor_threshold=censor_threshold)

    @property
    def total(self) -> int:
        return int(self.values.size)

    def _check_threshold(self, n: int):
        if self.censor_threshold is not None and n > self.censor_threshold:
            raise ValueError(
                f"tail query at n={n} beyond censor threshold "
                f"{self.censor_threshold}")

    def exceed_count(self, n: int) -> int:
        self._check_threshold(n)
        return int(np.count_nonzero(self.values >= n))


def _binom_ci(k: int, n: int, level: float = 0.95):
    """Exact (Clopper-Pearson) binomial interval."""
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else sps.beta.ppf(alpha / 2, k, n - k + 1)
    hi = 1.0 if k == n else sps.beta.ppf(1 - alpha / 2, k + 1, n - k)
    return lo, hi


def tail_ratio(tail: EmpiricalTail, n: int, level: float = 0.95) -> EstimateCI:
    """n * P(N >= n) with exact binomial CI."""
    k = tail.exceed_count(n)
    total = tail.total
    p = k / total
    lo, hi = _binom_ci(k, total, level)
    return EstimateCI(value=n * p, stderr=n * math.sqrt(p * (1 - p) / total),
                      ci_low=n * lo, ci_high=n * hi, level=level,
                      n_samples=total)


def truncated_mean_offset(tail: EmpiricalTail, n: int) -> EstimateCI:
    """E[N 1{N <= n}] - log n (censored samples contribute 0 to the mean)."""
    tail._check_threshold(n)
    contrib = np.where((tail.values <= n) & ~tail.censored, tail.values, 0)
    m = MeanStat.from_values(contrib)
    z = sps.norm.ppf(0.975)
    val = m.mean - math.log(n)
    return EstimateCI(value=val, stderr=m.stderr, ci_low=val - z * m.stderr,
                      ci_high=val + z * m.stderr, n_samples=m.n)


def empirical_log_laplace(tail: EmpiricalTail, lam: float) -> MeanStat:
    """Sufficient statistics of e^{-lam*N}; censored mass treated as 0.

    Requires lam * censor_threshold >= 30 so the neglected censored
    contribution is below e^{-30}.
    """
    if tail.censor_threshold is not None and lam * tail.censor_threshold < 30:
        raise ValueError("lam * censor_threshold must be >= 30")
    w = np.where(tail.censored, 0.0, np.exp(-lam * tail.values.astype(float)))
    return MeanStat.from_values(w)


def laplace_expansion_check(tail: EmpiricalTail, lam: float) -> EstimateCI:
    """Linear coefficient (phi(lam) - lam*log(lam)) / lam.

    E[e^{-lam N}] = 1 + lam log lam + (1 + log 2) lam + o(lam), so the
    returned value converges to 1 + log 2 as lam -> 0.
    """
    m = empirical_log_laplace(tail, lam)
    phi = math.log(m.mean)
    value = (phi - lam * math.log(lam)) / lam
    se = m.stderr / m.mean / lam  # delta method through log and /lam
    z = sps.norm.ppf(0.975)
    return EstimateCI(value=value, stderr=se, ci_low=value - z * se,
                      ci_high=value + z * se, n_samples=m.n)


def functional_equation_check(nx_tail: EmpiricalTail, z_counts, lam: float,
                              x: float, phi0: float, phi0_se: float = 0.0):
    """Both sides of the stopping-line Laplace identity at (lam, x).

    lhs = log E[e^{-lam * N_x}] from direct samples; rhs reassembles it
    from phi0 = log E[e^{-lam * N}] and Z_x samples:
        x > 0:  lam + log E[exp((phi0 - lam) Z_x)]
        x < 0:  log E[exp(phi0 * Z_x)]
    """
    ml = empirical_log_laplace(nx_tail, lam)
    lhs_val = math.log(ml.mean)
    lhs_se = ml.stderr / ml.mean

    z = np.asarray(z_counts, dtype=float)
    expo = (phi0 - lam) if x > 0 else phi0
    w = np.exp(expo * z)
    mr = MeanStat.from_values(w)
    rhs_val = (lam if x > 0 else 0.0) + math.log(mr.mean)
    # delta method: through log, plus sensitivity to the phi0 estimate
    dz = float(np.mean(w * z)) / mr.mean
    rhs_se = math.sqrt((mr.stderr / mr.mean) ** 2 + (dz * phi0_se) ** 2)

    zq = sps.norm.ppf(0.975)
    lhs = EstimateCI(lhs_val, lhs_se, lhs_val - zq * lhs_se,
                     lhs_val + zq * lhs_se, n_samples=ml.n)
    rhs = EstimateCI(rhs_val, rhs_se, rhs_val - zq * rhs_se,
                     rhs_val + zq * rhs_se, n_samples=mr.n)
    return lhs, rhs


def loglog_slope(tail: EmpiricalTail, n_grid, min_hits: int = 50) -> EstimateCI:
    """Weighted LS slope of log P(N >= n) against log n.

    Grid points with fewer than `min_hits` exceedances are dropped; points
    are weighted by the inverse variance of the log-count (~1/hits).
    """
    xs, ys, ws = [], [], []
    for n in n_grid:
        k = tail.exceed_count(int(n))
        if k < min_hits:
            continue
        p = k / tail.total
        xs.append(math.log(n))
        ys.append(math.log(p))
        ws.append(k)  # var(log p_hat) ~ (1-p)/(p n) ~ 1/hits
    if len(xs) < 3:
        raise ValueError("need at least 3 grid points with enough hits")
    x = np.asarray(xs)
    y = np.asarray(ys)
    w = np.asarray(ws, dtype=float)
    xm = np.average(x, weights=w)
    ym = np.average(y, weights=w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    resid = y - ym - slope * (x - xm)
    dof = max(len(xs) - 2, 1)
    se = float(math.sqrt(max(np.sum(w * resid**2) / dof, 1e-300) / sxx))
    z = sps.norm.ppf(0.975)
    return EstimateCI(slope, se, slope - z * se, slope + z * se,
                      n_samples=tail.total)


# ---------------------------------------------------------------------------
# two-sample comparison under shared censoring
# ---------------------------------------------------------------------------

def two_sample_rank_test(a: EmpiricalTail, b: EmpiricalTail) -> float:
    """Rank test on uncensored parts + binomial test on censored fractions.

    Under H0 (equality in law with a shared censor threshold) both
    components are valid; they are combined by Fisher's method when
    censoring is present in either sample.
    """
    if a.censor_threshold != b.censor_threshold:
        raise ValueError("samples must share the censor threshold")
    ua = a.values[~a.censored]
    ub = b.values[~b.censored]
    res = sps.mannwhitneyu(ua, ub, alternative="two-sided",
                           use_continuity=False, method="asymptotic")
    p_rank = float(res.pvalue)
    ca, cb = int(a.censored.sum()), int(b.censored.sum())
    if ca == 0 and cb == 0:
        return min(p_rank, 1.0)
    table = [[ca, a.total - ca], [cb, b.total - cb]]
    p_cens = float(sps.fisher_exact(table)[1])
    stat = -2.0 * (math.log(max(p_rank, 1e-300))
                   + math.log(max(p_cens, 1e-300)))
    return float(sps.chi2.sf(stat, df=4))


def ratio_convergence(nx_values, z_counts, x: float) -> dict:
    """Quartile summary of N_x / (x * Z_x) on coupled samples."""
    nx = np.asarray(nx_values, dtype=float)
    z = np.asarray(z_counts, dtype=float)
    ok = z > 0
    r = nx[ok] / (x * z[ok])
    q1, med, q3 = np.percentile(r, [25, 50, 75])
    return {"x": x, "n": int(ok.sum()), "median": float(med),
            "q1": float(q1), "q3": float(q3)}
