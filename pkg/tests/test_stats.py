import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from bbmlab.stats import (EmpiricalTail, MeanStat, empirical_log_laplace,
                          laplace_expansion_check, loglog_slope,
                          pairwise_merge, ratio_convergence, tail_ratio,
                          truncated_mean_offset, two_sample_rank_test)


def _pareto_tail(n, seed, cap=None):
    """P(N >= k) = 1/k exactly: N = floor(1/U)."""
    g = np.random.default_rng(seed)
    v = np.floor(1.0 / g.random(n)).astype(np.int64)
    if cap is not None:
        cen = v >= cap
        v = np.minimum(v, cap)
        return EmpiricalTail(values=v, censored=cen, censor_threshold=cap)
    return EmpiricalTail(values=v, censored=np.zeros(n, bool))


def test_meanstat_merge_exact():
    a = MeanStat.from_values(np.array([1.0, 2.0, 3.0]))
    b = MeanStat.from_values(np.array([4.0, 5.0]))
    m = a.merge(b)
    assert m.n == 5
    assert m.mean == pytest.approx(3.0)
    assert m.merge(MeanStat(0, 0.0, 0.0)) == m
    assert a.merge(b) == b.merge(a)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=40))
def test_meanstat_matches_numpy(xs):
    v = np.asarray(xs)
    m = MeanStat.from_values(v)
    assert m.mean == pytest.approx(float(v.mean()), rel=1e-9, abs=1e-9)
    assert m.stderr == pytest.approx(
        float(v.std(ddof=1) / math.sqrt(v.size)), rel=1e-9, abs=1e-9)


def test_pairwise_merge_deterministic_and_order_fixed():
    g = np.random.default_rng(0)
    parts = [MeanStat.from_values(g.random(13)) for _ in range(9)]
    assert pairwise_merge(parts) == pairwise_merge(parts)
    total = pairwise_merge(parts)
    assert total.n == 9 * 13
    assert total.mean == pytest.approx(
        float(np.mean([p.mean for p in parts])), rel=1e-12)


def test_tail_ratio_on_exact_power_law():
    tail = _pareto_tail(200_000, 1)
    for n in (10, 100):
        e = tail_ratio(tail, n)
        assert e.ci_low <= 1.0 <= e.ci_high or abs(e.value - 1.0) < 0.15
        assert e.stderr > 0


def test_truncated_mean_offset_on_power_law():
    # N = floor(1/U): P(N=k) = 1/(k(k+1)), so
    # E[N 1{N<=n}] = sum_{k<=n} k/(k(k+1)) = H_{n+1} - 1
    n = 100
    tail = _pareto_tail(400_000, 2)
    e = truncated_mean_offset(tail, n)
    exact = sum(1.0 / k for k in range(1, n + 2)) - 1.0 - math.log(n)
    assert abs(e.value - exact) < 5 * e.stderr


def test_censoring_respected():
    tail = _pareto_tail(50_000, 3, cap=1000)
    tail_ratio(tail, 1000)
    with pytest.raises(ValueError):
        tail_ratio(tail, 1001)
    with pytest.raises(ValueError):
        empirical_log_laplace(tail, 0.001)  # lam*cap = 1 < 30
    m = empirical_log_laplace(tail, 0.05)
    assert 0 < m.mean < 1


def test_laplace_expansion_on_power_law():
    # exact ground truth: E[e^{-lam N}] = sum_k e^{-lam k}/(k(k+1))
    lam = 3e-3
    k = np.arange(1, 3_000_000)
    phi_exact = math.log(float(np.sum(np.exp(-lam * k) / (k * (k + 1.0)))))
    exact = (phi_exact - lam * math.log(lam)) / lam
    tail = _pareto_tail(2_000_000, 4)
    e = laplace_expansion_check(tail, lam)
    assert abs(e.value - exact) < 5 * e.stderr
    # for an exact 1/k tail the linear coefficient is near 0
    assert abs(exact) < 0.2


def test_loglog_slope_recovers_power():
    tail = _pareto_tail(500_000, 5)
    e = loglog_slope(tail, [10, 20, 40, 80, 160, 320])
    assert abs(e.value + 1.0) < 0.1
    with pytest.raises(ValueError):
        loglog_slope(_pareto_tail(100, 6), [50, 100, 200])


def test_rank_test_null_is_uniformish():
    """p-values under H0 are not concentrated near 0."""
    g = np.random.default_rng(7)
    ps = []
    for i in range(40):
        a = _pareto_tail(800, 100 + i)
        b = _pareto_tail(800, 900 + i)
        ps.append(two_sample_rank_test(a, b))
    assert min(ps) > 1e-4
    assert sps.kstest(ps, "uniform").pvalue > 1e-3


def test_rank_test_detects_difference():
    a = _pareto_tail(3000, 8)
    g = np.random.default_rng(9)
    shifted = EmpiricalTail(
        values=np.floor(2.0 / g.random(3000)).astype(np.int64),
        censored=np.zeros(3000, bool))
    assert two_sample_rank_test(a, shifted) < 1e-6


def test_rank_test_identical_data_p_one():
    a = _pareto_tail(1000, 10)
    assert two_sample_rank_test(a, a) == pytest.approx(1.0, abs=1e-9)


def test_rank_test_censored_component():
    a = _pareto_tail(5000, 11, cap=50)
    b = _pareto_tail(5000, 12, cap=50)
    p = two_sample_rank_test(a, b)
    assert 0.0 < p <= 1.0
    with pytest.raises(ValueError):
        two_sample_rank_test(a, _pareto_tail(5000, 13, cap=60))


def test_ratio_convergence_summary():
    r = ratio_convergence([4, 8, 12], [1, 2, 3], 2.0)
    assert r["n"] == 3
    assert r["median"] == pytest.approx(2.0)
    r2 = ratio_convergence([4, 8], [0, 2], 2.0)
    assert r2["n"] == 1  # zero-count lines dropped
