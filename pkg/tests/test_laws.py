import math

import numpy as np
import pytest
from scipy import integrate, stats as sps

from bbmlab import rng
from bbmlab.laws import (Crossed, Died, displacement_law,
                         edge_crossing_prob, sample_edge, spine_step_law)
from bbmlab.params import make_params

PARAMS = make_params(2.0)
LAW = displacement_law(PARAMS)
S2 = math.sqrt(2.0)


def test_density_spot_values():
    assert float(LAW.pdf(0.0)) == pytest.approx(S2 / 4, abs=1e-14)
    assert float(LAW.pdf(-1e-14)) == pytest.approx(S2 / 4, rel=1e-10)
    assert float(LAW.cdf(0.0)) == pytest.approx((2 - S2) / 4, abs=1e-14)
    assert float(LAW.cdf(-np.inf)) == 0.0
    assert float(LAW.cdf(np.inf)) == 1.0


def test_density_integrates_to_one():
    neg, _ = integrate.quad(lambda v: float(LAW.pdf(v)), -np.inf, 0)
    pos, _ = integrate.quad(lambda v: float(LAW.pdf(v)), 0, np.inf)
    assert neg + pos == pytest.approx(1.0, abs=1e-10)


def test_mgf_matches_quadrature():
    lam = 0.2

    def integrand(v):
        # e^{lam v} * pdf(v) with the exponents combined for stability
        if v < 0:
            return (1 - LAW.p) * LAW.r_minus * math.exp((LAW.r_minus
                                                         + lam) * v)
        return LAW.p * LAW.r_plus * math.exp(-(LAW.r_plus - lam) * v)

    neg, _ = integrate.quad(integrand, -np.inf, 0.0)
    pos, _ = integrate.quad(integrand, 0.0, np.inf)
    assert neg + pos == pytest.approx(LAW.mgf(lam), rel=1e-8)
    assert LAW.mgf(0.0) == pytest.approx(1.0, abs=1e-14)


def test_mean_and_variance():
    assert LAW.mean == pytest.approx(2.0, abs=1e-12)
    assert LAW.var == pytest.approx(6.0, abs=1e-12)


def test_sampler_matches_cdf():
    gen = rng.generator((1, 2))
    x = LAW.sample(gen, 50_000)
    stat = sps.kstest(x, lambda v: np.asarray(LAW.cdf(v), dtype=float))
    assert stat.pvalue > 1e-3


def test_spine_step_law():
    law = spine_step_law(PARAMS)
    # unit variance, mean zero
    v, _ = integrate.quad(lambda x: x * x * float(law.pdf(x)),
                          -np.inf, np.inf)
    assert v == pytest.approx(1.0, abs=1e-10)
    gen = rng.generator((3, 4))
    x = law.sample(gen, 50_000)
    assert abs(x.mean()) < 5 / math.sqrt(50_000)
    stat = sps.kstest(x, lambda v: np.asarray(law.cdf(v), dtype=float))
    assert stat.pvalue > 1e-3
    with pytest.raises(ValueError):
        spine_step_law(make_params(2.5))


def test_edge_crossing_prob_properties():
    assert edge_crossing_prob(0.0, -1.0, 1.0) == 1.0
    assert edge_crossing_prob(1.0, 2.0, 1.0) == 1.0  # endpoint past barrier
    p = [edge_crossing_prob(g, 0.5, 1.0) for g in (0.6, 1.0, 2.0, 4.0)]
    assert all(p[i] > p[i + 1] for i in range(len(p) - 1))
    assert 0.0 < p[-1] < 1.0
    with pytest.raises(ValueError):
        edge_crossing_prob(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        edge_crossing_prob(-1.0, 0.0, 1.0)


def test_single_edge_first_passage_probability():
    # P(edge crosses a barrier one unit up) = exp(-(sqrt(2)-1))
    gen = rng.generator((5, 6))
    n = 40_000
    hits = sum(isinstance(sample_edge(0.0, 1.0, "up", PARAMS, gen), Crossed)
               for _ in range(n))
    target = math.exp(-(S2 - 1))
    se = math.sqrt(target * (1 - target) / n)
    assert abs(hits / n - target) < 4 * se


def test_edge_endpoint_matches_displacement_law():
    gen = rng.generator((7, 8))
    xs = np.array([sample_edge(1.5, None, "up", PARAMS, gen).position - 1.5
                   for _ in range(20_000)])
    stat = sps.kstest(xs, lambda v: np.asarray(LAW.cdf(v), dtype=float))
    assert stat.pvalue > 1e-3


def test_sample_edge_validation():
    gen = rng.generator((9, 10))
    with pytest.raises(ValueError):
        sample_edge(0.0, 1.0, "sideways", PARAMS, gen)
    with pytest.raises(ValueError):
        sample_edge(0.0, -1.0, "up", PARAMS, gen)
    with pytest.raises(ValueError):
        sample_edge(0.0, 1.0, "down", PARAMS, gen)
    out = sample_edge(0.0, -3.0, "down", PARAMS, gen)
    assert isinstance(out, (Crossed, Died))
