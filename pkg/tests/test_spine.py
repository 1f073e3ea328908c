import math

import numpy as np
import pytest

from bbmlab import rng
from bbmlab.params import make_params
from bbmlab.spine import (PathIndicator, ballot_probe, boundary_identities,
                          many_to_one_check, simulate_spine)

PARAMS = make_params(2.0)


def _key(i):
    return rng.stream_key(271828, rng.DOMAIN_SPINE, i)


def test_simulate_spine_shape_and_determinism():
    p = simulate_spine(10, 0.5, _key(1))
    assert p.values.shape == (11,)
    assert p.values[0] == 0.5
    assert p.running_min == pytest.approx(p.values.min())
    assert p.running_max == pytest.approx(p.values.max())
    q = simulate_spine(10, 0.5, _key(1))
    assert np.array_equal(p.values, q.values)
    with pytest.raises(ValueError):
        simulate_spine(-1, 0.0, _key(2))


def test_indicator_validation():
    with pytest.raises(ValueError):
        PathIndicator(upper=3.0)
    PathIndicator(upper=2.0, alpha=1.0)  # boundary allowed


def test_constant_function_closed_form():
    lhs, rhs = many_to_one_check("one", 6, 1000, _key(3))
    assert lhs.value == rhs.value == 64.0
    assert lhs.stderr == 0.0


def test_one_step_exact_probability():
    """n=1, f = 1{S_1 <= 0}: both sides equal (2 - sqrt 2)/2 exactly."""
    exact = (2 - math.sqrt(2)) / 2
    lhs, rhs = many_to_one_check(PathIndicator(upper=0.0), 1, 200_000,
                                 _key(4))
    assert abs(lhs.value - exact) < 4 * lhs.stderr
    assert abs(rhs.value - exact) < 4 * rhs.stderr


@pytest.mark.parametrize("n", [2, 5])
def test_many_to_one_agreement(n):
    f = PathIndicator(upper=1.0, alpha=2.0)
    lhs, rhs = many_to_one_check(f, n, 150_000, _key(10 + n))
    se = math.hypot(lhs.stderr, rhs.stderr)
    assert abs(lhs.value - rhs.value) < 4 * se


def test_many_to_one_rejects_bad_input():
    with pytest.raises(ValueError):
        many_to_one_check(PathIndicator(upper=0.0), 0, 100, _key(5))
    with pytest.raises(TypeError):
        many_to_one_check(lambda s: 1.0, 2, 100, _key(6))


def test_boundary_identities_quadrature():
    m0, m1, m2 = boundary_identities(PARAMS)
    assert m0 == pytest.approx(1.0, abs=1e-8)
    assert m1 == pytest.approx(0.0, abs=1e-8)
    assert m2 == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        boundary_identities(make_params(2.5))


def test_ballot_probability_scaling():
    """P(min over n steps >= -alpha) decays like n^{-1/2}."""
    probes = {n: ballot_probe("ballot", n, 1.0, 0.0, 0.0, 60_000,
                              _key(100 + n))
              for n in (25, 100)}
    r = probes[25].estimate.value / probes[100].estimate.value
    # ratio should be near sqrt(100/25) = 2 within generous MC slack
    assert 1.4 < r < 2.8


def test_three_factor_probe_guard():
    with pytest.raises(ValueError):
        ballot_probe("three_factor", 1000, 1.0, 1.0, 0.0, 100, _key(7))
    with pytest.raises(ValueError):
        ballot_probe("nonsense", 10, 1.0, 1.0, 0.0, 100, _key(8))


def test_local_limit_probe_bounded():
    p = ballot_probe("local_limit", 100, 0.0, 0.0, 0.0, 100_000, _key(9))
    # sup_z P(S_100 in [z,z+1]) ~ 1/sqrt(2 pi 100) ~ 0.04
    assert 0.02 < p.estimate.value < 0.08
    assert not p.starved
