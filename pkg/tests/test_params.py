import math

import pytest

from bbmlab.params import make_params


def test_boundary_values():
    p = make_params(2.0)
    s2 = math.sqrt(2.0)
    assert p.r_plus == pytest.approx(s2 - 1, abs=1e-15)
    assert p.r_minus == pytest.approx(s2 + 1, abs=1e-15)
    assert p.p == pytest.approx((2 + s2) / 4, abs=1e-15)
    assert p.boundary


@pytest.mark.parametrize("mu", [2.0, 2.1, 3.0])
def test_root_identities(mu):
    p = make_params(mu)
    # roots of 1 - mu*lam - lam^2: product 1, difference mu
    assert p.r_plus * p.r_minus == pytest.approx(1.0, abs=1e-12)
    assert p.r_minus - p.r_plus == pytest.approx(mu, abs=1e-12)
    # continuity of the displacement density at 0
    assert p.p * p.r_plus == pytest.approx((1 - p.p) * p.r_minus, abs=1e-12)
    assert p.boundary == (mu == 2.0)


def test_subcritical_drift_rejected():
    with pytest.raises(ValueError):
        make_params(1.9)
    with pytest.raises(ValueError):
        make_params(0.0)
