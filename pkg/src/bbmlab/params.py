"""Model parameters for the drifted binary branching Brownian motion.

The motion has drift mu, diffusion coefficient 2 and binary branching at
rate 1.  The birth-displacement law of the embedded branching random walk
is a two-sided exponential mixture whose rates are the roots of
lam^2 + mu*lam - 1 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    mu: float
    sigma2: float
    branch_rate: float
    r_plus: float
    r_minus: float
    p: float

    @property
    def boundary(self) -> bool:
        return self.mu == 2.0


def make_params(mu: float) -> ModelParams:
    """Derive the displacement-mixture rates and weight for drift mu >= 2.

    Rejects mu < 2: below the critical drift the count of births on the
    negative half-line is not almost surely finite.
    """
    if not mu >= 2.0:
        raise ValueError(f"drift mu must be >= 2, got {mu}")
    s = math.sqrt(mu * mu + 4.0)
    r_plus = (s - mu) / 2.0
    r_minus = (s + mu) / 2.0
    p = r_minus / (r_plus + r_minus)
    return ModelParams(mu=float(mu), sigma2=2.0, branch_rate=1.0,
                       r_plus=r_plus, r_minus=r_minus, p=p)
