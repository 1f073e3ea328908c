"""Elementary laws: birth displacements, spine steps, single-edge sampling.

These are the exact building blocks; the engines inline the same logic in
compiled kernels, and the engine-level tests re-verify agreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import ModelParams


@dataclass(frozen=True)
class DisplacementLaw:
    """Birth displacement of the embedded branching random walk.

    Mixture of two exponentials: density (1-p)*r_minus*exp(r_minus*x) for
    x < 0 and p*r_plus*exp(-r_plus*x) for x > 0.  Equals the law of
    sqrt(2)*B_T + mu*T with T ~ Exp(1).
    """

    r_plus: float
    r_minus: float
    p: float

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        # clamp each branch's argument to its own half-line so np.where
        # never evaluates an overflowing exp
        neg = np.exp(self.r_minus * np.minimum(x, 0.0))
        pos = np.exp(-self.r_plus * np.maximum(x, 0.0))
        return np.where(x < 0, (1.0 - self.p) * self.r_minus * neg,
                        self.p * self.r_plus * pos)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        neg = np.exp(self.r_minus * np.minimum(x, 0.0))
        pos = np.exp(-self.r_plus * np.maximum(x, 0.0))
        return np.where(x < 0, (1.0 - self.p) * neg, 1.0 - self.p * pos)

    def mgf(self, lam):
        """E[exp(lam*V)] = 1/(1 - mu*lam - lam^2), |lam| < r_plus."""
        mu = self.r_minus - self.r_plus
        return 1.0 / (1.0 - mu * lam - lam * lam)

    @property
    def mean(self) -> float:
        return self.p / self.r_plus - (1.0 - self.p) / self.r_minus

    @property
    def var(self) -> float:
        m2 = 2.0 * (self.p / self.r_plus**2 + (1.0 - self.p) / self.r_minus**2)
        return m2 - self.mean**2

    def sample(self, gen: np.random.Generator, size=None):
        """Inverse-CDF draw on each exponential branch (exact, no rejection)."""
        u = gen.random(size)
        q = 1.0 - self.p
        return np.where(
            u < q,
            np.log(np.maximum(u, 1e-320) / q) / self.r_minus,
            -np.log(np.maximum((1.0 - u) / self.p, 1e-320)) / self.r_plus,
        )


def displacement_law(params: ModelParams) -> DisplacementLaw:
    return DisplacementLaw(r_plus=params.r_plus, r_minus=params.r_minus,
                           p=params.p)


@dataclass(frozen=True)
class SpineStepLaw:
    """Symmetric Laplace step with rate sqrt(2): mean 0, unit variance."""

    rate: float = math.sqrt(2.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.rate * np.exp(-self.rate * np.abs(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.5 * np.exp(self.rate * x),
                        1.0 - 0.5 * np.exp(-self.rate * x))

    def sample(self, gen: np.random.Generator, size=None):
        u = gen.random(size)
        return np.where(
            u < 0.5,
            np.log(np.maximum(2.0 * u, 1e-320)),
            -np.log(np.maximum(2.0 * (1.0 - u), 1e-320)),
        ) / self.rate


def spine_step_law(params: ModelParams) -> SpineStepLaw:
    """Boundary-case only: the spine step density is specific to mu = 2."""
    if not params.boundary:
        raise ValueError("spine step law is defined for the boundary case "
                         f"mu = 2 only, got mu = {params.mu}")
    return SpineStepLaw()


def edge_crossing_prob(gap: float, endpoint_shift: float,
                       lifetime: float) -> float:
    """P(path max over one edge >= gap | endpoint displacement, lifetime).

    Brownian-bridge reflection with diffusion coefficient 2 (the drift
    cancels in the bridge): exp(-gap*(gap-shift)/lifetime), clamped so
    floating-point noise near gap ~ max(0, shift) cannot produce p > 1.
    """
    if lifetime <= 0.0:
        raise ValueError("lifetime must be > 0")
    if gap < 0.0:
        raise ValueError("gap must be >= 0")
    if gap <= max(0.0, endpoint_shift):
        return 1.0
    expo = max(gap * (gap - endpoint_shift), 0.0)
    return math.exp(-expo / lifetime)


@dataclass(frozen=True)
class Crossed:
    crossed: bool = True


@dataclass(frozen=True)
class Died:
    position: float
    crossed: bool = False


def sample_edge(start: float, barrier: float | None, direction: str,
                params: ModelParams, gen: np.random.Generator):
    """One BBM edge: Exp(1) lifetime, drifted Gaussian endpoint, bridge hit.

    Returns Crossed if the edge touches the barrier during its lifetime
    (the subtree then restarts at the barrier by the branching property and
    memorylessness), else Died(position) with the endpoint correctly
    distributed conditional on no crossing.
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    if barrier is not None:
        if direction == "up" and barrier < start:
            raise ValueError("up-crossing barrier must be >= start")
        if direction == "down" and barrier > start:
            raise ValueError("down-crossing barrier must be <= start")
    T = gen.standard_exponential()
    w = params.mu * T + math.sqrt(2.0 * T) * gen.standard_normal()
    if barrier is None:
        return Died(position=start + w)
    if direction == "up":
        gap, shift = barrier - start, w
    else:
        gap, shift = start - barrier, -w
    if gen.random() < edge_crossing_prob(gap, shift, T):
        return Crossed()
    return Died(position=start + w)
