"""Semi-analytic law of the below-level birth count via its generating
function.

The count ``N_x`` of birth events at or below level ``x`` (root at 0)
satisfies a recursive distributional equation: the root dies at a
displacement ``V`` with the two-sided exponential mixture law, the death
is counted when ``V <= x``, and the two daughter subtrees contribute
independent copies of ``N_{x - V}``.  Hence ``f(x) = E[s^{N_x}]`` solves
the nonlinear integral equation

    f(x) = Integral nu(x - u) * s^{1{u >= 0}} * f(u)^2 du

for each fixed ``s`` (substituting ``u = x - v``).  The equation has
several fixed points; the probabilistically correct one is the maximal
solution in ``[0, 1]``, i.e. the decreasing limit of Picard iteration
started from ``f == 1`` (iterate ``k`` gives the generating function of
deaths restricted to the first ``k`` generations).  We therefore solve
with a Picard burn-in at real s and track the branch by warm-started
continuation when moving ``s`` along the inversion circle.

Discretization is piecewise-linear collocation on a uniform grid: the
kernel integrals of ``nu`` against hat functions are evaluated in closed
form, so the discrete operator applied to the constant 1 reproduces the
exact continuous value (a partition of unity).  In particular the
discrete probabilistic root stays inside [0, 1].  The hat coefficients
form a Toeplitz matrix, applied by FFT convolution, with rank-one
corrections for the origin hat (whose two halves carry different powers
of ``s``: a death exactly at the level is counted, matching the engines'
tie rule) and for the two boundary half-hats.

Boundary conditions.  Above ``x_hi`` we use ``f = 0`` (doubly
exponentially accurate past the front).  Below ``x_lo``, instead of the
crude ``f = 1``, we write ``1 - f`` as a combination of the two decaying
modes of the linearization around 1 -- solutions of ``2 M(theta) = 1``,
i.e. roots of ``theta^2 - mu theta + 1`` (a double root at criticality,
giving the secular ``(a + b|x|) e^x`` profile) -- with coefficients
fitted from the two lowest grid values each application.  The resulting
correction integral is a scalar multiple of the truncated-tail vector,
entering the operator and its Jacobian as two extra rank-one columns.
This keeps the left-truncation bias negligible at moderate ``|x_lo|``,
which matters doubly: the plateau carries a quasi-null mode growing like
``e^{theta x}``, so both the conditioning of the linearization and the
noise amplification of linear-solve roundoff grow exponentially with the
plateau length.

Solving at complex ``s`` (no monotone iteration available) uses frozen
dense LU quasi-Newton steps.  The Jacobian is first balanced by the
diagonal similarity ``diag(e^{theta x})`` that flattens the quasi-null
mode (admissible: the kernel still decays on both sides after tilting),
without which the LU loses most of its accuracy to non-normal growth.

Recovering the pmf of ``N = N_0`` uses ``f(0; s)`` on a circle
``|s| = r < 1`` and an FFT.  The discretization error is itself analytic
in ``s``, so it enters the pmf multiplicatively (relative error O(h^2))
rather than as an absolute floor.

This oracle is independent of the Monte Carlo engines: no trees are
sampled and no pruning barrier is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, toeplitz
from scipy.signal import fftconvolve

from .params import ModelParams, make_params
from .laws import displacement_law


@dataclass(frozen=True)
class GFGrid:
    """Collocation grid and precomputed hat-kernel pieces for one drift."""

    x: np.ndarray        # grid points, uniform, containing 0
    h: float
    j0: int              # index with x[j0] == 0
    kern: np.ndarray     # kern[m + P - 1] = int nu(m h - u) hat(u) du
    w_plus: np.ndarray   # same, but only the u in [0, h] half of the hat
    w_minus: np.ndarray  # same, but only the u in [-h, 0] half
    tail: np.ndarray     # integral of nu over (x_i - x_lo, inf): f = 1 region
    theta: float         # decay rate of the slow left mode of 1 - f
    bc_vec: np.ndarray   # left-boundary correction shape: -2 r_plus * tail
    bc_a0: float         # kappa = bc_a0 (1 - f[0]) + bc_a1 (1 - f[bc_m])
    bc_a1: float
    bc_m: int            # second fit point index (wide spacing keeps the
                         # fit well conditioned and the feedback gain < 1)


def _ihalf(a: float, h: float) -> float:
    """Closed form of the half-hat moment: int_0^h e^{a u} (1 - u/h) du."""
    if abs(a * h) < 1e-9:
        return h / 2.0 + a * h * h / 6.0
    return (math.expm1(a * h) - a * h) / (a * a * h)


def build_grid(params: ModelParams, x_lo: float = -16.0, x_hi: float = 20.0,
               h: float = 0.0125, asymptotic_bc: bool = True) -> GFGrid:
    law = displacement_law(params)
    rp, rm, p = law.r_plus, law.r_minus, law.p
    amp_m = (1.0 - p) * rm        # nu(t) = amp_m e^{rm t} for t < 0
    amp_p = p * rp                # nu(t) = amp_p e^{-rp t} for t >= 0

    n = int(round((x_hi - x_lo) / h))
    x = x_lo + h * np.arange(n + 1)
    j0 = int(round(-x_lo / h))
    if abs(x[j0]) > 1e-12:
        raise ValueError("grid must contain 0")
    P = x.size

    # Hat integrals at offsets z = m h.  The kernel kink at 0 always sits
    # on a grid point, so each half-hat sees a single exponential piece.
    z = h * np.arange(-(P - 1), P)
    ep = np.exp(-rp * np.maximum(z, 0.0))
    em = np.exp(rm * np.minimum(z, 0.0))
    w_plus = np.where(z > 0, amp_p * ep * _ihalf(rp, h),
                      amp_m * em * _ihalf(-rm, h))
    w_minus = np.where(z >= 0, amp_p * ep * _ihalf(-rp, h),
                       amp_m * em * _ihalf(rm, h))
    kern = w_plus + w_minus
    # Leading term of the region below x_lo (f = 1 there): P(V > x_i - x_lo).
    tail = p * np.exp(-rp * (x - x_lo))

    # Left-boundary modes: roots of theta^2 - mu theta + 1 = 0.  Below
    # x_lo, 1 - f ~ a phi1 + b phi2 with phi = e^{theta t} (t = u - x_lo),
    # or the secular pair (e^t, -t e^t) at the critical double root.  The
    # linearized correction -2 int nu(x-u)(a phi1 + b phi2) du collapses
    # to kappa * (-2 r_plus tail(x)) with G_i = int_0^inf e^{-(rp+th) t}dt
    # factors, and (a, b) fitted from 1 - f at the two lowest grid points.
    mu = params.mu
    disc = mu * mu - 4.0
    bc_m = min(int(round(2.0 / h)), j0 - 1)
    delta = bc_m * h
    if disc < 1e-12:
        th = mu / 2.0
        g1 = 1.0 / (rp + th)
        g2 = 1.0 / (rp + th) ** 2
        # eps0 = a, eps_m = (a - b delta) e^{th delta}
        a0 = g1 + g2 / delta
        a1 = -math.exp(-th * delta) * g2 / delta
    else:
        th = (mu - math.sqrt(disc)) / 2.0
        th2 = (mu + math.sqrt(disc)) / 2.0
        g1 = 1.0 / (rp + th)
        g2 = 1.0 / (rp + th2)
        e1, e2 = math.exp(th * delta), math.exp(th2 * delta)
        d = e2 - e1
        # eps0 = a + b, eps_m = a e1 + b e2
        a0 = (g1 * e2 - g2 * e1) / d
        a1 = (g2 - g1) / d
    bc_vec = -2.0 * rp * tail
    if not asymptotic_bc:
        # The boundary correction couples the solution at two interior
        # points back into the whole domain.  Under real monotone sweeps
        # this is stable and shaves ~10% off the hard-truncation bias,
        # but it wrecks the Newton basin for complex s (the quasi-null
        # plateau mode amplifies the feedback), so contour integrations
        # run with a plain hard cut and a deeper left edge instead.
        bc_vec = np.zeros_like(bc_vec)
        a0 = a1 = 0.0
    return GFGrid(x=x, h=h, j0=j0, kern=kern, w_plus=w_plus,
                  w_minus=w_minus, tail=tail, theta=th, bc_vec=bc_vec,
                  bc_a0=a0, bc_a1=a1, bc_m=bc_m)


class _Operator:
    """The fixed-point map g = tail + bc(f) + K_s[f^2] for one value of s."""

    def __init__(self, grid: GFGrid, s: complex):
        self.grid = grid
        self.s = complex(s)
        P = grid.x.size
        j0 = grid.j0
        sv = np.ones(P, dtype=complex)
        sv[j0 + 1:] = self.s
        # The origin hat and the two boundary half-hats are applied as
        # explicit rank-one terms, not through the convolution.
        sv[j0] = 0.0
        sv[0] = 0.0
        sv[-1] = 0.0
        self.sv = sv
        # column vectors kern[:, j] restricted to the special columns
        self.col_j0 = (grid.w_minus[P - 1 - j0: 2 * P - 1 - j0]
                       + self.s * grid.w_plus[P - 1 - j0: 2 * P - 1 - j0])
        self.col_lo = grid.w_plus[P - 1: 2 * P - 1]          # right half only
        self.col_hi = self.s * grid.w_minus[0: P]            # left half only

    def kmul(self, m: np.ndarray, m_j0, m_lo, m_hi) -> np.ndarray:
        P = self.grid.x.size
        core = fftconvolve(m, self.grid.kern)[P - 1: 2 * P - 1]
        return (core + m_j0 * self.col_j0 + m_lo * self.col_lo
                + m_hi * self.col_hi)

    def _kappa(self, f: np.ndarray) -> complex:
        g = self.grid
        return g.bc_a0 * (1.0 - f[0]) + g.bc_a1 * (1.0 - f[g.bc_m])

    def apply(self, f: np.ndarray) -> np.ndarray:
        f2 = f * f
        out = self.grid.tail + self.kmul(
            self.sv * f2, f2[self.grid.j0], f2[0], f2[-1])
        return out + self._kappa(f) * self.grid.bc_vec

    def jmul(self, f: np.ndarray, v: np.ndarray) -> np.ndarray:
        fv = 2.0 * f * v
        out = self.kmul(self.sv * fv, fv[self.grid.j0], fv[0], fv[-1]) - v
        g = self.grid
        return out - (g.bc_a0 * v[0] + g.bc_a1 * v[g.bc_m]) * g.bc_vec


def picard_root(grid: GFGrid, s: float, f0: np.ndarray | None = None,
                max_sweeps: int = 60000, tol: float = 5e-14) -> np.ndarray:
    """Monotone fixed-point solve at real s in [0, 1).

    Starting from f == 1 the sweeps decrease to the maximal root, which
    is the probabilistic solution; clipping back into [0, 1] (a no-op on
    the exact iterates) suppresses roundoff growth along the marginally
    stable plateau modes.  Only valid for real s, where the invariant
    interval argument applies.
    """
    op = _Operator(grid, s)
    f = np.ones(grid.x.size) if f0 is None else np.clip(f0.real, 0.0, 1.0)
    for _ in range(max_sweeps):
        g = np.clip(op.apply(f.astype(complex)).real, 0.0, 1.0)
        if np.max(np.abs(g - f)) < tol:
            return g.astype(complex)
        f = g
    return f.astype(complex)


class _DenseWalker:
    """Quasi-Newton continuation along a path of s values.

    The linearization J = 2 C(s) diag(f) - I is exponentially non-normal
    (the critical plateau carries an e^{theta x} quasi-null mode), which
    defeats Krylov solvers outright and costs a raw dense LU most of its
    digits.  Balancing by the similarity diag(e^{theta x}) before
    factoring restores an accurate solve; the factorization is reused
    across neighboring s values and refreshed when contraction slows.
    """

    def __init__(self, grid: GFGrid):
        self.grid = grid
        P = grid.x.size
        self._T = toeplitz(grid.kern[P - 1:], grid.kern[P - 1::-1])
        self._d = np.exp(grid.theta * grid.x)
        self._lu = None
        self.refresh_count = 0

    def _jacobian(self, s: complex, f: np.ndarray) -> np.ndarray:
        g = self.grid
        P = g.x.size
        j0 = g.j0
        C = self._T.astype(complex)
        C[:, j0 + 1:] *= s
        C[:, 0] = g.w_plus[P - 1: 2 * P - 1]
        C[:, P - 1] = s * g.w_minus[0: P]
        C[:, j0] = (g.w_minus[P - 1 - j0: 2 * P - 1 - j0]
                    + s * g.w_plus[P - 1 - j0: 2 * P - 1 - j0])
        J = 2.0 * C * f[None, :]
        J[:, 0] -= g.bc_a0 * g.bc_vec
        J[:, g.bc_m] -= g.bc_a1 * g.bc_vec
        J[np.diag_indices(P)] -= 1.0
        return J

    def refresh(self, s: complex, f: np.ndarray) -> None:
        J = self._jacobian(s, f)
        J *= self._d[None, :] / self._d[:, None]
        self._lu = lu_factor(J, overwrite_a=True)
        self.refresh_count += 1

    def step_to(self, s: complex, f: np.ndarray, tol: float,
                max_iter: int = 240) -> np.ndarray:
        """Solve at s starting from f, refreshing the LU as needed.

        Full quasi-Newton steps only: the non-normal transient raises
        the residual norm by orders of magnitude before contraction sets
        in, so monotone line searches stall precisely where plain
        iteration succeeds.  The LU is refreshed every 16 iterations at
        the current iterate; the best iterate seen is the restart point
        only after a genuine blow-up and the final fallback answer.
        """
        op = _Operator(self.grid, s)
        best_nrm, best_f = math.inf, f
        fresh = False
        stale_fresh_rounds = 0
        for _ in range(max_iter // 16 + 1):
            if self._lu is None:
                # Refresh at the current iterate, not the best one:
                # restarting mid-transient from the best point just
                # replays the same non-monotone overshoot.
                self.refresh(s, f)
                fresh = True
            round_start = best_nrm
            for _ in range(16):
                F = op.apply(f) - f
                nrm = float(np.linalg.norm(F))
                if math.isfinite(nrm) and nrm < best_nrm:
                    best_nrm, best_f = nrm, f
                if best_nrm < tol:
                    return best_f
                if not math.isfinite(nrm) or nrm > 1e3 * (best_nrm + 1.0):
                    f = best_f  # genuine blow-up: restart from best
                    break
                f = f - self._d * lu_solve(self._lu, F / self._d)
            if best_nrm > 0.5 * round_start:
                # Round failed to halve the residual.  With a carried-over
                # factorization that just means it went stale; with a fresh
                # one twice in a row we are at the noise floor.
                if fresh:
                    stale_fresh_rounds += 1
                    if stale_fresh_rounds >= 2:
                        break
                self._lu = None
            else:
                stale_fresh_rounds = 0
        if best_nrm < 1e3 * tol:
            return best_f  # noise floor of the solve, still well resolved
        raise RuntimeError(
            f"quasi-Newton stalled at |F| = {best_nrm:.3e} for s = {s}")


def solve_gf(grid: GFGrid, s: complex, f0: np.ndarray | None = None,
             tol: float = 1e-12) -> np.ndarray:
    """Solve f = tail + bc + K_s[f^2] on the probabilistic branch.

    Real s uses the monotone Picard solve.  Complex s requires a warm
    start on the branch (Picard is unstable off the real axis: plateau
    perturbations grow by a factor ~2 per sweep) and runs the balanced
    dense quasi-Newton continuation.
    """
    if f0 is None:
        if complex(s).imag != 0.0:
            raise ValueError("complex s needs a warm start f0")
        return picard_root(grid, float(np.real(s)))
    walker = _DenseWalker(grid)
    return walker.step_to(complex(s), f0.astype(complex).copy(),
                          tol * math.sqrt(grid.x.size))


@dataclass(frozen=True)
class ExactLaw:
    """pmf of N up to n_max-1 plus the mass at or above n_max."""

    pmf: np.ndarray
    overflow: float
    mu: float

    def sf(self, n: int) -> float:
        """P(N >= n)."""
        if n >= self.pmf.size:
            raise ValueError("beyond resolved range")
        return float(self.pmf[n:].sum()) + self.overflow

    def truncated_mean(self, n: int) -> float:
        """E[N 1{N <= n}]."""
        k = np.arange(min(n + 1, self.pmf.size))
        return float((k * self.pmf[:k.size]).sum())

    def quantile(self, q: float) -> int:
        c = np.cumsum(self.pmf)
        return int(np.searchsorted(c, q))

    def laplace(self, lam: float) -> float:
        """E[e^{-lam N}], treating mass beyond the resolved range as 0."""
        n = np.arange(self.pmf.size)
        return float((self.pmf * np.exp(-lam * n)).sum())


def exact_law(mu: float = 2.0, n_max: int = 16384, x_lo: float = -22.0,
              x_hi: float = 20.0, h: float = 0.0125,
              decay: float = 4.0, progress: bool = False) -> ExactLaw:
    """Invert f(0; s) over the circle |s| = exp(-decay/n_max).

    The radius trades aliasing (masses beyond ``n_max`` fold back with
    weight ``e^{-decay}``) against roundoff amplification (per-point
    noise in f(0; s) enters the pmf at ``n`` multiplied by up to
    ``e^{decay n / n_max}``).  The default grid keeps h * plateau-length
    below the collapse threshold of the discrete front (~0.5); the left
    edge is deep enough for the hard-truncation bias to sit near the
    solver noise (the fitted boundary modes are off: they destabilize
    the complex-s Newton).
    """
    params = make_params(mu)
    grid = build_grid(params, x_lo=x_lo, x_hi=x_hi, h=h,
                      asymptotic_bc=False)
    r = math.exp(-decay / n_max)
    j0 = grid.j0
    vals = np.empty(n_max, dtype=complex)
    f = picard_root(grid, r)
    walker = _DenseWalker(grid)
    tol = 1e-11 * math.sqrt(grid.x.size)
    half = n_max // 2
    prev = f
    for k in range(half + 1):
        s = r * np.exp(2j * math.pi * k / n_max)
        if k > 0:
            f_new = walker.step_to(s, 2.0 * f - prev, tol)
            prev, f = f, f_new
        vals[k] = f[j0]
        if progress and k % 512 == 0:
            print(f"  gf circle {k}/{half} (refreshes {walker.refresh_count})",
                  flush=True)
    vals[half + 1:] = np.conj(vals[half - 1:0:-1])
    coef = np.fft.fft(vals) / n_max
    pmf = (coef.real * r ** (-np.arange(n_max))).astype(float)
    pmf = np.clip(pmf, 0.0, None)
    overflow = max(0.0, 1.0 - float(pmf.sum()))
    return ExactLaw(pmf=pmf, overflow=overflow, mu=mu)


def exact_gf_value(lam: float, mu: float = 2.0, x_lo: float = -16.0,
                   x_hi: float = 20.0, h: float = 0.01) -> float:
    """E[e^{-lam N}] solved directly at real s = e^{-lam}."""
    params = make_params(mu)
    grid = build_grid(params, x_lo=x_lo, x_hi=x_hi, h=h)
    f = picard_root(grid, math.exp(-lam))
    return float(f[grid.j0].real)
