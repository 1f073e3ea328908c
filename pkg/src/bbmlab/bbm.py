"""Continuous-time BBM engine: populations, stopping lines, composed counts.

Stopping-line sampling discards times entirely: counts are time-invariant,
and restarting a subtree at the barrier is exact by memorylessness of the
Exp(1) lifetimes plus the branching property along the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .brw import STATUS_NAMES, CensoredCount, ExploreConfig, explore_tree
from .params import ModelParams
from .rng import DOMAIN_LINE, DOMAIN_SUBCOPY, derive_key

DEFAULT_POP_CAP = 10**7
DEFAULT_LINE_WORK_CAP = 10**9
DEFAULT_LINE_BARRIER_B = 12.0


class PopulationCapError(RuntimeError):
    """Raised when a population simulation exhausts its particle cap."""


@dataclass(frozen=True)
class PopulationSnapshot:
    time_t: float
    positions: np.ndarray


@dataclass(frozen=True)
class LineSample:
    level_x: float
    z_count: int
    births_before_absorption: int
    pruned_count: int = 0
    work: int = 0
    status: str = "exact"


def simulate_population(params: ModelParams, t: float, key: tuple[int, int],
                        pop_cap: int = DEFAULT_POP_CAP) -> PopulationSnapshot:
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return PopulationSnapshot(time_t=0.0, positions=np.zeros(1))
    status, n, _, positions = kernels.bbm_population(
        key[0], key[1], t, params.mu, pop_cap, True)
    if status != kernels.STATUS_EXACT:
        raise PopulationCapError(
            f"population cap {pop_cap} exhausted at t={t}")
    return PopulationSnapshot(time_t=t, positions=positions)


def population_min(params: ModelParams, t: float, key: tuple[int, int],
                   pop_cap: int = DEFAULT_POP_CAP) -> tuple[int, float]:
    """(population size, minimal position) at time t, without storing paths."""
    status, n, minpos, _ = kernels.bbm_population(
        key[0], key[1], t, params.mu, pop_cap, False)
    if status != kernels.STATUS_EXACT:
        raise PopulationCapError(
            f"population cap {pop_cap} exhausted at t={t}")
    return n, minpos


def snapshot_functionals(snapshot: PopulationSnapshot):
    """(D_t, W_t, M_t) in one pass: derivative & additive martingales, min."""
    x = snapshot.positions
    e = np.exp(-x)
    return float(np.sum(x * e)), float(np.sum(e)), float(np.min(x))


def sample_line(params: ModelParams, level_x: float, key: tuple[int, int],
                barrier_B: float = DEFAULT_LINE_BARRIER_B,
                work_cap: int = DEFAULT_LINE_WORK_CAP,
                frontier_cap: int = 1 << 24) -> LineSample:
    """Sample the stopping line at level_x: Z_x and births before absorption.

    For level_x < 0 the line is a downward first passage and subtrees whose
    death position exceeds level_x + barrier_B are pruned (each would have
    contributed at most e^{-barrier_B} expected crossers).
    """
    barrier = level_x + barrier_B
    z, births, pruned, work, status = kernels.bbm_line(
        key[0], key[1], level_x, barrier, params.mu, work_cap, frontier_cap)
    return LineSample(level_x=level_x, z_count=z,
                      births_before_absorption=births,
                      pruned_count=pruned, work=work,
                      status=STATUS_NAMES[status])


@dataclass(frozen=True)
class ComposedSample:
    count: CensoredCount
    line: LineSample


def sample_N_x_composed(params: ModelParams, level_x: float,
                        explore_config: ExploreConfig, key: tuple[int, int],
                        line_barrier_B: float = DEFAULT_LINE_BARRIER_B
                        ) -> ComposedSample:
    """N_x via the stopping-line decomposition.

    Draws the line at level_x, then z_count independent copies of N rooted
    at the line level, plus the (Z_x - 1) births before absorption when
    level_x > 0.  Censor statuses propagate; the composed value is clamped
    at the explore count_cap so thresholds stay comparable with direct
    sampling.
    """
    line_key = derive_key(key, 0, DOMAIN_LINE)
    line = sample_line(params, level_x, line_key, barrier_B=line_barrier_B)
    cap = explore_config.count_cap
    total = (line.z_count - 1) if level_x > 0 else 0
    pruned = line.pruned_count
    work = line.work
    status = 0 if line.status == "exact" else 2
    cfg = ExploreConfig(
        level_x=level_x, barrier_B=explore_config.barrier_B,
        node_cap=explore_config.node_cap, count_cap=cap,
        frontier_cap=explore_config.frontier_cap, start=level_x)
    for j in range(line.z_count):
        if total >= cap or status == 1:
            break
        copy = explore_tree(params, cfg, derive_key(key, j + 1, DOMAIN_SUBCOPY))
        total += copy.value
        pruned += copy.pruned_count
        work += copy.work
        if copy.status == "count_capped":
            status = 1
        elif copy.status == "work_capped" and status == 0:
            status = 2
    if total >= cap:
        total = cap
        status = 1
    count = CensoredCount(
        value=total, status=STATUS_NAMES[status], pruned_count=pruned,
        work=work,
        bias_bound=pruned * math.exp(-min(explore_config.barrier_B,
                                          line_barrier_B)))
    return ComposedSample(count=count, line=line)
