"""Branching-random-walk engine: censored counts of births below a level.

Explores the embedded BRW of birth positions breadth-first, pruning any
particle above level_x + barrier_B.  Caps convert resource exhaustion into
explicit censoring instead of errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .params import ModelParams

STATUS_NAMES = {0: "exact", 1: "count_capped", 2: "work_capped"}

DEFAULT_BARRIER_B = 12.0
DEFAULT_NODE_CAP = 10**8
DEFAULT_COUNT_CAP = 10**5
DEFAULT_FRONTIER_CAP = 1 << 24


@dataclass(frozen=True)
class ExploreConfig:
    level_x: float = 0.0
    barrier_B: float = DEFAULT_BARRIER_B
    node_cap: int = DEFAULT_NODE_CAP
    count_cap: int = DEFAULT_COUNT_CAP
    frontier_cap: int = DEFAULT_FRONTIER_CAP
    start: float = 0.0
    # windows: (a, b, path_cap_factor) -> births in generations
    # [a*x^2, b*x^2] with ancestry max <= factor*x (x = level_x)
    windows: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        if self.barrier_B <= 0:
            raise ValueError("barrier_B must be > 0")
        if self.node_cap < 1 or self.count_cap < 1:
            raise ValueError("caps must be >= 1")


@dataclass(frozen=True)
class CensoredCount:
    value: int
    status: str
    pruned_count: int
    work: int
    bias_bound: float
    min_seen: float = math.nan
    window_counts: tuple[int, ...] = ()


def _window_arrays(config: ExploreConfig):
    x = config.level_x
    lo, hi, pm = [], [], []
    for (a, b, lam) in config.windows:
        if a >= b:
            lo.append(1)
            hi.append(0)
            pm.append(-math.inf)
            continue
        lo.append(int(math.ceil(a * x * x)))
        hi.append(2**62 if math.isinf(b) else int(math.floor(b * x * x)))
        pm.append(math.inf if math.isinf(lam) else lam * x)
    return (np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64),
            np.asarray(pm, dtype=np.float64))


def explore_tree(params: ModelParams, config: ExploreConfig,
                 key: tuple[int, int]) -> CensoredCount:
    """Sample one censored realization of N_{level_x}."""
    q = 1.0 - params.p
    barrier = config.level_x + config.barrier_B
    args = (key[0], key[1], config.start, config.level_x, barrier,
            q, params.r_plus, params.r_minus,
            config.node_cap, config.count_cap, config.frontier_cap)
    if config.windows:
        lo, hi, pm = _window_arrays(config)
        count, status, pruned, work, minv, wc = kernels.brw_explore_windows(
            *args, lo, hi, pm)
        wcounts = tuple(int(c) for c in wc)
    else:
        count, status, pruned, work, minv = kernels.brw_explore(*args)
        wcounts = ()
    return CensoredCount(
        value=count,
        status=STATUS_NAMES[status],
        pruned_count=pruned,
        work=work,
        bias_bound=pruned * math.exp(-config.barrier_B),
        min_seen=minv,
        window_counts=wcounts,
    )


def sample_alltime_min(params: ModelParams, config: ExploreConfig,
                       key: tuple[int, int]) -> float:
    """Minimal explored birth position (count nothing, barrier as usual)."""
    q = 1.0 - params.p
    barrier = config.start + config.barrier_B
    _, _, _, _, minv = kernels.brw_explore(
        key[0], key[1], config.start, -math.inf, barrier,
        q, params.r_plus, params.r_minus,
        config.node_cap, config.count_cap, config.frontier_cap)
    return minv


def pruning_bias_bound(sample: CensoredCount, barrier_B: float) -> float:
    """First-moment bound on births lost to pruning: pruned * e^{-B}."""
    return sample.pruned_count * math.exp(-barrier_B)
