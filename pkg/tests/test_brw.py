import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbmlab import rng
from bbmlab.brw import (CensoredCount, ExploreConfig, explore_tree,
                        pruning_bias_bound, sample_alltime_min)
from bbmlab.params import make_params

PARAMS = make_params(2.0)


def _key(i: int):
    return rng.stream_key(424242, rng.DOMAIN_BRW, i)


def small_cfg(**kw):
    base = dict(level_x=0.0, barrier_B=8.0, node_cap=10**6,
                count_cap=10_000, frontier_cap=1 << 20)
    base.update(kw)
    return ExploreConfig(**base)


def test_deterministic_given_key():
    cfg = small_cfg()
    a = explore_tree(PARAMS, cfg, _key(7))
    b = explore_tree(PARAMS, cfg, _key(7))
    assert a == b
    c = explore_tree(PARAMS, cfg, _key(8))
    assert (a.value, a.work) != (c.value, c.work)


def test_status_semantics():
    censored = explore_tree(PARAMS, small_cfg(count_cap=2), _key(11))
    # count 0/1 samples stay exact; a capped sample reports exactly the cap
    if censored.status == "count_capped":
        assert censored.value == 2
    tiny = explore_tree(PARAMS, small_cfg(node_cap=3, count_cap=10), _key(3))
    assert tiny.status in ("exact", "work_capped")
    assert tiny.work <= 3 + 2  # cap checked before each dequeue


def test_config_validation():
    with pytest.raises(ValueError):
        small_cfg(barrier_B=0.0)
    with pytest.raises(ValueError):
        small_cfg(count_cap=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_barrier_monotone_coupling(i):
    """Raising the barrier can only reveal more of the same tree."""
    key = _key(i)
    lo = explore_tree(PARAMS, small_cfg(barrier_B=5.0), key)
    hi = explore_tree(PARAMS, small_cfg(barrier_B=9.0), key)
    if lo.status == "exact" and hi.status == "exact":
        assert lo.value <= hi.value
        assert lo.work <= hi.work


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_counts_bounded_by_work(i):
    s = explore_tree(PARAMS, small_cfg(), _key(i))
    assert 0 <= s.value <= 10_000
    assert s.value <= s.work
    assert s.pruned_count <= s.work
    assert s.bias_bound == pytest.approx(
        pruning_bias_bound(s, 8.0), abs=1e-15)


def test_translation_invariance_exact():
    """Shifting start and level together reuses the same displacements."""
    for i in range(20):
        a = explore_tree(PARAMS, small_cfg(level_x=0.0, start=0.0), _key(i))
        b = explore_tree(PARAMS, small_cfg(level_x=3.5, start=3.5), _key(i))
        assert a.value == b.value
        assert a.work == b.work
        assert b.min_seen == pytest.approx(a.min_seen + 3.5, abs=1e-9)


def test_alltime_min_exponential_bound():
    """P(min over the whole tree <= -y) <= e^{-y} (many-to-one bound)."""
    y = 3.0
    n = 400
    hits = sum(sample_alltime_min(PARAMS, small_cfg(), _key(5_000 + i)) <= -y
               for i in range(n))
    bound = math.exp(-y)
    se = math.sqrt(bound * (1 - bound) / n)
    assert hits / n <= bound + 4 * se


def test_window_full_range_matches_total():
    cfg = small_cfg(level_x=-1.0,
                    windows=((0.0, math.inf, math.inf),
                             (2.0, 1.0, 1.0)))  # second window is empty
    for i in range(15):
        s = explore_tree(PARAMS, cfg, _key(i))
        if s.status == "exact":
            assert s.window_counts[0] == s.value
        assert s.window_counts[1] == 0


def test_window_subsets_nest():
    x = -2.0
    cfg = small_cfg(level_x=x,
                    windows=((0.0, 1.0, math.inf),
                             (0.0, 2.0, math.inf),
                             (0.0, 2.0, 3.0)))
    for i in range(15):
        s = explore_tree(PARAMS, cfg, _key(100 + i))
        w1, w2, w3 = s.window_counts
        assert w1 <= w2          # wider generation range
        assert w3 <= w2          # extra path constraint
        if s.status == "exact":
            assert w2 <= s.value


def test_tail_heaviness_smoke():
    """Counts are heavy-tailed: some sample among 300 exceeds 100."""
    vals = [explore_tree(PARAMS, small_cfg(), _key(20_000 + i)).value
            for i in range(300)]
    assert max(vals) > 100
    assert np.median(vals) <= 2
