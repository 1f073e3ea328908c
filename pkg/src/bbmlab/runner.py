"""Batch execution and output plumbing.

Sample i of an experiment uses the stream key (seed, domain, i) only, so
any partition of [0, n) into batches and any worker count produces the
same records; batches are merged in index order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import multiprocessing as mp
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import rng
from .bbm import population_min, sample_line, sample_N_x_composed, \
    simulate_population, snapshot_functionals, PopulationCapError
from .brw import ExploreConfig, explore_tree
from .params import make_params

CSV_SCHEMA_VERSION = 1


def config_fingerprint(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(path, columns, rows, config: dict):
    with open(path, "w", newline="") as fh:
        fh.write(f"# bbmlab-csv v{CSV_SCHEMA_VERSION}\n")
        fh.write("# config: "
                 + json.dumps(config, sort_keys=True, separators=(",", ":"))
                 + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)


def write_summary(path, estimates: dict, config: dict):
    out = {
        "config": config,
        "fingerprint": config_fingerprint(config),
        "estimates": estimates,
    }
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


# ---------------------------------------------------------------------------
# batch tasks (module-level for picklability)
# ---------------------------------------------------------------------------

def _brw_batch(args):
    (seed, i0, m, mu, level_x, barrier_B, node_cap, count_cap, start) = args
    params = make_params(mu)
    cfg = ExploreConfig(level_x=level_x, barrier_B=barrier_B,
                        node_cap=node_cap, count_cap=count_cap, start=start)
    out = []
    for i in range(i0, i0 + m):
        key = rng.stream_key(seed, rng.DOMAIN_BRW, i)
        cc = explore_tree(params, cfg, key)
        out.append((i, cc.value, cc.status, cc.pruned_count, cc.work,
                    cc.bias_bound))
    return out


def _line_batch(args):
    (seed, i0, m, mu, x, barrier_B, work_cap) = args
    params = make_params(mu)
    out = []
    for i in range(i0, i0 + m):
        key = rng.stream_key(seed, rng.DOMAIN_LINE, i)
        ls = sample_line(params, x, key, barrier_B=barrier_B,
                         work_cap=work_cap)
        out.append((i, x, ls.z_count, ls.births_before_absorption,
                    ls.pruned_count, ls.work, ls.status))
    return out


def _composed_batch(args):
    (seed, i0, m, mu, x, barrier_B, node_cap, count_cap, line_barrier_B) = args
    params = make_params(mu)
    cfg = ExploreConfig(level_x=x, barrier_B=barrier_B, node_cap=node_cap,
                        count_cap=count_cap, start=x)
    out = []
    for i in range(i0, i0 + m):
        key = rng.stream_key(seed, rng.DOMAIN_COMPOSED, i)
        cs = sample_N_x_composed(params, x, cfg, key,
                                 line_barrier_B=line_barrier_B)
        out.append((i, x, cs.count.value, cs.count.status, cs.line.z_count,
                    cs.line.births_before_absorption, cs.count.pruned_count,
                    cs.count.work, cs.count.bias_bound))
    return out


def _pop_batch(args):
    (seed, i0, m, mu, t, pop_cap) = args
    params = make_params(mu)
    out = []
    for i in range(i0, i0 + m):
        key = rng.stream_key(seed, rng.DOMAIN_POP, i)
        try:
            snap = simulate_population(params, t, key, pop_cap=pop_cap)
        except PopulationCapError:
            out.append((i, t, math.nan, math.nan, math.nan, -1))
            continue
        d, w, mmin = snapshot_functionals(snap)
        out.append((i, t, d, w, mmin, snap.positions.size))
    return out


def _pop_min_batch(args):
    (seed, i0, m, mu, t, pop_cap) = args
    params = make_params(mu)
    out = []
    for i in range(i0, i0 + m):
        key = rng.stream_key(seed, rng.DOMAIN_POP, i)
        try:
            n, minpos = population_min(params, t, key, pop_cap=pop_cap)
        except PopulationCapError:
            out.append((i, t, math.nan, -1))
            continue
        out.append((i, t, minpos, n))
    return out


_BATCHES = {
    "brw": _brw_batch,
    "line": _line_batch,
    "composed": _composed_batch,
    "pop": _pop_batch,
    "pop_min": _pop_min_batch,
}


def run_batches(kind: str, n_samples: int, seed: int, task_args: tuple,
                workers: int = 1, batch_size: int = 1000):
    """Run n_samples of a batch task, merged in batch-index order."""
    fn = _BATCHES[kind]
    jobs = []
    i0 = 0
    while i0 < n_samples:
        m = min(batch_size, n_samples - i0)
        jobs.append((seed, i0, m) + task_args)
        i0 += m
    if workers <= 1:
        results = [fn(j) for j in jobs]
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers) as pool:
            results = pool.map(fn, jobs, chunksize=1)
    rows = []
    for r in results:
        rows.extend(r)
    return rows
