"""Command-line interface.

Subcommands: sim-n, sim-line, sim-nx, sim-composed, sim-pop, probe-spine,
verify, report.  Options may come from a TOML config file (``--config``);
command-line flags win.  ``BBMLAB_SEED`` sets the default seed.

Exit codes: 0 success / all criteria pass, 1 criterion failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import rng, verify
from .kernels import BACKEND
from .runner import run_batches, write_csv, write_summary
from .spine import ballot_probe
from .stats import EmpiricalTail, tail_ratio, truncated_mean_offset

BRW_HEADER = ["index", "count", "status", "pruned", "work", "bias_bound"]
LINE_HEADER = ["index", "level_x", "z_count", "births", "pruned", "work",
               "status"]
COMPOSED_HEADER = ["index", "level_x", "count", "status", "z_count",
                   "births", "pruned", "work", "bias_bound"]
POP_HEADER = ["index", "t", "D", "W", "M", "size"]
POP_MIN_HEADER = ["index", "t", "M", "size"]


def _default_seed() -> int:
    return int(os.environ.get("BBMLAB_SEED", verify.DEFAULT_SEED))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", "-n", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--summary", default=None, help="JSON summary path")
    p.add_argument("--config", default=None, help="TOML config file")
    p.add_argument("--mu", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bbmlab",
        description="Monte Carlo laboratory for boundary-case branching "
                    "Brownian motion and its embedded branching random "
                    "walk.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim-n", help="sample the negative-half-line "
                                     "offspring count N")
    _add_common(p)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--barrier-B", type=float, default=None)
    p.add_argument("--count-cap", type=int, default=None)
    p.add_argument("--node-cap", type=int, default=None)

    p = sub.add_parser("sim-line", help="sample the stopping line "
                                        "(first-passage count, births)")
    _add_common(p)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--barrier-B", type=float, default=None)
    p.add_argument("--work-cap", type=int, default=None)

    p = sub.add_parser("sim-nx", help="sample N_x directly at level x")
    _add_common(p)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--barrier-B", type=float, default=None)
    p.add_argument("--count-cap", type=int, default=None)
    p.add_argument("--node-cap", type=int, default=None)

    p = sub.add_parser("sim-composed", help="sample N_x via the "
                                            "stopping-line decomposition")
    _add_common(p)
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--barrier-B", type=float, default=None)
    p.add_argument("--count-cap", type=int, default=None)
    p.add_argument("--node-cap", type=int, default=None)
    p.add_argument("--line-barrier-B", type=float, default=None)

    p = sub.add_parser("sim-pop", help="simulate the population at time t "
                                       "and record (D, W, M)")
    _add_common(p)
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--pop-cap", type=int, default=None)
    p.add_argument("--min-only", action="store_true",
                   help="record only the minimum (cheaper at large t)")

    p = sub.add_parser("probe-spine", help="estimate a ballot/local-limit "
                                           "probability on the spine walk")
    _add_common(p)
    p.add_argument("--kind", choices=("local_limit", "ballot",
                                      "ballot_backward", "three_factor"),
                   default=None)
    p.add_argument("--n", dest="steps", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--a", type=float, default=None)

    p = sub.add_parser("verify", help="run the acceptance suite")
    _add_common(p)
    p.add_argument("--suite", choices=("quick", "full"), default=None)
    p.add_argument("--only", default=None,
                   help="comma-separated criterion ids (e.g. c03,c04)")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--prepare-only", action="store_true",
                   help="generate cached datasets and exit")
    p.add_argument("--datasets", default=None,
                   help="comma-separated dataset names for --prepare-only")
    p.add_argument("--report-json", default=None)

    p = sub.add_parser("report", help="write a markdown report and "
                                      "plot-ready CSV series")
    _add_common(p)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--out-dir", default=None)
    return ap


def _load_config(path):
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _opt(args, cfg, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    key = name.replace("_", "-")
    section = cfg.get(args.command, {})
    if key in section:
        return section[key]
    if key in cfg:
        return cfg[key]
    return default


def _emit(rows, header, config, out, summary, estimates=None):
    if out:
        write_csv(out, header, rows, config)
        print(f"wrote {len(rows)} rows to {out}")
    if summary:
        write_summary(summary, estimates or {}, config)
        print(f"wrote summary to {summary}")
    if not out and not summary:
        for row in rows[:20]:
            print(",".join(str(v) for v in row))
        if len(rows) > 20:
            print(f"... ({len(rows)} rows total; use --out to save)")


def _tail_estimates(rows):
    statuses = np.array([verify.STATUS_CODE[r[2]] for r in rows])
    values = np.array([r[1] for r in rows], dtype=np.int64)
    keep = statuses != 2
    tail = EmpiricalTail(values=values[keep], censored=statuses[keep] == 1,
                         censor_threshold=None if not (statuses == 1).any()
                         else int(values[statuses == 1].min()))
    est = {}
    for n in (100, 1000):
        if tail.exceed_count(min(n, values.max() if values.size else 0)) \
                >= 10 and (tail.censor_threshold is None
                           or n <= tail.censor_threshold):
            e = tail_ratio(tail, n)
            est[f"tail_ratio_{n}"] = {"value": e.value, "stderr": e.stderr}
            o = truncated_mean_offset(tail, n)
            est[f"truncated_offset_{n}"] = {"value": o.value,
                                            "stderr": o.stderr}
    return est


def cmd_sim_n(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 1000)
    mu = _opt(args, cfg, "mu", 2.0)
    level = _opt(args, cfg, "level", 0.0)
    barrier = _opt(args, cfg, "barrier_B", 12.0)
    count_cap = _opt(args, cfg, "count_cap", 100_000)
    node_cap = _opt(args, cfg, "node_cap", 10**8)
    workers = _opt(args, cfg, "workers", 1)
    config = dict(command="sim-n", seed=seed, samples=n, mu=mu, level=level,
                  barrier_B=barrier, count_cap=count_cap, node_cap=node_cap)
    rows = run_batches("brw", n, seed,
                       (mu, level, barrier, node_cap, count_cap, 0.0),
                       workers=workers)
    _emit(rows, BRW_HEADER, config, args.out, args.summary,
          _tail_estimates(rows) if args.summary else None)
    return 0


def cmd_sim_line(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 1000)
    mu = _opt(args, cfg, "mu", 2.0)
    x = _opt(args, cfg, "x", 1.0)
    barrier = _opt(args, cfg, "barrier_B", 12.0)
    work_cap = _opt(args, cfg, "work_cap", 10**9)
    workers = _opt(args, cfg, "workers", 1)
    config = dict(command="sim-line", seed=seed, samples=n, mu=mu, x=x,
                  barrier_B=barrier, work_cap=work_cap)
    rows = run_batches("line", n, seed, (mu, x, barrier, work_cap),
                       workers=workers)
    est = None
    if args.summary:
        z = np.array([r[2] for r in rows], dtype=float)
        est = {"mean_z": {"value": float(z.mean()),
                          "stderr": float(z.std(ddof=1) / math.sqrt(n))}}
    _emit(rows, LINE_HEADER, config, args.out, args.summary, est)
    return 0


def cmd_sim_nx(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 1000)
    mu = _opt(args, cfg, "mu", 2.0)
    x = _opt(args, cfg, "x", 1.0)
    barrier = _opt(args, cfg, "barrier_B", 12.0)
    count_cap = _opt(args, cfg, "count_cap", 100_000)
    node_cap = _opt(args, cfg, "node_cap", 10**8)
    workers = _opt(args, cfg, "workers", 1)
    config = dict(command="sim-nx", seed=seed, samples=n, mu=mu, x=x,
                  barrier_B=barrier, count_cap=count_cap, node_cap=node_cap)
    rows = run_batches("brw", n, seed,
                       (mu, x, barrier, node_cap, count_cap, 0.0),
                       workers=workers)
    _emit(rows, BRW_HEADER, config, args.out, args.summary)
    return 0


def cmd_sim_composed(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 1000)
    mu = _opt(args, cfg, "mu", 2.0)
    x = _opt(args, cfg, "x", 1.0)
    barrier = _opt(args, cfg, "barrier_B", 10.0)
    count_cap = _opt(args, cfg, "count_cap", 100_000)
    node_cap = _opt(args, cfg, "node_cap", 10**8)
    line_barrier = _opt(args, cfg, "line_barrier_B", 10.0)
    workers = _opt(args, cfg, "workers", 1)
    config = dict(command="sim-composed", seed=seed, samples=n, mu=mu, x=x,
                  barrier_B=barrier, count_cap=count_cap, node_cap=node_cap,
                  line_barrier_B=line_barrier)
    rows = run_batches("composed", n, seed,
                       (mu, x, barrier, node_cap, count_cap, line_barrier),
                       workers=workers)
    _emit(rows, COMPOSED_HEADER, config, args.out, args.summary)
    return 0


def cmd_sim_pop(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 1000)
    mu = _opt(args, cfg, "mu", 2.0)
    t = _opt(args, cfg, "t", 2.0)
    pop_cap = _opt(args, cfg, "pop_cap", 10**7)
    workers = _opt(args, cfg, "workers", 1)
    kind = "pop_min" if args.min_only else "pop"
    config = dict(command="sim-pop", seed=seed, samples=n, mu=mu, t=t,
                  pop_cap=pop_cap, min_only=bool(args.min_only))
    rows = run_batches(kind, n, seed, (mu, t, pop_cap), workers=workers)
    header = POP_MIN_HEADER if args.min_only else POP_HEADER
    est = None
    if args.summary and not args.min_only:
        ok = [r for r in rows if r[5] > 0]
        W = np.array([r[3] for r in ok])
        D = np.array([r[2] for r in ok])
        est = {"mean_W": {"value": float(W.mean()),
                          "stderr": float(W.std(ddof=1)
                                          / math.sqrt(len(ok)))},
               "mean_D": {"value": float(D.mean()),
                          "stderr": float(D.std(ddof=1)
                                          / math.sqrt(len(ok)))}}
    _emit(rows, header, config, args.out, args.summary, est)
    return 0


def cmd_probe_spine(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    n = _opt(args, cfg, "samples", 100_000)
    kind = _opt(args, cfg, "kind", "ballot")
    steps = _opt(args, cfg, "steps", 100)
    alpha = _opt(args, cfg, "alpha", 1.0)
    h = _opt(args, cfg, "h", 0.0)
    a = _opt(args, cfg, "a", 0.0)
    key = rng.stream_key(seed, rng.DOMAIN_SPINE, 0)
    probe = ballot_probe(kind, steps, alpha, h, a, n, key)
    e = probe.estimate
    print(f"kind={kind} n={steps} alpha={alpha} h={h} a={a}")
    print(f"estimate={e.value:.6g} stderr={e.stderr:.3g} "
          f"ci=({e.ci_low:.6g},{e.ci_high:.6g}) hits={probe.hits} "
          f"starved={probe.starved}")
    if args.summary:
        write_summary(args.summary,
                      {"probability": {"value": e.value, "stderr": e.stderr,
                                       "hits": probe.hits,
                                       "starved": probe.starved}},
                      dict(command="probe-spine", seed=seed, samples=n,
                           kind=kind, n_steps=steps, alpha=alpha, h=h, a=a))
    return 0


def cmd_verify(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    suite = _opt(args, cfg, "suite", "quick")
    data_dir = _opt(args, cfg, "data_dir",
                    os.environ.get("BBMLAB_DATA",
                                   os.path.join(os.getcwd(), "bbmlab-data")))
    workers = _opt(args, cfg, "workers", 1)
    ctx = verify.VerifyContext(data_dir=data_dir, seed=seed, workers=workers)
    if args.prepare_only:
        names = (args.datasets.split(",") if args.datasets
                 else list(verify.DATASETS))
        for name in names:
            print(f"preparing {name} ...", flush=True)
            verify.ensure_dataset(data_dir, name, seed, workers=workers)
            print(f"  done: {verify.dataset_path(data_dir, name, seed)}",
                  flush=True)
        return 0
    only = args.only.split(",") if args.only else None
    results = verify.run_suite(ctx, suite, only=only)
    for r in results:
        print(r.line(), flush=True)
        for d in r.details:
            print(f"    {d}")
    if args.report_json:
        with open(args.report_json, "w") as fh:
            json.dump([{"cid": r.cid, "name": r.name, "passed": r.passed,
                        "details": r.details} for r in results], fh,
                      indent=2)
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return 0 if n_fail == 0 else 1


def cmd_report(args, cfg) -> int:
    seed = _opt(args, cfg, "seed", _default_seed())
    data_dir = _opt(args, cfg, "data_dir",
                    os.path.join(os.getcwd(), "bbmlab-data"))
    out_dir = _opt(args, cfg, "out_dir",
                   os.path.join(os.getcwd(), "bbmlab-report"))
    os.makedirs(out_dir, exist_ok=True)
    ctx = verify.VerifyContext(data_dir=data_dir, seed=seed)
    tail, wc = verify._brw_tail(ctx.ds("n_main"),
                                verify.DATASETS["n_main"]["count_cap"])
    tail14, _ = verify._brw_tail(ctx.ds("n_b14"),
                                 verify.DATASETS["n_b14"]["count_cap"])
    grid = np.unique(np.round(np.logspace(1, 4, 16)).astype(int))
    series = []
    for n in grid:
        r = tail_ratio(tail, int(n))
        o = truncated_mean_offset(tail, int(n))
        series.append((int(n), r.value, r.stderr, o.value, o.stderr))
    write_csv(os.path.join(out_dir, "tail_series.csv"),
              ["n", "tail_ratio", "tail_ratio_se", "trunc_offset",
               "trunc_offset_se"],
              series, dict(command="report", seed=seed, dataset="n_main"))
    bsens = []
    for n in (100, 300, 1000):
        a = tail_ratio(tail, n)
        b = tail_ratio(tail14, n)
        bsens.append((n, a.value, a.stderr, b.value, b.stderr))
    write_csv(os.path.join(out_dir, "barrier_sensitivity.csv"),
              ["n", "B12_ratio", "B12_se", "B14_ratio", "B14_se"],
              bsens, dict(command="report", seed=seed))
    md = os.path.join(out_dir, "report.md")
    with open(md, "w") as fh:
        fh.write("# bbmlab report\n\n")
        fh.write(f"- kernel backend: `{BACKEND}`\n")
        fh.write(f"- samples (main run): {tail.total}, "
                 f"work-capped fraction {wc:.2e}\n\n")
        fh.write("## Reference constants\n\n")
        fh.write("| quantity | value |\n|---|---|\n")
        fh.write(f"| truncated-mean constant log2+gamma | "
                 f"{verify.TARGET_C:.6f} |\n")
        fh.write(f"| Laplace linear coefficient 1+log2 | "
                 f"{verify.TARGET_LIN:.6f} |\n")
        fh.write(f"| positive-side mass p | {(2 + 2**0.5) / 4:.6f} |\n\n")
        fh.write("## Tail diagnostics (see tail_series.csv)\n\n")
        fh.write("| n | n*P(N>=n) | se | E[N 1{N<=n}]-log n | se |\n")
        fh.write("|---|---|---|---|---|\n")
        for row in series:
            fh.write(f"| {row[0]} | {row[1]:.4f} | {row[2]:.4f} | "
                     f"{row[3]:.4f} | {row[4]:.4f} |\n")
        fh.write("\n## Barrier sensitivity (see barrier_sensitivity.csv)\n\n")
        fh.write("| n | B=12 | se | B=14 | se |\n|---|---|---|---|---|\n")
        for row in bsens:
            fh.write(f"| {row[0]} | {row[1]:.4f} | {row[2]:.4f} | "
                     f"{row[3]:.4f} | {row[4]:.4f} |\n")
    print(f"wrote {md}")
    return 0


COMMANDS = {
    "sim-n": cmd_sim_n, "sim-line": cmd_sim_line, "sim-nx": cmd_sim_nx,
    "sim-composed": cmd_sim_composed, "sim-pop": cmd_sim_pop,
    "probe-spine": cmd_probe_spine, "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = _load_config(args.config)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, cfg)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
