"""Command-line entry point: ``run``, ``verify`` and ``probe`` subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .. import oracle
from ..metrics import LinkBudget
from ..pipeline import candidate_pools, reflection_vector, total_channel
from .config import EXPERIMENTS, SWEEPS, ConfigError, SystemConfig
from .experiment import run_experiment, run_named
from .results import FORMATS, ResultsWriteError, emit_plot_data, emit_results

OUT_ENV = "IRS_MMWAVE_OUT"
VERIFY_KINDS = ("lemma1", "irs", "analog")
DEFAULT_PROBE_SIZES = ((16, 8, 16), (64, 16, 64), (256, 64, 256))


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "results"))


def _load_config(args) -> SystemConfig:
    cfg = SystemConfig.from_json(args.config) if args.config else SystemConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    for item in args.set or ():
        key, _, raw = item.partition("=")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return SystemConfig.from_dict({**cfg.to_dict(), **overrides})


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.experiment == "custom":
        if not args.sweep or not args.values:
            raise ConfigError({"sweep": "custom runs need --sweep and --values"})
        run = run_experiment(cfg, args.sweep, [float(v) for v in args.values], args.workers)
    else:
        values = [float(v) for v in args.values] if args.values else None
        run = run_named(args.experiment, cfg, args.workers, values)
    out = args.out or default_out()
    path = emit_results(run.results, out / f"{args.experiment}.{args.format}", args.format)
    emit_plot_data(run.results, out / f"{args.experiment}.plot.csv")
    for r in run.results:
        print(f"{r.sweep_param}={r.sweep_value:g} {r.series:18s} "
              f"{r.mean_se_bps_hz:8.4f} +/- {r.stderr:.4f}  (n={r.n_trials}, degenerate={r.n_degenerate})")
    print(f"wrote {path} in {run.wall_time_s:.1f} s")
    return 0


def verify_reports(kind: str, instances: int, seed: int) -> list[oracle.OracleReport]:
    rng = np.random.default_rng(seed)
    link = LinkBudget.from_dbm(40.0)
    if kind == "lemma1":
        return oracle.lemma1_batch(rng, instances)
    reports = []
    for _ in range(instances):
        if kind == "irs":
            tri = oracle.small_irs_triple(rng, n_t=4, n_r=4, n_elements=4, n_path=3)
            reports.append(oracle.exhaustive_irs_search(tri, 8, link, n_streams=2))
        elif kind == "analog":
            tri = oracle.small_irs_triple(rng, n_t=16, n_r=8, n_elements=16, n_path=3)
            h = total_channel(tri, reflection_vector("proposed", tri))
            a_t, a_r = candidate_pools(tri)
            reports.append(oracle.exhaustive_analog_search(h, a_t, a_r, 2, 2, 2, link))
        else:
            raise ValueError(f"unknown certificate kind {kind!r}")
    return reports


def cmd_verify(args) -> int:
    out = args.out or default_out()
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for kind in (VERIFY_KINDS if args.kind == "all" else (args.kind,)):
        reports = verify_reports(kind, args.instances or {"lemma1": 1000}.get(kind, 100),
                                 0 if args.seed is None else args.seed)
        path = out / f"verify-{kind}.jsonl"
        path.write_text("".join(r.to_json() + "\n" for r in reports))
        bad = sum(not r.passed for r in reports)
        gaps = np.array([r.gap for r in reports])
        print(f"{kind}: {len(reports) - bad}/{len(reports)} passed, "
              f"max gap {gaps.max():.3e}, median gap {np.median(gaps):.3e} -> {path}")
        failed += bad
    return 1 if failed else 0


def cmd_probe(args) -> int:
    sizes = [tuple(int(x) for x in s.split(",")) for s in args.sizes] if args.sizes else DEFAULT_PROBE_SIZES
    rows = oracle.asymptotics_probe(sizes, args.trials or 200,
                                    np.random.default_rng(0 if args.seed is None else args.seed))
    out = args.out or default_out()
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"probe.{args.format}"
    if args.format == "csv":
        with path.open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    else:
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))
    for r in rows:
        print(" ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials (or probe draws)")
    common.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./results)")
    common.add_argument("--format", choices=FORMATS, default="csv")

    p = argparse.ArgumentParser(prog="irs-mmwave", description="IRS-aided mmWave MIMO simulations")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run a named experiment or a custom sweep")
    run.add_argument("experiment", choices=sorted(EXPERIMENTS) + ["custom"])
    run.add_argument("--config", type=Path, help="JSON config file")
    run.add_argument("--set", action="append", metavar="FIELD=VALUE", help="override a config field")
    run.add_argument("--sweep", choices=sorted(SWEEPS), help="swept parameter for custom runs")
    run.add_argument("--values", nargs="+", help="sweep values")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", parents=[common], help="brute-force certificate batches")
    ver.add_argument("--kind", choices=VERIFY_KINDS + ("all",), default="all")
    ver.add_argument("--instances", type=int)
    ver.set_defaults(func=cmd_verify)

    probe = sub.add_parser("probe", parents=[common], help="finite-size asymptotics table")
    probe.add_argument("--sizes", nargs="+", metavar="NT,NR,M")
    probe.set_defaults(func=cmd_probe)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ResultsWriteError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
