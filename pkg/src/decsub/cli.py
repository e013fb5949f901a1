"""Command line entry point.

Subcommands:
  run    --config cfg.toml [--out dir] [--seeds 1,2,3]
  ingest --ratings file.csv --n N --t T --b B [--check]
  plot   --in 'out/*.csv' --out curves.svg
  probe  --trace out/tag_trace.npz

Exit codes: 0 success, 1 config/usage error, 2 audit or probe failure.
"""

from __future__ import annotations

import argparse
import glob
import sys

from .algorithms import Trace
from .errors import AuditFailureError, DecsubError
from .evaluation import probe_report
from .harness import ExperimentConfig, emit_plots, ingest_ratings, \
    run_experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="decsub",
        description="Decentralized online DR-submodular maximization "
                    "simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment grid")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seeds", default=None,
                       help="comma-separated override")

    p_ing = sub.add_parser("ingest", help="check a ratings CSV")
    p_ing.add_argument("--ratings", required=True)
    p_ing.add_argument("--n", type=int, required=True)
    p_ing.add_argument("--t", type=int, required=True)
    p_ing.add_argument("--b", type=int, required=True)
    p_ing.add_argument("--check", action="store_true")

    p_plot = sub.add_parser("plot", help="aggregate ratio-curve SVG")
    p_plot.add_argument("--in", dest="inputs", required=True)
    p_plot.add_argument("--out", required=True)

    p_probe = sub.add_parser("probe", help="lemma-bound report for a trace")
    p_probe.add_argument("--trace", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except AuditFailureError as exc:
        print(f"audit failure: {exc}", file=sys.stderr)
        return 2
    except DecsubError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        cfg = ExperimentConfig.from_toml(args.config)
        if args.out:
            cfg.out_dir = args.out
        if args.seeds:
            cfg.seeds = tuple(int(s) for s in args.seeds.split(","))
        results = run_experiment(cfg)
        for cell in results["cells"]:
            ratios = ", ".join(f"{r:.4g}" for r in cell["final_ratio"])
            print(f"{cell['tag']}: final ratio per node [{ratios}]")
        for failure in results["failures"]:
            print(f"FAILED {failure['tag']}: {failure['error']}",
                  file=sys.stderr)
        bad_probe = any(not p["passed"] for cell in results["cells"]
                        for p in cell["probes"])
        if results["failures"]:
            return 1
        return 2 if bad_probe else 0

    if args.command == "ingest":
        blocks, report = ingest_ratings(args.ratings, args.n, args.t, args.b)
        print(f"rounds: {len(blocks)}, users/round: {blocks[0].shape[0]}, "
              f"movies: {blocks[0].shape[1]}")
        for key, val in sorted(report.items()):
            print(f"{key}: {val}")
        return 0

    if args.command == "plot":
        paths = sorted(glob.glob(args.inputs))
        emit_plots(paths, args.out)
        print(f"wrote {args.out}")
        return 0

    if args.command == "probe":
        trace = Trace.load(args.trace)
        entries = probe_report(trace)
        failed = False
        for entry in entries:
            status = "pass" if entry["passed"] else "FAIL"
            print(f"{status} {entry['name']}: observed {entry['observed']:.6g}"
                  f" bound {entry['bound']:.6g} margin {entry['margin']:.3g}")
            failed = failed or not entry["passed"]
        return 2 if failed else 0

    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
