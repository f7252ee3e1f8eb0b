"""Command-line entry point: ``adaport {bounds,simulate,trace-run,matrices}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import load_instance
from .experiment import config_from_dict, load_config, run_experiment, summary_rows, write_outputs
from .theory import SWEEP_OPTIMAL, bound_report, alpha_sweep_grid, beta_sweep_grid, sweep_fig3, write_sweep_csv
from .traces import (
    DEFAULT_INTERVAL_S,
    build_matrices,
    bundled_trace,
    default_portions,
    read_bandwidth_csv,
    read_pose_csv,
    write_matrices_csv,
)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--seed", type=int, help="base seed (replication r uses seed + r)")
    p.add_argument("--horizon", type=int, help="timeslots per replication")
    p.add_argument("--reps", type=int, help="number of replications")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--svg", action="store_true", help="also write regret.svg")


def cmd_bounds(args) -> int:
    if args.instance:
        rep = bound_report(load_instance(args.instance))
        if args.log2:
            rep = rep.scaled(0.6931471805599453)
        print(json.dumps({"c_2fb": rep.c_2fb, "c_2bb": rep.c_2bb, "c_1b": rep.c_1b,
                          "per_arm_terms": {k: v.tolist() for k, v in rep.per_arm_terms.items()}},
                         indent=2))
        return 0
    fixed, varying = SWEEP_OPTIMAL, alpha_sweep_grid() + beta_sweep_grid()
    if args.config:
        doc = json.loads(args.config.read_text())
        fixed = tuple(doc.get("fixed", fixed))
        varying = [tuple(v) for v in doc.get("varying", varying)]
    rows = sweep_fig3(fixed, varying)
    out = args.out or Path("bounds.csv")
    write_sweep_csv(rows, out, log2=args.log2)
    for r in rows:
        print(f"alpha_sub={r.alpha_sub:<5} beta_sub={r.beta_sub:<5} 2/F/B={r.c_2fb:9.4f} "
              f"2/B/B={r.c_2bb:9.4f} 1/B={r.c_1b:9.4f} {r.status}")
    print(f"wrote {out}")
    return 0


def _run(args, *, trace: bool) -> int:
    overrides = dict(base_seed=args.seed, horizon=args.horizon, replications=args.reps)
    if args.config:
        cfg = load_config(args.config, **overrides)
    elif trace and args.bundled:
        doc = {"policies": ["adaport", "ts1b", "ts2bb", "exp3", "heuristic"],
               "trace": {"bundled": args.bundled}}
        cfg = config_from_dict(doc, **overrides)
    else:
        print("error: --config is required" + (" (or --bundled)" if trace else ""), file=sys.stderr)
        return 2
    if trace == cfg.is_synthetic:
        kind = "trace" if trace else "synthetic"
        print(f"error: config does not describe a {kind} experiment", file=sys.stderr)
        return 2
    outcomes = run_experiment(cfg)
    out = args.out or cfg.output or Path("runs")
    write_outputs(cfg, outcomes, out, svg=args.svg)
    for line in summary_rows(outcomes):
        print(line)
    print(f"wrote {out}")
    return 0


def cmd_matrices(args) -> int:
    if args.bundled:
        poses, bw = bundled_trace(args.bundled)
    elif args.poses and args.bandwidth:
        poses, bw = read_pose_csv(args.poses), read_bandwidth_csv(args.bandwidth)
    else:
        print("error: give --bundled or both --poses and --bandwidth", file=sys.stderr)
        return 2
    m = build_matrices(poses, bw, default_portions(args.base_megabits), args.horizon or 30_000,
                       args.interval)
    out = args.out or Path("matrices.csv")
    write_matrices_csv(m, out)
    print(f"wrote {m.t_count}x{m.n_arms} matrices to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaport", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="lower-bound constants and two-arm sweeps")
    p.add_argument("--config", type=Path, help='JSON with "fixed": [a, b] and "varying": [[a, b], ...]')
    p.add_argument("--instance", type=Path, help="report constants for one instance file")
    p.add_argument("--out", type=Path, help="sweep CSV path (default bounds.csv)")
    p.add_argument("--log2", action="store_true", help="report constants per bit instead of per nat")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="synthetic Bernoulli experiments")
    _common(p)
    p.set_defaults(func=lambda a: _run(a, trace=False))

    p = sub.add_parser("trace-run", help="trace-driven experiments")
    _common(p)
    p.add_argument("--bundled", choices=["100", "150"], help="use a packaged trace pair")
    p.set_defaults(func=lambda a: _run(a, trace=True))

    p = sub.add_parser("matrices", help="emit feedback matrices as CSV")
    p.add_argument("--poses", type=Path)
    p.add_argument("--bandwidth", type=Path)
    p.add_argument("--bundled", choices=["100", "150"])
    p.add_argument("--horizon", type=int)
    p.add_argument("--interval", type=float, default=DEFAULT_INTERVAL_S, help="frame interval in seconds")
    p.add_argument("--base-megabits", type=float, default=0.9,
                   help="payload of the minimum-viewport portion")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_matrices)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
