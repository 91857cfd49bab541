"""Command line: ``ehpower {simulate,oracle,figures,selftest}``.

Output files default to ``$EHPOWER_OUTDIR`` (or the working directory).
Exit status is 0 only when no invariant was violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .core import InvariantViolation, ParameterError
from .harness.config import ExperimentConfig
from .harness.figures import FIGURE_IDS, run_figure_suite
from .harness.runner import oracle_for_config, run_experiment
from .harness.svg import result_chart

OUTDIR_ENV = "EHPOWER_OUTDIR"


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "replications", None):
        out["replications"] = args.replications
    if getattr(args, "horizon", None):
        out["horizon"] = args.horizon
    if getattr(args, "seed", None) is not None:
        out["master_seed"] = args.seed
    return out


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if _overrides(args):
        cfg = cfg.with_overrides(_overrides(args))
    csv_path = args.out_csv or cfg.outputs.get("csv") or default_outdir() / f"{cfg.name}.csv"
    svg_path = args.out_svg or cfg.outputs.get("svg")
    try:
        result = run_experiment(cfg, u_star=args.u_star, strict=not args.keep_going)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    result.write_csv(csv_path)
    if svg_path:
        ref = ("U*", args.u_star) if args.u_star is not None else None
        Path(svg_path).write_text(result_chart([result], [cfg.name], title=cfg.name, reference=ref))
    print(json.dumps(result.summary, indent=2))
    return 0 if result.summary["violations"] == 0 else 1


def cmd_oracle(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    p_star, u_star = oracle_for_config(cfg, args.samples, tol=args.tol)
    env = cfg.environment()
    print(json.dumps({
        "u_star": u_star,
        "p_star": [float(x) for x in p_star],
        "samples": args.samples,
        "mean_energy": env.energy.mean,
        "feasible_cap": min(cfg.problem_params().p_max, env.energy.mean),
    }, indent=2))
    return 0


def cmd_figures(args) -> int:
    outdir = Path(args.outdir) if args.outdir else default_outdir()
    ids = FIGURE_IDS if args.id == "all" else (int(args.id),)
    for fid in ids:
        try:
            out = run_figure_suite(fid, outdir, _overrides(args), oracle_samples=args.oracle_samples)
        except InvariantViolation as exc:
            print(f"figure {fid}: invariant violation: {exc}", file=sys.stderr)
            return 1
        finals = {lab: round(r.summary["final_avg_utility"], 4)
                  for lab, r in zip(out.labels, out.results)}
        print(f"figure {fid}: {out.reference[0]}={out.reference[1]:.4f} {finals} -> {out.svg_path}")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = True
    for name, passed, detail in run_selftest(quick=not args.full):
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ehpower", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run one experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out-csv")
    sp.add_argument("--out-svg")
    sp.add_argument("--u-star", type=float, help="oracle value for the envelope in the summary")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--keep-going", action="store_true",
                    help="count invariant violations instead of aborting")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle", help="solve the expected-utility upper bound")
    sp.add_argument("--config", required=True)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("figures", help="reproduce a bundled figure (CSV + SVG)")
    sp.add_argument("--id", required=True, choices=[str(i) for i in FIGURE_IDS] + ["all"])
    sp.add_argument("--outdir")
    sp.add_argument("--replications", type=int)
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--oracle-samples", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_figures)

    sp = sub.add_parser("selftest", help="run the built-in invariant and property checks")
    sp.add_argument("--full", action="store_true", help="use full trial counts")
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
