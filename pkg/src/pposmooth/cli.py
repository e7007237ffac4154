"""Command-line front end: train / compare / verify / alpha-sweep.

Exit codes: 0 success, 2 bad configuration, 3 run aborted on a non-finite
loss (diagnostics written next to the outputs).  Flags override built-in
defaults; a JSON plan file (--plan) sits between the two.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .analysis import (
    DEFAULT_BETA_GRID,
    alpha_for_dimension,
    random_instances,
    run_property_checks,
    verify_theorem,
)
from .clip import ClipSpec, Variant
from .envs import ConfigError, make_env
from .harness import Cell, cell_name, run_cell, run_grid, table1, export_variant_curves
from .trainer import TrainConfig, TrainingAborted, train

DEFAULT_ALPHA_SWEEP = (-0.1, 0.05, 0.1, 0.2, 0.3)

_BASE_KEYS = (
    "gamma",
    "lam",
    "learning_rate",
    "epochs",
    "steps_per_epoch",
    "repeat_per_collect",
    "batch_size",
    "hidden_dim",
    "normalize_advantages",
    "max_grad_norm",
)


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--env", default=None, help="reacher2d | pendulum | pointmass-n<k>")
    parser.add_argument("--epsilon", type=float, default=None)
    parser.add_argument("--gamma", type=float, default=None)
    parser.add_argument("--lam", type=float, default=None)
    parser.add_argument("--lr", dest="learning_rate", type=float, default=None)
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--steps-per-epoch", type=int, default=None)
    parser.add_argument("--repeat-per-collect", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--hidden-dim", type=int, default=None)
    parser.add_argument("--max-grad-norm", type=float, default=None)
    parser.add_argument("--no-normalize-advantages", action="store_true")
    parser.add_argument("--plan", default=None, help="JSON file with base config overrides")
    parser.add_argument("--outdir", default="runs")
    parser.add_argument("--jobs", type=int, default=None)


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        seeds = list(range(int(lo), int(hi) + 1))
    else:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    if len(set(seeds)) != len(seeds) or not seeds:
        raise ConfigError(f"seeds must be distinct and non-empty, got {text!r}")
    return seeds


def _base_config(args) -> dict:
    """Flag > plan file > built-in default, per key."""
    base = {}
    if args.plan:
        with open(args.plan) as fh:
            plan = json.load(fh)
        unknown = set(plan) - set(_BASE_KEYS) - {"env", "epsilon"}
        if unknown:
            raise ConfigError(f"unknown plan keys: {sorted(unknown)}")
        base.update({k: v for k, v in plan.items() if k in _BASE_KEYS})
    for key in _BASE_KEYS:
        if key == "normalize_advantages":
            continue
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if args.no_normalize_advantages:
        base["normalize_advantages"] = False
    return base


def _resolve(args, key: str, default):
    value = getattr(args, key if key != "env" else "env", None)
    if value is not None:
        return value
    if args.plan:
        with open(args.plan) as fh:
            plan = json.load(fh)
        if key in plan:
            return plan[key]
    return default


def _check_epsilon_cli(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must be in (0,1), got {epsilon}")


def _check_variant_alpha(variant: str, alpha: float | None) -> float:
    if variant == "ppo":
        if alpha is not None:
            print("warning: alpha is ignored for the flat (ppo) variant", file=sys.stderr)
        return 0.0
    if alpha is None:
        return 0.3
    if alpha < 0 and variant != "ppos":
        raise ConfigError(f"alpha < 0 is only allowed for ppos, got {alpha} for {variant}")
    return alpha


def cmd_train(args) -> int:
    variant = args.variant
    epsilon = _resolve(args, "epsilon", 0.2)
    _check_epsilon_cli(epsilon)
    alpha = _check_variant_alpha(variant, args.alpha)
    env_name = _resolve(args, "env", "reacher2d")
    make_env(env_name)  # validate the name early
    base = _base_config(args)
    cell = Cell(variant, env_name, alpha, epsilon, args.seed)
    os.makedirs(args.outdir, exist_ok=True)
    result = run_cell(base, cell, args.outdir)
    if not result["ok"]:
        diag_path = os.path.join(args.outdir, cell_name(cell) + ".diagnostics.json")
        with open(diag_path, "w") as fh:
            json.dump(result["diagnostics"], fh, indent=2)
        print(f"run aborted: {result['error']} (diagnostics in {diag_path})", file=sys.stderr)
        return 3
    print(f"wrote {os.path.join(args.outdir, cell_name(cell))}/curve.csv and summary.json")
    return 0


def cmd_compare(args) -> int:
    epsilon = _resolve(args, "epsilon", 0.2)
    _check_epsilon_cli(epsilon)
    env_name = _resolve(args, "env", "reacher2d")
    env = make_env(env_name)
    seeds = _parse_seeds(args.seeds)
    variants = [v.strip() for v in args.variants.split(",")]
    for v in variants:
        Variant(v)  # raises on unknown
    cells = []
    for variant in variants:
        if variant == "ppos":
            alpha = args.ppos_alpha if args.ppos_alpha is not None else alpha_for_dimension(env.spec.obs_dim)
        elif variant == "pporb":
            alpha = args.pporb_alpha
        else:
            alpha = 0.0
        cells.extend(Cell(variant, env_name, alpha, epsilon, seed) for seed in seeds)
    os.makedirs(args.outdir, exist_ok=True)
    results = run_grid(cells, _base_config(args), args.outdir, args.jobs)
    failed = [r for r in results if not r["ok"]]
    with open(os.path.join(args.outdir, "table1.json"), "w") as fh:
        json.dump(table1(results, window=args.window), fh, indent=2, sort_keys=True)
        fh.write("\n")
    curves = export_variant_curves(results, args.outdir)
    print(f"{len(results) - len(failed)}/{len(results)} runs completed; "
          f"wrote table1.json and {len(curves)} curve files to {args.outdir}")
    for res in failed:
        print(f"failed cell {cell_name(res['cell'])}: {res['error']}", file=sys.stderr)
    return 1 if failed else 0


def cmd_verify(args) -> int:
    results = run_property_checks(seed=args.seed)
    for chk in results["checks"]:
        status = "PASS" if chk["passed"] else "FAIL"
        detail = f"  ({chk['detail']})" if chk["detail"] else ""
        print(f"[{status}] {chk['name']}{detail}")
    if args.alpha_table:
        dims = [int(d) for d in args.alpha_table.split(",")]
        print("\nobs_dim  suggested_alpha")
        for d in dims:
            print(f"{d:7d}  {alpha_for_dimension(d):.5f}")
    beta_grid = tuple(float(b) for b in args.beta_grid.split(",")) if args.beta_grid else DEFAULT_BETA_GRID
    instances = random_instances(args.instances, seed=args.seed + 2)
    reports = [
        verify_theorem(dataclasses.replace(inst, beta_grid=beta_grid)) for inst in instances
    ]
    fractions = [r.inequality_fraction() for r in reports]
    print(
        f"\nratio-restriction comparison over {len(reports)} bandit instances, "
        f"beta grid {beta_grid}:"
    )
    print(
        f"  premise satisfied on all: {all(r.premise_satisfied for r in reports)}; "
        f"inequality held in {sum(fractions) / len(fractions):.1%} of (beta, sample) cells "
        f"(reported, not asserted)"
    )
    os.makedirs(args.outdir, exist_ok=True)
    report_path = os.path.join(args.outdir, "theorem_report.json")
    with open(report_path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
        fh.write("\n")
    print(f"  full report: {report_path}")
    return 0 if results["all_passed"] else 1


def cmd_alpha_sweep(args) -> int:
    epsilon = _resolve(args, "epsilon", 0.2)
    _check_epsilon_cli(epsilon)
    env_name = _resolve(args, "env", "pointmass-n8")
    make_env(env_name)
    seeds = _parse_seeds(args.seeds)
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else list(DEFAULT_ALPHA_SWEEP)
    if len(set(alphas)) != len(alphas):
        raise ConfigError(f"duplicate alpha values in sweep: {alphas}")
    cells = [Cell("ppos", env_name, alpha, epsilon, seed) for alpha in alphas for seed in seeds]
    os.makedirs(args.outdir, exist_ok=True)
    results = run_grid(cells, _base_config(args), args.outdir, args.jobs)
    failed = [r for r in results if not r["ok"]]
    from .analysis import summarize_runs

    per_alpha = {}
    for alpha in alphas:
        records = [r["record"] for r in results if r["ok"] and r["cell"].alpha == alpha]
        if records:
            per_alpha[alpha] = summarize_runs(records, window=args.window)
    best = max(per_alpha, key=lambda a: per_alpha[a]["mean"]) if per_alpha else None
    sweep = {
        "env": env_name,
        "epsilon": epsilon,
        "per_alpha": {f"{a:g}": s for a, s in per_alpha.items()},
        "best_alpha": best,
    }
    with open(os.path.join(args.outdir, "alpha_sweep.json"), "w") as fh:
        json.dump(sweep, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"alpha sweep on {env_name}: best alpha = {best}")
    for res in failed:
        print(f"failed cell {cell_name(res['cell'])}: {res['error']}", file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pposmooth")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training configuration")
    p_train.add_argument("--variant", choices=["ppo", "pporb", "ppos"], required=True)
    p_train.add_argument("--alpha", type=float, default=None)
    p_train.add_argument("--seed", type=int, default=0)
    _add_train_flags(p_train)
    p_train.set_defaults(func=cmd_train)

    p_cmp = sub.add_parser("compare", help="variant x seed grid with aggregated outputs")
    p_cmp.add_argument("--variants", default="ppo,pporb,ppos")
    p_cmp.add_argument("--seeds", default="1..10")
    p_cmp.add_argument("--ppos-alpha", type=float, default=None,
                       help="default: dimension guide value for the chosen env")
    p_cmp.add_argument("--pporb-alpha", type=float, default=0.3)
    p_cmp.add_argument("--window", type=int, default=50)
    _add_train_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="property suite + ratio-restriction report")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--alpha-table", default=None, help="comma list of observation dims")
    p_ver.add_argument("--beta-grid", default=None, help="comma list of step sizes")
    p_ver.add_argument("--instances", type=int, default=20)
    p_ver.add_argument("--outdir", default="runs")
    p_ver.set_defaults(func=cmd_verify)

    p_sw = sub.add_parser("alpha-sweep", help="smoothed-variant alpha grid on one env")
    p_sw.add_argument("--alphas", default=None, help="comma list; default -0.1,0.05,0.1,0.2,0.3")
    p_sw.add_argument("--seeds", default="1..5")
    p_sw.add_argument("--window", type=int, default=50)
    _add_train_flags(p_sw)
    p_sw.set_defaults(func=cmd_alpha_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
