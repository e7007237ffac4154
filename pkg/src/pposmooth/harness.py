"""Multi-run orchestration: variant x seed grids, per-cell artifacts, and
aggregated tables/curves.

Runs are independent single-threaded tasks; the grid fans them out over a
process pool and aggregates RunRecords afterward.  Every output file is a
pure function of (plan, seeds).
"""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import summarize_runs
from .clip import ClipSpec, Variant
from .trainer import RunRecord, TrainConfig, TrainingAborted, train

__all__ = ["Cell", "cell_name", "build_config", "run_cell", "run_grid", "table1", "export_variant_curves"]

BEST_WINDOW = 50


@dataclass(frozen=True)
class Cell:
    variant: str
    env_name: str
    alpha: float
    epsilon: float
    seed: int


def cell_name(cell: Cell) -> str:
    alpha = f"{cell.alpha:g}".replace("-", "m")
    return f"{cell.variant}_{cell.env_name}_a{alpha}_e{cell.epsilon:g}_s{cell.seed}"


def build_config(base: dict, cell: Cell) -> TrainConfig:
    cfg = dict(base)
    cfg.pop("clip", None)
    return TrainConfig(
        clip=ClipSpec(Variant(cell.variant), cell.epsilon, cell.alpha),
        env_name=cell.env_name,
        seed=cell.seed,
        **cfg,
    )


def run_cell(base: dict, cell: Cell, outdir: str | None) -> dict:
    """Train one cell; write curve.csv/summary.json when outdir is given."""
    config = build_config(base, cell)
    try:
        _, _, record = train(config)
    except TrainingAborted as exc:
        return {"cell": cell, "ok": False, "error": str(exc), "diagnostics": exc.diagnostics}
    if outdir is not None:
        cell_dir = os.path.join(outdir, cell_name(cell))
        os.makedirs(cell_dir, exist_ok=True)
        record.to_csv(os.path.join(cell_dir, "curve.csv"))
        with open(os.path.join(cell_dir, "summary.json"), "w") as fh:
            json.dump(record.summary_json(config), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return {"cell": cell, "ok": True, "record": record}


def _run_cell_star(args):
    return run_cell(*args)


def run_grid(cells: list[Cell], base: dict, outdir: str | None, jobs: int | None = None) -> list[dict]:
    jobs = jobs or os.cpu_count() or 1
    work = [(base, cell, outdir) for cell in cells]
    if jobs == 1 or len(cells) == 1:
        return [_run_cell_star(w) for w in work]
    with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        return list(pool.map(_run_cell_star, work))


def table1(results: list[dict], window: int = BEST_WINDOW) -> dict:
    """Best-window mean +- std per (variant, env), one row per (variant, env)."""
    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for res in results:
        if not res["ok"]:
            continue
        key = (res["cell"].variant, res["cell"].env_name)
        grouped.setdefault(key, []).append(res["record"])
    table: dict = {"window": window, "entries": []}
    for (variant, env), records in sorted(grouped.items()):
        summary = summarize_runs(records, window)
        table["entries"].append(
            {
                "env": env,
                "variant": variant,
                "mean": summary["mean"],
                "std": summary["std"],
                "seeds": summary["runs"],
            }
        )
    return table


def export_variant_curves(results: list[dict], outdir: str) -> list[str]:
    """Per-variant mean/std/p20/p80 curves for reward and entropy."""
    grouped: dict[str, list[RunRecord]] = {}
    for res in results:
        if res["ok"]:
            grouped.setdefault(res["cell"].variant, []).append(res["record"])
    written = []
    for variant, records in sorted(grouped.items()):
        for metric in ("mean_reward", "entropy"):
            rows = np.array([getattr(r, metric) for r in records])
            path = os.path.join(
                outdir, f"curves_{'reward' if metric == 'mean_reward' else 'entropy'}_{variant}.csv"
            )
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["epoch", "mean", "std", "p20", "p80"])
                for epoch in range(rows.shape[1]):
                    col = rows[:, epoch]
                    writer.writerow(
                        [
                            epoch,
                            float(np.mean(col)),
                            float(np.std(col)),
                            float(np.percentile(col, 20)),
                            float(np.percentile(col, 80)),
                        ]
                    )
            written.append(path)
    return written
