"""Run reports: JSON summaries and the figures rendered next to them.

Every report path gets the machine-readable aggregate plus matplotlib
renderings of the convergence traces and the best dispatch profile.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .cro import CroParams
from .model import Instance
from .runner import RunRecord, aggregate, best_record
from .schedule import Schedule, reserve_percent


def report_payload(instance: Instance, params: CroParams, seed: int,
                   records: list[RunRecord], mode: str) -> dict:
    best = best_record(records)
    return {
        "instance": {
            "units": instance.n_units,
            "horizon": instance.horizon,
            "mode": mode,
            "ev_count": instance.fleet.count,
        },
        "params": dataclasses.asdict(params),
        "master_seed": seed,
        "aggregate": aggregate(records),
        "runs": [
            {
                "run": r.index,
                "cost": r.cost,
                "feasible": r.feasible,
                "evaluations": r.evaluations,
                "wall_time_s": r.wall_time,
            }
            for r in records
        ],
        "best_run_trace": [[e, c] for e, c in best.stats.best_trace],
    }


def write_report(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def convergence_figure(records: list[RunRecord], path) -> None:
    """Best-cost-so-far traces of every run, best run highlighted."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    best = best_record(records)
    for r in records:
        if not r.stats.best_trace:
            continue
        evals, costs = zip(*r.stats.best_trace)
        if r is best:
            ax.plot(evals, costs, color="tab:red", lw=1.8, zorder=3,
                    label=f"best run (#{r.index}, ${r.cost:,.2f})")
        else:
            ax.plot(evals, costs, color="0.65", lw=0.6, zorder=2)
    ax.set_xlabel("objective evaluations")
    ax.set_ylabel("best running cost ($)")
    ax.set_title(f"Convergence over {len(records)} runs")
    ax.legend(loc="upper right")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def schedule_figure(instance: Instance, schedule: Schedule, path) -> None:
    """Stacked unit dispatch with the load line and EV exchange bars."""
    hours = np.arange(1, schedule.horizon + 1)
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(8, 6), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]})
    bottom = np.zeros(schedule.horizon)
    cmap = plt.get_cmap("tab20")
    for i in range(schedule.n_units):
        p = schedule.power[:, i]
        ax.bar(hours, p, bottom=bottom, width=0.8,
               color=cmap(i % 20), label=f"unit {i + 1}")
        bottom += p
    ax.plot(hours, schedule.load, "k-", lw=1.6, label="load")
    ax.plot(hours, schedule.load - schedule.ev_power, "k--", lw=1.1,
            label="net demand")
    ax.set_ylabel("MW")
    ax.set_title("Dispatch")
    ncol = 2 if schedule.n_units <= 20 else 4
    ax.legend(fontsize=6, ncol=ncol, loc="upper left")
    colors = np.where(schedule.ev_power >= 0, "tab:green", "tab:orange")
    ax2.bar(hours, schedule.ev_power, width=0.8, color=colors)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_ylabel("EV MW")
    ax2.set_xlabel("hour")
    reserve = reserve_percent(instance, schedule)
    ax2.set_title(f"EV exchange (+discharge/-charge), min reserve "
                  f"{reserve.min():.2f}%", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def comparison_figure(results: dict[str, dict], path) -> None:
    """Best/mean cost bars for the two EV scheduling models."""
    modes = list(results)
    x = np.arange(len(modes))
    best = [results[m]["best_cost"] for m in modes]
    mean = [results[m]["mean_cost"] for m in modes]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(x - 0.18, best, width=0.36, label="best")
    ax.bar(x + 0.18, mean, width=0.36, label="mean")
    ax.set_xticks(x, modes)
    ax.set_ylabel("running cost ($)")
    lo = min(best)
    hi = max(mean)
    pad = max((hi - lo) * 0.5, 1.0)
    ax.set_ylim(lo - pad, hi + pad)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    for xi, b in zip(x, best):
        ax.annotate(f"${b:,.0f}", (xi - 0.18, b), ha="center",
                    va="bottom", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
