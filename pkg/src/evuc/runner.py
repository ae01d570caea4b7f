"""Repeated seeded runs, optionally in parallel worker processes.

Per-run random streams are spawned from the master seed with
``numpy.random.SeedSequence(master_seed).spawn(runs)``, so run k sees the
same stream no matter how many workers execute the batch.
"""
from __future__ import annotations

import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cro import CroParams, RunStats, solve
from .dispatch import DispatchResult
from .model import Instance, Solution


@dataclass
class RunRecord:
    index: int
    cost: float
    feasible: bool
    evaluations: int
    wall_time: float
    solution: Solution
    dispatch: DispatchResult
    stats: RunStats


def _run_one(args) -> RunRecord:
    instance, params, seed_seq, index = args
    t0 = time.perf_counter()
    result = solve(instance, params, seed=seed_seq)
    wall = time.perf_counter() - t0
    return RunRecord(
        index=index,
        cost=result.dispatch.total_cost,
        feasible=result.dispatch.feasible,
        evaluations=result.stats.evaluations,
        wall_time=wall,
        solution=result.solution,
        dispatch=result.dispatch,
        stats=result.stats,
    )


def run_many(instance: Instance, params: CroParams | None = None,
             seed: int = 0, runs: int = 1, jobs: int = 1) -> list[RunRecord]:
    """Execute ``runs`` independent optimizations, returning records in run order."""
    params = params or CroParams()
    children = np.random.SeedSequence(seed).spawn(runs)
    work = [(instance, params, children[k], k) for k in range(runs)]
    if jobs <= 1 or runs == 1:
        return [_run_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=min(jobs, runs)) as pool:
        return list(pool.map(_run_one, work, chunksize=1))


def best_record(records: list[RunRecord]) -> RunRecord:
    return min(records, key=lambda r: (r.cost, r.index))


def aggregate(records: list[RunRecord]) -> dict:
    """Summary statistics in the shape of the published comparison tables."""
    costs = [r.cost for r in records]
    return {
        "runs": len(records),
        "best_cost": min(costs),
        "mean_cost": statistics.fmean(costs),
        "std_cost": statistics.pstdev(costs) if len(costs) > 1 else 0.0,
        "worst_cost": max(costs),
        "mean_time_s": statistics.fmean(r.wall_time for r in records),
        "best_run": best_record(records).index,
        "all_feasible": all(r.feasible for r in records),
    }
