"""Schedule tables: construction, CSV round trip and console rendering.

A schedule row holds one interval: per-unit MW, EV power (positive =
discharging to the grid), system load and the reserve margin as a percent
of net demand.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dispatch import DispatchResult
from .model import Instance, Solution


@dataclass
class Schedule:
    """Dispatch table for one solved instance."""

    power: np.ndarray
    ev_power: np.ndarray
    load: np.ndarray

    @property
    def horizon(self) -> int:
        return self.power.shape[0]

    @property
    def n_units(self) -> int:
        return self.power.shape[1]

    def commitment(self) -> np.ndarray:
        """Commitment inferred from dispatch; committed units run above 0 MW."""
        return (self.power > 1e-6).astype(np.uint8)

    def solution(self) -> Solution:
        return Solution(self.commitment(), self.ev_power.copy())


def build_schedule(instance: Instance, solution: Solution,
                   dispatch: DispatchResult) -> Schedule:
    return Schedule(
        power=dispatch.power.copy(),
        ev_power=solution.ev_power.copy(),
        load=instance.demand_array.copy(),
    )


def reserve_percent(instance: Instance, schedule: Schedule) -> np.ndarray:
    """Reserve margin as percent of net demand, from the committed capacity."""
    cap = schedule.commitment() @ instance.arrays.p_max
    net = schedule.load - schedule.ev_power
    return 100.0 * (cap - net) / net


def write_csv(instance: Instance, schedule: Schedule, path) -> None:
    """Write the schedule with full precision so it validates strictly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_header(schedule.n_units))
    reserve = reserve_percent(instance, schedule)
    for t in range(schedule.horizon):
        row = [str(t + 1)]
        row += [f"{p:.6f}" for p in schedule.power[t]]
        row += [f"{schedule.ev_power[t]:.6f}", f"{schedule.load[t]:.6f}",
                f"{reserve[t]:.2f}"]
        writer.writerow(row)
    Path(path).write_text(out.getvalue())


def _header(n_units: int) -> list[str]:
    return (["hour"] + [f"unit{i + 1}" for i in range(n_units)]
            + ["v2g_mw", "load_mw", "reserve_pct"])


def read_csv(path) -> Schedule:
    """Read a schedule table, accepting both solver output and transcribed
    2-decimal tables."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty schedule file")
    header = [h.strip() for h in rows[0]]
    unit_cols = [k for k, name in enumerate(header) if name.startswith("unit")]
    try:
        ev_col = header.index("v2g_mw")
        load_col = header.index("load_mw")
    except ValueError as e:
        raise ValueError(f"{path}: missing v2g_mw/load_mw column") from e
    if not unit_cols:
        raise ValueError(f"{path}: no unit columns found")
    body = [r for r in rows[1:] if r]
    power = np.array([[float(r[k]) for k in unit_cols] for r in body])
    ev = np.array([float(r[ev_col]) for r in body])
    load = np.array([float(r[load_col]) for r in body])
    return Schedule(power=power, ev_power=ev, load=load)


def format_table(instance: Instance, schedule: Schedule) -> str:
    """Fixed-width console rendering in the published table layout."""
    reserve = reserve_percent(instance, schedule)
    n = schedule.n_units
    head = ["hour"] + [f"u{i + 1}" for i in range(n)] + ["V2G", "load", "reserve"]
    widths = [4] + [8] * n + [9, 7, 8]
    lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    for t in range(schedule.horizon):
        cells = [str(t + 1)]
        cells += [f"{p:.2f}" for p in schedule.power[t]]
        cells += [f"{schedule.ev_power[t]:.2f}", f"{schedule.load[t]:.0f}",
                  f"{reserve[t]:.2f}%"]
        lines.append("  ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines)
