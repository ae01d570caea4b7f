"""Constraint checking, initial solution generation and repair.

Covers the full constraint set: generation bounds and power balance (via
dispatch), must-run/off, spinning reserve, minimum up/down times, ramps,
aggregate battery capacity, charging-frequency cap, battery energy balance
and the charging-only restriction of load-leveling mode.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import updown_ok
from .dispatch import evaluate
from .model import Instance, Mode, Solution


class GenerationError(RuntimeError):
    """Initial solution generation could not satisfy the constraints."""


@dataclass(frozen=True)
class Tolerances:
    """Numeric slack for the checks.

    ``balance`` bounds equality residuals (power balance in MW, battery
    balance in MWh); ``slack`` bounds inequality violations.  The strict
    defaults suit solver output; schedules transcribed from 2-decimal
    tables need roughly 0.05.
    """

    balance: float = 1e-3
    slack: float = 1e-6


@dataclass(frozen=True)
class Violation:
    constraint: str
    t: int | None
    unit: int | None
    magnitude: float


@dataclass
class ConstraintReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations

    def by_constraint(self, name: str) -> list[Violation]:
        return [v for v in self.violations if v.constraint == name]


@dataclass
class SoCTrajectory:
    """Aggregate fleet state of charge, MWh, length T+1 (index 0 = start)."""

    soc: np.ndarray
    initial_soc: float


def even_charge_mw(instance: Instance) -> float:
    """Charging power that spreads the fleet's daily consumption evenly."""
    return instance.fleet.total_consumption_mwh / (
        instance.horizon * instance.interval_hours)


def reserve_slack(instance: Instance, commitment: np.ndarray,
                  ev_power: np.ndarray) -> np.ndarray:
    """Per-interval spinning reserve slack in MW (negative = violated).

    Reserve is a fraction of net demand, so slack(t) equals committed
    capacity minus (1 + reserve_fraction) * (demand - ev).
    """
    arr = instance.arrays
    cap = commitment @ arr.p_max
    net = instance.demand_array - ev_power
    return cap - (1.0 + instance.reserve_fraction) * net


def soc_trajectory(instance: Instance, ev_power: np.ndarray,
                   initial_soc: float | None = None) -> SoCTrajectory:
    """Aggregate battery trajectory under a schedule.

    Discharge (positive ev_power) drains the fleet, charging refills it,
    and the fleet's own consumption is drawn evenly across intervals.
    """
    fleet = instance.fleet
    if initial_soc is None:
        initial_soc = fleet.total_consumption_mwh
    per_interval_draw = fleet.total_consumption_mwh / instance.horizon
    soc = np.empty(instance.horizon + 1)
    soc[0] = initial_soc
    soc[1:] = initial_soc - np.cumsum(
        ev_power * instance.interval_hours + per_interval_draw)
    return SoCTrajectory(soc=soc, initial_soc=initial_soc)


def _updown_violations(col, init_state, mut, mdt):
    """Transition-rule scan; trailing runs are exempt."""
    out = []
    prev = 1 if init_state > 0 else 0
    run = abs(init_state)
    for t, cur in enumerate(col):
        cur = int(cur)
        if cur != prev:
            if prev == 1 and run < mut:
                out.append(("min_up", t, float(mut - run)))
            elif prev == 0 and run < mdt:
                out.append(("min_down", t, float(mdt - run)))
            run = 1
        else:
            run += 1
        prev = cur
    return out


def check_all(instance: Instance, solution: Solution,
              powers: np.ndarray | None = None,
              initial_soc: float | None = None,
              tol: Tolerances = Tolerances()) -> ConstraintReport:
    """Evaluate every constraint and report the violations found.

    When ``powers`` is given (an explicit T x I dispatch, e.g. read from a
    schedule file) generation bounds and power balance are checked against
    it; otherwise the solution is dispatched internally.
    """
    T, I = instance.horizon, instance.n_units
    u = solution.commitment
    ev = solution.ev_power
    if u.shape != (T, I) or ev.shape != (T,):
        raise ValueError("solution dimensions do not match the instance")
    arr = instance.arrays
    demand = instance.demand_array
    dt = instance.interval_hours
    report = ConstraintReport()
    add = report.violations.append

    # must-run / must-off
    for t, i in zip(*np.nonzero(arr.must_run_mask & (u == 0))):
        add(Violation("must_run", int(t), int(i), 1.0))
    for t, i in zip(*np.nonzero(arr.must_off_mask & (u == 1))):
        add(Violation("must_off", int(t), int(i), 1.0))

    # minimum up/down times
    for i in range(I):
        for name, t, mag in _updown_violations(
                u[:, i], arr.init_state[i], arr.mut[i], arr.mdt[i]):
            add(Violation(name, t, i, mag))

    # spinning reserve
    slack = reserve_slack(instance, u, ev)
    for t in np.nonzero(slack < -tol.slack)[0]:
        add(Violation("spinning_reserve", int(t), None, float(-slack[t])))

    # generation bounds and power balance
    if powers is not None:
        if powers.shape != (T, I):
            raise ValueError("powers shape does not match the instance")
        committed = u == 1
        low = committed & (powers < arr.p_min - tol.slack)
        high = committed & (powers > arr.p_max + tol.slack)
        ghost = ~committed & (np.abs(powers) > tol.slack)
        for t, i in zip(*np.nonzero(low)):
            add(Violation("gen_bounds", int(t), int(i),
                          float(arr.p_min[i] - powers[t, i])))
        for t, i in zip(*np.nonzero(high)):
            add(Violation("gen_bounds", int(t), int(i),
                          float(powers[t, i] - arr.p_max[i])))
        for t, i in zip(*np.nonzero(ghost)):
            add(Violation("gen_bounds", int(t), int(i), float(abs(powers[t, i]))))
        balance = powers.sum(axis=1) + ev - demand
        power_matrix = powers
    else:
        net = demand - ev
        below = u @ arr.p_min - net
        above = net - u @ arr.p_max
        for t in np.nonzero(below > tol.slack)[0]:
            add(Violation("gen_bounds", int(t), None, float(below[t])))
        for t in np.nonzero(above > tol.slack)[0]:
            add(Violation("gen_bounds", int(t), None, float(above[t])))
        result = evaluate(instance, solution)
        balance = result.power.sum(axis=1) + ev - demand
        power_matrix = result.power
    for t in np.nonzero(np.abs(balance) > tol.balance)[0]:
        add(Violation("power_balance", int(t), None, float(abs(balance[t]))))

    # ramp rate limits, only where limits exist and successive powers are known
    finite_up = np.isfinite(arr.up_ramp)
    finite_down = np.isfinite(arr.down_ramp)
    if finite_up.any() or finite_down.any():
        delta = np.diff(power_matrix, axis=0)
        for t, i in zip(*np.nonzero(delta > arr.up_ramp + tol.slack)):
            add(Violation("ramp_up", int(t) + 1, int(i),
                          float(delta[t, i] - arr.up_ramp[i])))
        for t, i in zip(*np.nonzero(-delta > arr.down_ramp + tol.slack)):
            add(Violation("ramp_down", int(t) + 1, int(i),
                          float(-delta[t, i] - arr.down_ramp[i])))

    # battery capacity (state of charge within [0, fleet capacity])
    cap_mwh = instance.fleet.total_capacity_mwh
    traj = soc_trajectory(instance, ev, initial_soc)
    for t in np.nonzero(traj.soc < -tol.slack)[0]:
        add(Violation("soc", int(t), None, float(-traj.soc[t])))
    for t in np.nonzero(traj.soc > cap_mwh + tol.slack)[0]:
        add(Violation("soc", int(t), None, float(traj.soc[t] - cap_mwh)))

    # charging-frequency cap on the total energy charged
    charged = float(np.clip(-ev, 0.0, None).sum() * dt)
    cap_charge = cap_mwh * instance.fleet.charge_frequency
    if charged > cap_charge + tol.slack:
        add(Violation("charge_frequency", None, None, charged - cap_charge))

    # battery energy balance over the full period
    residual = float(ev.sum() * dt + instance.fleet.total_consumption_mwh)
    if abs(residual) > tol.balance:
        add(Violation("battery_balance", None, None, abs(residual)))

    # charging-only restriction
    if instance.mode is Mode.LOAD_LEVELING:
        for t in np.nonzero(ev > tol.slack)[0]:
            add(Violation("charge_only", int(t), None, float(ev[t])))

    return report


# ---------------------------------------------------------------------------
# Initial solution generation

#: Candidate-list width for the randomized priority commitment.
_GRASP_WIDTH = 3


def capped_charge_estimate(instance: Instance) -> np.ndarray:
    """Per-interval charging estimate (MW, positive) used before the EV
    vector exists.

    The even spread of the fleet's consumption, capped at what the whole
    system could support with every unit committed; without the cap peak
    intervals would demand more capacity than exists.
    """
    rf = instance.reserve_fraction
    total_pmax = float(instance.arrays.p_max.sum())
    room = total_pmax / (1.0 + rf) - instance.demand_array
    return np.minimum(even_charge_mw(instance), np.clip(room, 0.0, None))


def _force_musts(instance: Instance, u: np.ndarray) -> bool:
    arr = instance.arrays
    changed = False
    on = arr.must_run_mask & (u == 0)
    off = arr.must_off_mask & (u == 1)
    if on.any():
        u[on] = 1
        changed = True
    if off.any():
        u[off] = 0
        changed = True
    return changed


def _commit_for_reserve(instance: Instance, u: np.ndarray, rng) -> bool:
    """Commit units, cheapest average full-load cost first, until every
    interval's committed capacity covers estimated net demand plus reserve.

    Randomized: each pick draws from the few cheapest still-uncommitted
    units, so repeated calls yield a diverse population.  A pick is
    committed for a block of its minimum up time, which keeps columns
    from fragmenting into runs the up/down repair would have to mend.
    """
    arr = instance.arrays
    T = instance.horizon
    rf = instance.reserve_fraction
    requirement = (1.0 + rf) * (instance.demand_array + capped_charge_estimate(instance))
    changed = False
    for t in range(T):
        cap = float(u[t] @ arr.p_max)
        while cap < requirement[t] - 1e-9:
            candidates = [i for i in arr.priority
                          if u[t, i] == 0 and not arr.must_off_mask[t, i]]
            if not candidates:
                break
            pick = candidates[rng.integers(min(_GRASP_WIDTH, len(candidates)))]
            for s in range(t, min(t + arr.mut[pick], T)):
                if not arr.must_off_mask[s, pick]:
                    u[s, pick] = 1
            cap += arr.p_max[pick]
            changed = True
    return changed


def _first_short_run(col, init_state, mut, mdt):
    """First interior run shorter than its minimum; returns
    (start, end, value, deficit) in column coordinates or None."""
    T = col.shape[0]
    prev = 1 if init_state > 0 else 0
    run = abs(int(init_state))
    run_start = -run
    for t in range(T):
        cur = int(col[t])
        if cur != prev:
            need = mut if prev == 1 else mdt
            if run < need:
                return max(run_start, 0), t, prev, int(need - run)
            run = 1
            run_start = t
        else:
            run += 1
        prev = cur
    return None


def _repair_updown(instance: Instance, u: np.ndarray, rng) -> bool:
    """Extend too-short on/off runs until the up/down-time rule holds.

    A short run grows by flipping adjacent cells into it, choosing the
    left or right flank at random; runs pinned against the horizon start
    (including the fixed pre-horizon state) can only grow rightward.
    """
    arr = instance.arrays
    T = instance.horizon
    changed = False
    for i in range(instance.n_units):
        col = u[:, i]
        guard = 0
        while guard < 4 * T:
            guard += 1
            hit = _first_short_run(col, arr.init_state[i], arr.mut[i], arr.mdt[i])
            if hit is None:
                break
            start, end, value, deficit = hit
            for _ in range(deficit):
                can_left = start > 0
                can_right = end < T
                if can_left and (not can_right or rng.random() < 0.5):
                    start -= 1
                    col[start] = value
                elif can_right:
                    col[end] = value
                    end += 1
                else:
                    break
                changed = True
    return changed


def _uc_clean(instance: Instance, u: np.ndarray) -> bool:
    arr = instance.arrays
    if (arr.must_run_mask & (u == 0)).any() or (arr.must_off_mask & (u == 1)).any():
        return False
    rf = instance.reserve_fraction
    requirement = (1.0 + rf) * (instance.demand_array + capped_charge_estimate(instance))
    if ((u @ arr.p_max) < requirement - 1e-9).any():
        return False
    return all(
        updown_ok(u[:, i], arr.init_state[i], arr.mut[i], arr.mdt[i])
        for i in range(instance.n_units))


def repair_pass(instance: Instance, u: np.ndarray, rng) -> bool:
    """One forced-state / reserve-commitment / up-down repair sweep, in place.

    Returns True when the matrix was modified.  Idempotent on matrices
    that already satisfy the three constraint groups.
    """
    changed = _force_musts(instance, u)
    changed |= _commit_for_reserve(instance, u, rng)
    changed |= _repair_updown(instance, u, rng)
    return changed


def initial_uc(instance: Instance, rng, max_restarts: int = 100,
               max_passes: int = 10) -> np.ndarray:
    """Generate a commitment matrix satisfying must states, reserve and
    up/down times.

    Repair passes recurse because the up/down repair can re-break the
    reserve requirement; after ``max_passes`` sweeps the candidate is
    discarded and generation restarts with fresh randomness.
    """
    T, I = instance.horizon, instance.n_units
    for _ in range(max_restarts):
        u = np.zeros((T, I), dtype=np.uint8)
        for _ in range(max_passes):
            repair_pass(instance, u, rng)
            if _uc_clean(instance, u):
                return u
    raise GenerationError(
        f"no feasible commitment found in {max_restarts} restarts; "
        "the instance looks over-constrained")


def initial_ev(instance: Instance, commitment: np.ndarray,
               max_rounds: int = 200) -> np.ndarray:
    """Initial EV vector: the fleet's consumption charged evenly, with
    charge pushed off intervals whose committed capacity cannot carry it.

    Excess charge at a violating interval is removed and re-dispatched
    evenly across the intervals whose reserve slack can absorb it,
    re-evaluating eligibility every round.
    """
    T = instance.horizon
    dt = instance.interval_hours
    rf = instance.reserve_fraction
    fleet = instance.fleet
    demand = instance.demand_array
    cap = commitment @ instance.arrays.p_max
    ev = np.full(T, -fleet.total_consumption_mwh / (T * dt))
    if fleet.total_consumption_mwh == 0.0:
        return np.zeros(T)
    for _ in range(max_rounds):
        slack = cap - (1.0 + rf) * (demand - ev)
        violating = np.nonzero(slack < -1e-9)[0]
        if violating.size == 0:
            return ev
        pool = 0.0
        for t in violating:
            excess = (1.0 + rf) * (demand[t] - ev[t]) - cap[t]
            removal = min(excess, -ev[t])
            ev[t] += removal
            pool += removal
            if cap[t] < (1.0 + rf) * (demand[t] - ev[t]) - 1e-9:
                raise GenerationError(
                    f"interval {t}: committed capacity {cap[t]:.2f} MW is below "
                    f"demand plus reserve even with no EV charging")
        # place the pool back, even shares over the intervals that can absorb them
        while pool > 1e-12:
            slack = cap - (1.0 + rf) * (demand - ev)
            headroom = np.where(slack > 0.0, slack / (1.0 + rf), 0.0)
            eligible = np.nonzero(headroom > 1e-12)[0]
            if eligible.size == 0:
                raise GenerationError(
                    "committed capacity cannot absorb the fleet's charging demand")
            share = min(pool / eligible.size, float(headroom[eligible].min()))
            ev[eligible] -= share
            pool -= share * eligible.size
    raise GenerationError("EV redistribution did not settle")
