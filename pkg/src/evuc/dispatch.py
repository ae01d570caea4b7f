"""Economic dispatch and objective evaluation.

Dispatch allocates each interval's net demand (load minus EV discharge)
across the committed units by lambda iteration, then the objective adds
start-up and shut-down costs over the commitment transitions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import dispatch_horizon, transition_costs
from .model import Instance, Solution, ThermalUnit

#: Bisection stops once generation matches net demand this closely (MW).
BALANCE_TOL = 1e-4
MAX_LAMBDA_ITER = 200

#: $ charged per MW of undispatchable demand, keeps infeasible candidates ordered.
INFEASIBILITY_PENALTY = 1e6


@dataclass
class DispatchResult:
    """Dispatch and cost breakdown of one evaluated solution."""

    power: np.ndarray
    fuel_cost: float
    startup_cost: float
    shutdown_cost: float
    total_cost: float
    feasible: bool
    violation_mw: float = 0.0


def fuel_cost(unit: ThermalUnit, p: float) -> float:
    """Quadratic fuel cost in $/h at output p MW."""
    return unit.a + unit.b * p + unit.c * p * p


def economic_dispatch(instance: Instance, committed, net_demand: float):
    """Minimum-fuel-cost outputs for one interval, or None when infeasible.

    ``committed`` is an iterable of unit indices.  The returned array has
    one entry per unit in the instance; uncommitted units hold 0.
    """
    arr = instance.arrays
    u = np.zeros((1, instance.n_units), dtype=np.uint8)
    for i in committed:
        u[0, i] = 1
    if not u.any():
        return None
    lo = float(arr.p_min[u[0] == 1].sum())
    hi = float(arr.p_max[u[0] == 1].sum())
    if net_demand < lo - 1e-9 or net_demand > hi + 1e-9:
        return None
    power, _, _ = dispatch_horizon(
        u, np.array([float(net_demand)]), arr.p_min, arr.p_max,
        arr.a, arr.b, arr.c, BALANCE_TOL, MAX_LAMBDA_ITER)
    return power[0]


def evaluate(instance: Instance, solution: Solution,
             penalty_per_mw: float = INFEASIBILITY_PENALTY) -> DispatchResult:
    """Dispatch every interval and price the full schedule.

    Start-up cost is charged at each 0->1 transition using the contiguous
    offline hours before it (seeded by the unit's initial state), shut-down
    cost at each 1->0 transition.  Intervals whose net demand cannot be
    dispatched mark the result infeasible and add a per-MW penalty so the
    search can still rank such candidates.
    """
    u = solution.commitment
    if u.shape != (instance.horizon, instance.n_units):
        raise ValueError(
            f"commitment shape {u.shape} does not match instance "
            f"({instance.horizon}, {instance.n_units})")
    if solution.ev_power.shape != (instance.horizon,):
        raise ValueError("ev_power length does not match the horizon")
    arr = instance.arrays
    net = instance.demand_array - solution.ev_power
    u8 = u if u.dtype == np.uint8 else u.astype(np.uint8)
    power, fuel, violation = dispatch_horizon(
        u8, net, arr.p_min, arr.p_max, arr.a, arr.b, arr.c,
        BALANCE_TOL, MAX_LAMBDA_ITER)
    su, sd = transition_costs(
        u8, arr.init_state, arr.mdt, arr.tcold, arr.hot, arr.cold, arr.dc)
    fuel_total = fuel * instance.interval_hours
    total = fuel_total + su + sd + penalty_per_mw * violation
    return DispatchResult(
        power=power,
        fuel_cost=fuel_total,
        startup_cost=su,
        shutdown_cost=sd,
        total_cost=total,
        feasible=violation == 0.0,
        violation_mw=violation,
    )
