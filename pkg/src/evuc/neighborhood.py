"""Single-solution perturbation used by every elementary reaction.

Phase 1 toggles one commitment bit and keeps the move only if reserve,
up/down times and dispatchability survive.  When the toggle is reverted,
phase 2 transfers a Gaussian amount of EV power between two intervals,
which preserves the battery energy balance exactly.
"""
from __future__ import annotations

from . import _kernels
from .model import Instance, Mode, Solution

#: Bounded-Gaussian redraw attempts before falling back to a zero shift.
MAX_REDRAWS = 100


def ev_shift_range(instance: Instance, solution: Solution,
                   t_inc: int, t_dec: int) -> float:
    """Largest EV transfer allowed between the two intervals.

    Bounded by the headroom above minimum generation at the increase
    interval and by the spinning-reserve slack at the decrease interval.
    """
    arr = instance.arrays
    return float(_kernels.shift_range(
        solution.commitment, solution.ev_power, t_inc, t_dec,
        instance.demand_array, arr.p_min, arr.p_max,
        instance.reserve_fraction))


def _draw_scaled(rng) -> float:
    """Standard normal bounded to [-3, 3]; |z| <= 3 is exactly |v| <= r
    once scaled by r/3."""
    for _ in range(MAX_REDRAWS):
        z = rng.normal()
        if abs(z) <= 3.0:
            return z
    return 0.0


def perturb(instance: Instance, solution: Solution, rng,
            initial_soc: float | None = None) -> Solution:
    """Return a feasible neighbor, or the input solution unchanged.

    Feasible inputs map to feasible outputs; a rejected modification in
    both phases leaves the solution untouched (and still costs the caller
    one objective evaluation).
    """
    arr = instance.arrays
    u = solution.commitment
    ev = solution.ev_power
    demand = instance.demand_array
    rf = instance.reserve_fraction

    # phase 1: toggle one free commitment bit
    n_free = arr.free_t.shape[0]
    if n_free:
        k = int(rng.integers(n_free))
        t, i = arr.free_t[k], arr.free_i[k]
        if _kernels.toggle_feasible(u, t, i, demand[t] - ev[t], rf,
                                    arr.p_min, arr.p_max, arr.init_state[i],
                                    arr.mut[i], arr.mdt[i]):
            new_u = u.copy()
            new_u[t, i] ^= 1
            return Solution(new_u, ev)

    # phase 2: move EV power between two intervals
    T = instance.horizon
    if T < 2:
        return solution
    t_inc = int(rng.integers(T))
    t_dec = int(rng.integers(T - 1))
    if t_dec >= t_inc:
        t_dec += 1
    r = float(_kernels.shift_range(u, ev, t_inc, t_dec, demand,
                                   arr.p_min, arr.p_max, rf))
    if r <= 0.0:
        return solution
    mag = abs(_draw_scaled(rng)) * (r / 3.0)
    if mag == 0.0:
        return solution
    new_ev = ev.copy()
    new_ev[t_inc] += mag
    new_ev[t_dec] -= mag
    fleet = instance.fleet
    start = fleet.total_consumption_mwh if initial_soc is None else initial_soc
    # lowering EV output at t_dec raises net demand and with it the
    # required reserve, so the slack there is rechecked after the move
    if _kernels.shift_guards_ok(
            u, new_ev, t_dec, demand, arr.p_max, rf, instance.interval_hours,
            fleet.total_consumption_mwh, fleet.total_capacity_mwh,
            fleet.charge_frequency, start,
            instance.mode is Mode.LOAD_LEVELING):
        return Solution(u, new_ev)
    return solution
