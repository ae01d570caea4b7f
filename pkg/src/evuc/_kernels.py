"""Numba kernels for the evaluation hot path.

The solver spends nearly all of its time dispatching 24 intervals per
objective evaluation, so the lambda iteration and the transition cost
accounting are compiled.  Everything here takes plain ndarrays.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _power_at_lambda(lam, u_row, p_min, p_max, b, c):
    total = 0.0
    for i in range(u_row.shape[0]):
        if u_row[i] == 0:
            continue
        if c[i] > 0.0:
            p = (lam - b[i]) / (2.0 * c[i])
            if p < p_min[i]:
                p = p_min[i]
            elif p > p_max[i]:
                p = p_max[i]
        else:
            # constant marginal cost: step from p_min to p_max at lam == b
            p = p_max[i] if lam >= b[i] else p_min[i]
        total += p
    return total


@njit(cache=True)
def dispatch_horizon(u, net, p_min, p_max, a, b, c, tol, max_iter):
    """Lambda-iteration dispatch of every interval.

    Returns (power, fuel, violation): the T x I dispatch, the total fuel
    cost in $/h-intervals, and the summed MW by which net demand falls
    outside the committed [sum p_min, sum p_max] bands (0 when every
    interval is dispatchable).
    """
    T, I = u.shape
    power = np.zeros((T, I))
    violation = 0.0
    fuel = 0.0
    for t in range(T):
        lo = 0.0
        hi = 0.0
        for i in range(I):
            if u[t, i]:
                lo += p_min[i]
                hi += p_max[i]
        d = net[t]
        if d < lo - 1e-12 or d > hi + 1e-12 or hi == 0.0:
            # undispatchable interval: pin to the nearest bound, record MW gap
            if d < lo:
                violation += lo - d
                for i in range(I):
                    if u[t, i]:
                        power[t, i] = p_min[i]
            else:
                violation += d - hi
                for i in range(I):
                    if u[t, i]:
                        power[t, i] = p_max[i]
        else:
            # bracket lambda by the committed marginal costs at the bounds
            lam_lo = np.inf
            lam_hi = -np.inf
            for i in range(I):
                if u[t, i]:
                    m_lo = b[i] + 2.0 * c[i] * p_min[i]
                    m_hi = b[i] + 2.0 * c[i] * p_max[i]
                    if m_lo < lam_lo:
                        lam_lo = m_lo
                    if m_hi > lam_hi:
                        lam_hi = m_hi
            lam = 0.5 * (lam_lo + lam_hi)
            for _ in range(max_iter):
                lam = 0.5 * (lam_lo + lam_hi)
                total = _power_at_lambda(lam, u[t], p_min, p_max, b, c)
                if abs(total - d) <= tol:
                    break
                if total > d:
                    lam_hi = lam
                else:
                    lam_lo = lam
            residual = d
            marginal = np.empty(I)
            for i in range(I):
                marginal[i] = b[i]
                if u[t, i]:
                    if c[i] > 0.0:
                        p = (lam - b[i]) / (2.0 * c[i])
                        if p < p_min[i]:
                            p = p_min[i]
                        elif p > p_max[i]:
                            p = p_max[i]
                    else:
                        p = p_max[i] if lam >= b[i] else p_min[i]
                    power[t, i] = p
                    marginal[i] = b[i] + 2.0 * c[i] * p
                    residual -= p
            # close the residual exactly, adjusting cheapest-marginal units
            # up (or priciest down) so the equal-cost structure is kept
            order = np.argsort(marginal)
            if residual > 0.0:
                for k in range(I):
                    if residual <= 0.0:
                        break
                    i = order[k]
                    if u[t, i]:
                        room = p_max[i] - power[t, i]
                        step = room if room < residual else residual
                        power[t, i] += step
                        residual -= step
            elif residual < 0.0:
                for k in range(I - 1, -1, -1):
                    if residual >= 0.0:
                        break
                    i = order[k]
                    if u[t, i]:
                        room = power[t, i] - p_min[i]
                        step = room if room < -residual else -residual
                        power[t, i] -= step
                        residual += step
        for i in range(I):
            if u[t, i]:
                p = power[t, i]
                fuel += a[i] + b[i] * p + c[i] * p * p
    return power, fuel, violation


@njit(cache=True)
def transition_costs(u, init_state, mdt, tcold, hot, cold, dc):
    """Start-up and shut-down cost of a commitment matrix.

    Offline run lengths are seeded from the signed initial states, so a
    unit entering the horizon offline pays the temperature-correct
    start-up cost on its first commitment.
    """
    T, I = u.shape
    su = 0.0
    sd = 0.0
    for i in range(I):
        prev_on = init_state[i] > 0
        off_run = -init_state[i] if init_state[i] < 0 else 0
        for t in range(T):
            on = u[t, i] != 0
            if on and not prev_on:
                if off_run > mdt[i] + tcold[i]:
                    su += cold[i]
                else:
                    su += hot[i]
            elif prev_on and not on:
                sd += dc[i]
            if on:
                off_run = 0
            else:
                off_run += 1
            prev_on = on
    return su, sd


@njit(cache=True)
def toggle_feasible(u, t, i, net_t, rf, p_min, p_max, init_state, mut, mdt):
    """Whether flipping u[t, i] keeps reserve, min generation and run rules.

    Only interval t and unit i are touched by a toggle, so the reserve and
    minimum-generation checks are local to t and the run-length scan to
    column i (with the flip applied virtually).
    """
    T, I = u.shape
    newval = 0 if u[t, i] else 1
    cap = 0.0
    mn = 0.0
    for k in range(I):
        v = newval if k == i else u[t, k]
        if v:
            cap += p_max[k]
            mn += p_min[k]
    if cap < (1.0 + rf) * net_t:
        return False
    if mn > net_t:
        return False
    prev = 1 if init_state > 0 else 0
    run = init_state if init_state > 0 else -init_state
    for s in range(T):
        raw = newval if s == t else u[s, i]
        cur = 1 if raw != 0 else 0
        if cur != prev:
            if prev == 1:
                if run < mut:
                    return False
            else:
                if run < mdt:
                    return False
            run = 1
        else:
            run += 1
        prev = cur
    return True


@njit(cache=True)
def shift_range(u, ev, t_inc, t_dec, demand, p_min, p_max, rf):
    """Largest EV transfer between the intervals: headroom above minimum
    generation at t_inc against reserve slack at t_dec."""
    I = u.shape[1]
    min_inc = 0.0
    cap_dec = 0.0
    for k in range(I):
        if u[t_inc, k]:
            min_inc += p_min[k]
        if u[t_dec, k]:
            cap_dec += p_max[k]
    inc_room = (demand[t_inc] - ev[t_inc]) - min_inc
    dec_room = (cap_dec + ev[t_dec] - demand[t_dec]
                - rf * (demand[t_dec] - ev[t_dec]))
    return min(inc_room, dec_room)


@njit(cache=True)
def shift_guards_ok(u, new_ev, t_dec, demand, p_max, rf, dt,
                    cons_mwh, cap_mwh, freq, initial_soc, charge_only):
    """Post-shift feasibility: reserve at the decreased interval, battery
    capacity trajectory, charging-frequency cap, charging-only mode."""
    T, I = u.shape
    cap_dec = 0.0
    for k in range(I):
        if u[t_dec, k]:
            cap_dec += p_max[k]
    if cap_dec < (1.0 + rf) * (demand[t_dec] - new_ev[t_dec]):
        return False
    charged = 0.0
    soc = initial_soc
    draw = cons_mwh / T
    for t in range(T):
        e = new_ev[t]
        if charge_only and e > 0.0:
            return False
        if e < 0.0:
            charged -= e * dt
        soc -= e * dt + draw
        if soc < 0.0 or soc > cap_mwh:
            return False
    if charged > cap_mwh * freq:
        return False
    return True


@njit(cache=True)
def updown_ok(col, init_state, mut, mdt):
    """True when a unit's commitment column satisfies min up/down times.

    Runs are credited with the signed initial state; the trailing run is
    exempt because no transition ends it inside the horizon.
    """
    T = col.shape[0]
    prev = 1 if init_state > 0 else 0
    run = init_state if init_state > 0 else -init_state
    for t in range(T):
        cur = 1 if col[t] != 0 else 0
        if cur != prev:
            if prev == 1:
                if run < mut:
                    return False
            else:
                if run < mdt:
                    return False
            run = 1
        else:
            run += 1
        prev = cur
    return True
