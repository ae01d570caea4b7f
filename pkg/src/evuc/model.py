"""Problem data for joint EV / unit-commitment scheduling.

Defines the thermal unit, EV fleet and instance records, the built-in
10/20/40-unit benchmark systems, start-up cost evaluation and the JSON
instance file format.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from pathlib import Path

import numpy as np


class InstanceError(ValueError):
    """Base class for instance file / construction problems."""


class ParseError(InstanceError):
    """Instance file does not match the expected schema."""


class ValidationError(InstanceError):
    """Instance data violates a model invariant."""


class Mode(str, Enum):
    """EV scheduling model: bidirectional V2G or charging-only load leveling."""

    V2G = "v2g"
    LOAD_LEVELING = "load-leveling"


@dataclass(frozen=True)
class ThermalUnit:
    """One generator: capacity, quadratic fuel cost and timing parameters.

    Powers in MW, costs in $, times in scheduling intervals (hours for the
    benchmark).  ``initial_state`` is signed: +h means already online for h
    hours before the horizon, -h already offline for h hours.
    """

    p_max: float
    p_min: float
    a: float
    b: float
    c: float
    start_cost_hot: float = 0.0
    start_cost_cold: float = 0.0
    cold_start_hours: int = 0
    shutdown_cost: float = 0.0
    min_up: int = 1
    min_down: int = 1
    initial_state: int = -1
    up_ramp: float | None = None
    down_ramp: float | None = None
    must_run: frozenset[int] = field(default_factory=frozenset)
    must_off: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0 < self.p_min <= self.p_max:
            raise ValidationError(
                f"unit bounds must satisfy 0 < p_min <= p_max, got "
                f"[{self.p_min}, {self.p_max}]")
        if self.a < 0 or self.c < 0:
            raise ValidationError("fuel coefficients a and c must be >= 0")
        if self.start_cost_hot < 0 or self.start_cost_cold < 0:
            raise ValidationError("start-up costs must be >= 0")
        if self.cold_start_hours < 0:
            raise ValidationError("cold_start_hours must be >= 0")
        if self.min_up < 1 or self.min_down < 1:
            raise ValidationError("min_up and min_down must be >= 1")
        if self.initial_state == 0:
            raise ValidationError("initial_state must be nonzero (signed hours)")
        if self.up_ramp is not None and self.up_ramp <= 0:
            raise ValidationError("up_ramp must be positive when present")
        if self.down_ramp is not None and self.down_ramp <= 0:
            raise ValidationError("down_ramp must be positive when present")
        if self.must_run & self.must_off:
            raise ValidationError("must_run and must_off intervals overlap")
        object.__setattr__(self, "must_run", frozenset(self.must_run))
        object.__setattr__(self, "must_off", frozenset(self.must_off))


@dataclass(frozen=True)
class EVFleet:
    """Aggregate EV fleet: count plus per-vehicle averages in kWh."""

    count: int
    avg_capacity: float = 15.0
    charge_frequency: float = 1.0
    avg_consumption: float = 8.22

    def __post_init__(self):
        if self.count < 0:
            raise ValidationError("fleet count must be >= 0")
        if self.avg_capacity <= 0:
            raise ValidationError("avg_capacity must be positive")
        if self.charge_frequency < 0:
            raise ValidationError("charge_frequency must be >= 0")
        if self.avg_consumption < 0:
            raise ValidationError("avg_consumption must be >= 0")

    @property
    def total_capacity_mwh(self) -> float:
        return self.count * self.avg_capacity / 1000.0

    @property
    def total_consumption_mwh(self) -> float:
        return self.count * self.avg_consumption / 1000.0


@dataclass(frozen=True)
class UnitArrays:
    """Column views of the unit list plus derived masks, for the hot paths."""

    p_min: np.ndarray
    p_max: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    hot: np.ndarray
    cold: np.ndarray
    tcold: np.ndarray
    mut: np.ndarray
    mdt: np.ndarray
    init_state: np.ndarray
    dc: np.ndarray
    up_ramp: np.ndarray
    down_ramp: np.ndarray
    must_run_mask: np.ndarray
    must_off_mask: np.ndarray
    free_t: np.ndarray
    free_i: np.ndarray
    priority: np.ndarray


@dataclass(frozen=True)
class Instance:
    """A complete scheduling problem: units, fleet, demand profile, rules."""

    units: tuple[ThermalUnit, ...]
    fleet: EVFleet
    demand: tuple[float, ...]
    reserve_fraction: float = 0.10
    interval_hours: float = 1.0
    mode: Mode = Mode.V2G

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "demand", tuple(float(d) for d in self.demand))
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.units:
            raise ValidationError("instance needs at least one unit")
        if len(self.demand) < 1:
            raise ValidationError("demand profile must cover >= 1 interval")
        if any(d <= 0 for d in self.demand):
            raise ValidationError("all demands must be positive")
        if self.reserve_fraction < 0:
            raise ValidationError("reserve_fraction must be >= 0")
        if self.interval_hours <= 0:
            raise ValidationError("interval_hours must be positive")
        total_pmax = sum(u.p_max for u in self.units)
        if total_pmax <= max(self.demand):
            raise ValidationError(
                f"total capacity {total_pmax} MW cannot cover peak demand "
                f"{max(self.demand)} MW")
        horizon = len(self.demand)
        for k, u in enumerate(self.units):
            bad = [t for t in (u.must_run | u.must_off) if not 0 <= t < horizon]
            if bad:
                raise ValidationError(
                    f"unit {k}: must-run/off interval {bad[0]} outside horizon")

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def horizon(self) -> int:
        return len(self.demand)

    @cached_property
    def demand_array(self) -> np.ndarray:
        return np.asarray(self.demand, dtype=np.float64)

    @cached_property
    def arrays(self) -> UnitArrays:
        T, I = self.horizon, self.n_units
        us = self.units
        must_run = np.zeros((T, I), dtype=bool)
        must_off = np.zeros((T, I), dtype=bool)
        for i, u in enumerate(us):
            for t in u.must_run:
                must_run[t, i] = True
            for t in u.must_off:
                must_off[t, i] = True
        free = ~(must_run | must_off)
        free_t, free_i = np.nonzero(free)
        p_max = np.array([u.p_max for u in us])
        p_min = np.array([u.p_min for u in us])
        a = np.array([u.a for u in us])
        b = np.array([u.b for u in us])
        c = np.array([u.c for u in us])
        # average full-load cost orders the commitment priority list
        priority = np.argsort(a / p_max + b + c * p_max, kind="stable")
        return UnitArrays(
            p_min=p_min, p_max=p_max, a=a, b=b, c=c,
            hot=np.array([u.start_cost_hot for u in us]),
            cold=np.array([u.start_cost_cold for u in us]),
            tcold=np.array([u.cold_start_hours for u in us], dtype=np.int64),
            mut=np.array([u.min_up for u in us], dtype=np.int64),
            mdt=np.array([u.min_down for u in us], dtype=np.int64),
            init_state=np.array([u.initial_state for u in us], dtype=np.int64),
            dc=np.array([u.shutdown_cost for u in us]),
            up_ramp=np.array([np.inf if u.up_ramp is None else u.up_ramp for u in us]),
            down_ramp=np.array([np.inf if u.down_ramp is None else u.down_ramp for u in us]),
            must_run_mask=must_run, must_off_mask=must_off,
            free_t=free_t, free_i=free_i, priority=priority,
        )


@dataclass(eq=False)
class Solution:
    """Candidate schedule: T x I binary commitment plus the EV power vector.

    ``ev_power[t]`` is in MW; positive discharges the fleet into the grid,
    negative charges it.
    """

    commitment: np.ndarray
    ev_power: np.ndarray

    def copy(self) -> "Solution":
        return Solution(self.commitment.copy(), self.ev_power.copy())


# 10-unit benchmark system.  Per unit: p_max, p_min, a, b, c, hot start $,
# cold start $, cold start hours, min up, min down, initial state.
_BENCHMARK_UNITS = (
    (455, 150, 1000, 16.19, 0.00048, 4500, 9000, 5, 8, 8, 8),
    (455, 150, 970, 17.26, 0.00031, 5000, 10000, 5, 8, 8, 8),
    (130, 20, 700, 16.60, 0.00200, 550, 1100, 4, 5, 5, -5),
    (130, 20, 680, 16.50, 0.00211, 560, 1120, 4, 5, 5, -5),
    (162, 25, 450, 19.70, 0.00398, 900, 1800, 4, 6, 6, -6),
    (80, 20, 370, 22.26, 0.00712, 170, 340, 2, 3, 3, -3),
    (85, 25, 480, 27.74, 0.00790, 260, 520, 2, 3, 3, -3),
    (55, 10, 660, 25.92, 0.00413, 30, 60, 0, 1, 1, -1),
    (55, 10, 665, 27.27, 0.00222, 30, 60, 0, 1, 1, -1),
    (55, 10, 670, 27.79, 0.00173, 30, 60, 0, 1, 1, -1),
)

_BENCHMARK_DEMAND = (
    700, 750, 850, 950, 1000, 1100, 1150, 1200, 1300, 1400, 1450, 1500,
    1400, 1300, 1200, 1050, 1000, 1100, 1200, 1400, 1300, 1100, 900, 800,
)

_BENCHMARK_EVS = 50_000


def builtin_instance(units_count: int, mode: Mode | str = Mode.V2G) -> Instance:
    """Return the built-in benchmark system with 10, 20 or 40 units.

    The 20- and 40-unit systems duplicate the 10-unit system k times and
    scale the demand profile and the EV fleet size by the same factor.
    """
    if units_count not in (10, 20, 40):
        raise ValueError(f"units_count must be 10, 20 or 40, got {units_count}")
    k = units_count // 10
    units = []
    for _ in range(k):
        for p_max, p_min, a, b, c, hot, cold, tcold, mut, mdt, init in _BENCHMARK_UNITS:
            units.append(ThermalUnit(
                p_max=p_max, p_min=p_min, a=a, b=b, c=c,
                start_cost_hot=hot, start_cost_cold=cold,
                cold_start_hours=tcold, shutdown_cost=0.0,
                min_up=mut, min_down=mdt, initial_state=init,
            ))
    return Instance(
        units=tuple(units),
        fleet=EVFleet(count=k * _BENCHMARK_EVS),
        demand=tuple(k * d for d in _BENCHMARK_DEMAND),
        reserve_fraction=0.10,
        interval_hours=1.0,
        mode=Mode(mode),
    )


def startup_cost(unit: ThermalUnit, off_hours: int) -> float:
    """Start-up cost of a unit that has been offline for ``off_hours``.

    Hot cost applies while the unit has been off at most min_down plus the
    cold-start window; beyond that the cold cost applies.
    """
    if off_hours > unit.min_down + unit.cold_start_hours:
        return unit.start_cost_cold
    return unit.start_cost_hot


# ---------------------------------------------------------------------------
# Instance file format: one JSON document whose fields mirror the dataclasses.
# Powers in MW, fleet energies in kWh, must-run/off as 0-based interval lists.

_UNIT_FIELDS = (
    "p_max", "p_min", "a", "b", "c", "start_cost_hot", "start_cost_cold",
    "cold_start_hours", "shutdown_cost", "min_up", "min_down",
    "initial_state", "up_ramp", "down_ramp", "must_run", "must_off",
)
_FLEET_FIELDS = ("count", "avg_capacity", "charge_frequency", "avg_consumption")


def save_instance(instance: Instance, path) -> None:
    doc = {
        "units": [
            {
                "p_max": u.p_max, "p_min": u.p_min,
                "a": u.a, "b": u.b, "c": u.c,
                "start_cost_hot": u.start_cost_hot,
                "start_cost_cold": u.start_cost_cold,
                "cold_start_hours": u.cold_start_hours,
                "shutdown_cost": u.shutdown_cost,
                "min_up": u.min_up, "min_down": u.min_down,
                "initial_state": u.initial_state,
                "up_ramp": u.up_ramp, "down_ramp": u.down_ramp,
                "must_run": sorted(u.must_run), "must_off": sorted(u.must_off),
            }
            for u in instance.units
        ],
        "fleet": {
            "count": instance.fleet.count,
            "avg_capacity": instance.fleet.avg_capacity,
            "charge_frequency": instance.fleet.charge_frequency,
            "avg_consumption": instance.fleet.avg_consumption,
        },
        "demand": list(instance.demand),
        "reserve_fraction": instance.reserve_fraction,
        "interval_hours": instance.interval_hours,
        "mode": instance.mode.value,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _require(mapping, key, where):
    if key not in mapping:
        raise ParseError(f"{where}: missing field '{key}'")
    return mapping[key]


def load_instance(path) -> Instance:
    """Load an instance file, raising ParseError / ValidationError on bad input."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")

    units = []
    for k, entry in enumerate(_require(doc, "units", str(path))):
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: units[{k}] must be an object")
        unknown = set(entry) - set(_UNIT_FIELDS)
        if unknown:
            raise ParseError(f"{path}: units[{k}]: unknown field '{sorted(unknown)[0]}'")
        kwargs = {}
        for name in ("p_max", "p_min", "a", "b", "c"):
            kwargs[name] = float(_require(entry, name, f"{path}: units[{k}]"))
        for name in ("start_cost_hot", "start_cost_cold", "shutdown_cost"):
            kwargs[name] = float(entry.get(name, 0.0))
        for name in ("cold_start_hours", "min_up", "min_down"):
            if name in entry:
                kwargs[name] = int(entry[name])
        kwargs["initial_state"] = int(entry.get("initial_state", -1))
        for name in ("up_ramp", "down_ramp"):
            val = entry.get(name)
            kwargs[name] = None if val is None else float(val)
        kwargs["must_run"] = frozenset(int(t) for t in entry.get("must_run", ()))
        kwargs["must_off"] = frozenset(int(t) for t in entry.get("must_off", ()))
        units.append(ThermalUnit(**kwargs))

    fd = _require(doc, "fleet", str(path))
    unknown = set(fd) - set(_FLEET_FIELDS)
    if unknown:
        raise ParseError(f"{path}: fleet: unknown field '{sorted(unknown)[0]}'")
    fleet = EVFleet(
        count=int(_require(fd, "count", f"{path}: fleet")),
        avg_capacity=float(fd.get("avg_capacity", 15.0)),
        charge_frequency=float(fd.get("charge_frequency", 1.0)),
        avg_consumption=float(fd.get("avg_consumption", 8.22)),
    )

    demand = _require(doc, "demand", str(path))
    if not isinstance(demand, list):
        raise ParseError(f"{path}: demand must be an array")
    try:
        mode = Mode(doc.get("mode", "v2g"))
    except ValueError as e:
        raise ParseError(f"{path}: mode must be one of "
                         f"{[m.value for m in Mode]}") from e
    return Instance(
        units=tuple(units),
        fleet=fleet,
        demand=tuple(float(d) for d in demand),
        reserve_fraction=float(doc.get("reserve_fraction", 0.10)),
        interval_hours=float(doc.get("interval_hours", 1.0)),
        mode=mode,
    )


def with_mode(instance: Instance, mode: Mode | str) -> Instance:
    """Copy of the instance with a different EV scheduling mode."""
    return replace(instance, mode=Mode(mode))
