"""Joint EV / unit-commitment scheduling solved with chemical reaction
optimization."""

from .constraints import (ConstraintReport, GenerationError, SoCTrajectory,
                          Tolerances, Violation, check_all, initial_ev,
                          initial_uc, soc_trajectory)
from .cro import CroEngine, CroParams, Molecule, RunStats, SolveResult, solve
from .dispatch import DispatchResult, economic_dispatch, evaluate, fuel_cost
from .model import (EVFleet, Instance, InstanceError, Mode, ParseError,
                    Solution, ThermalUnit, ValidationError, builtin_instance,
                    load_instance, save_instance, startup_cost, with_mode)
from .neighborhood import ev_shift_range, perturb
from .runner import RunRecord, aggregate, best_record, run_many
from .schedule import Schedule, build_schedule, read_csv, reserve_percent, write_csv

__version__ = "0.1.0"

__all__ = [
    "ConstraintReport", "CroEngine", "CroParams", "DispatchResult", "EVFleet",
    "GenerationError", "Instance", "InstanceError", "Mode", "Molecule",
    "ParseError", "RunRecord", "RunStats", "Schedule", "SoCTrajectory",
    "Solution", "SolveResult", "ThermalUnit", "Tolerances", "ValidationError",
    "Violation", "aggregate", "best_record", "builtin_instance", "check_all",
    "economic_dispatch", "ev_shift_range", "evaluate", "fuel_cost",
    "initial_ev", "initial_uc", "load_instance", "perturb", "read_csv",
    "reserve_percent", "run_many", "save_instance", "build_schedule",
    "soc_trajectory", "solve", "startup_cost", "with_mode", "write_csv",
]
