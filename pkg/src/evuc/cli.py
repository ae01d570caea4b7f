"""Command line front end.

Subcommands:
  run       solve one instance/mode over N seeded runs
  compare   solve both EV models and report the cost difference
  validate  check a schedule CSV against the constraint set

Exit codes: 0 success, 1 usage error, 2 infeasible or failed run.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import report as report_mod
from .constraints import Tolerances, check_all
from .cro import CroParams
from .model import (Instance, InstanceError, Mode, builtin_instance,
                    load_instance, with_mode)
from .runner import aggregate, best_record, run_many
from .schedule import build_schedule, format_table, read_csv, write_csv

USAGE_ERROR = 1
RUN_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


class CliError(Exception):
    def __init__(self, message, code=USAGE_ERROR):
        super().__init__(message)
        self.code = code


def _add_instance_flags(p, need_mode=True):
    p.add_argument("--units", type=int, choices=(10, 20, 40),
                   help="built-in benchmark system size")
    p.add_argument("--instance", type=Path, help="instance JSON file")
    if need_mode:
        p.add_argument("--mode", choices=[m.value for m in Mode],
                       help="EV scheduling model (default: the instance's)")


def _add_solver_flags(p):
    p.add_argument("--runs", type=int, default=1, help="independent seeded runs")
    p.add_argument("--budget", type=int, default=None,
                   help="objective evaluations per run (default 50000)")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--params", type=Path, default=None,
                   help="JSON file overriding solver parameters")
    p.add_argument("--out", type=Path, default=None,
                   help="schedule CSV path; report and figures go alongside")
    p.add_argument("--no-plots", action="store_true",
                   help="skip figure rendering on the report path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evuc",
                     description="EV / unit-commitment scheduling benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="optimize one instance")
    _add_instance_flags(p_run)
    _add_solver_flags(p_run)

    p_cmp = sub.add_parser("compare", help="compare V2G against load leveling")
    _add_instance_flags(p_cmp, need_mode=False)
    _add_solver_flags(p_cmp)

    p_val = sub.add_parser("validate", help="check a schedule CSV")
    _add_instance_flags(p_val)
    p_val.add_argument("--schedule", type=Path, required=True,
                       help="schedule CSV to check")
    p_val.add_argument("--tolerance", type=float, default=0.05,
                       help="MW/MWh slack, sized for 2-decimal tables")
    p_val.add_argument("--strict", action="store_true",
                       help="use the solver-grade tolerances instead")
    return parser


def _load_target(args, need_mode=True) -> Instance:
    if (args.units is None) == (args.instance is None):
        raise CliError("exactly one of --units or --instance is required")
    if args.instance is not None:
        try:
            instance = load_instance(args.instance)
        except FileNotFoundError:
            raise CliError(f"instance file not found: {args.instance}")
        except InstanceError as e:
            raise CliError(f"bad instance file: {e}")
        if need_mode and args.mode:
            instance = with_mode(instance, args.mode)
        return instance
    mode = Mode(args.mode) if need_mode and args.mode else Mode.V2G
    return builtin_instance(args.units, mode)


def _load_params(args) -> CroParams:
    params = CroParams()
    if args.params is not None:
        try:
            overrides = json.loads(Path(args.params).read_text())
        except FileNotFoundError:
            raise CliError(f"params file not found: {args.params}")
        except json.JSONDecodeError as e:
            raise CliError(f"bad params file: line {e.lineno}: {e.msg}")
        known = {f.name for f in dataclasses.fields(CroParams)}
        unknown = set(overrides) - known
        if unknown:
            raise CliError(f"unknown parameter '{sorted(unknown)[0]}' "
                           f"(expected one of {sorted(known)})")
        params = dataclasses.replace(params, **overrides)
    if args.budget is not None:
        params = dataclasses.replace(params, eval_budget=args.budget)
    try:
        params.validate()
    except ValueError as e:
        raise CliError(f"bad parameters: {e}")
    return params


def _check_writable(path: Path):
    parent = path.parent if path.parent != Path("") else Path(".")
    if not parent.is_dir():
        raise CliError(f"output directory does not exist: {parent}")


def _write_outputs(args, instance, params, records, mode_label):
    best = best_record(records)
    sched = build_schedule(instance, best.solution, best.dispatch)
    write_csv(instance, sched, args.out)
    base = args.out.with_suffix("")
    payload = report_mod.report_payload(instance, params, args.seed, records,
                                        mode_label)
    report_path = base.parent / (base.name + ".report.json")
    report_mod.write_report(report_path, payload)
    written = [str(args.out), str(report_path)]
    if not args.no_plots:
        conv = base.parent / (base.name + ".convergence.png")
        prof = base.parent / (base.name + ".schedule.png")
        report_mod.convergence_figure(records, conv)
        report_mod.schedule_figure(instance, sched, prof)
        written += [str(conv), str(prof)]
    return written


def cmd_run(args) -> int:
    instance = _load_target(args)
    params = _load_params(args)
    if args.out is not None:
        _check_writable(args.out)
    records = run_many(instance, params, seed=args.seed, runs=args.runs,
                       jobs=args.jobs)
    agg = aggregate(records)
    best = best_record(records)
    sched = build_schedule(instance, best.solution, best.dispatch)
    print(format_table(instance, sched))
    print()
    print(f"runs        {agg['runs']}")
    print(f"best cost   ${agg['best_cost']:,.2f}  (run {agg['best_run']})")
    print(f"mean cost   ${agg['mean_cost']:,.2f}")
    print(f"mean time   {agg['mean_time_s']:.2f} s")
    if args.out is not None:
        for path in _write_outputs(args, instance, params, records,
                                   instance.mode.value):
            print(f"wrote {path}")
    if not agg["all_feasible"]:
        print("warning: some runs ended infeasible", file=sys.stderr)
        return RUN_ERROR
    return 0


def cmd_compare(args) -> int:
    base = _load_target(args, need_mode=False)
    params = _load_params(args)
    if args.out is not None:
        _check_writable(args.out)
    results = {}
    records_by_mode = {}
    for mode in (Mode.LOAD_LEVELING, Mode.V2G):
        instance = with_mode(base, mode)
        records = run_many(instance, params, seed=args.seed, runs=args.runs,
                           jobs=args.jobs)
        records_by_mode[mode.value] = records
        results[mode.value] = aggregate(records)
    ll = results[Mode.LOAD_LEVELING.value]
    v2g = results[Mode.V2G.value]
    diff = v2g["best_cost"] - ll["best_cost"]
    print(f"{'model':<16} {'best cost':>16} {'mean cost':>16}")
    for name, agg in results.items():
        print(f"{name:<16} {agg['best_cost']:>16,.2f} {agg['mean_cost']:>16,.2f}")
    print(f"difference (v2g - load-leveling): ${diff:,.2f}")
    if args.out is not None:
        payload = {
            "instance": {"units": base.n_units, "ev_count": base.fleet.count},
            "params": dataclasses.asdict(params),
            "master_seed": args.seed,
            "results": results,
            "difference_best": diff,
        }
        report_mod.write_report(args.out, payload)
        print(f"wrote {args.out}")
        if not args.no_plots:
            fig = args.out.with_suffix("")
            fig = fig.parent / (fig.name + ".comparison.png")
            report_mod.comparison_figure(results, fig)
            print(f"wrote {fig}")
    if not (ll["all_feasible"] and v2g["all_feasible"]):
        return RUN_ERROR
    return 0


def cmd_validate(args) -> int:
    instance = _load_target(args)
    try:
        sched = read_csv(args.schedule)
    except FileNotFoundError:
        raise CliError(f"schedule file not found: {args.schedule}")
    except ValueError as e:
        raise CliError(str(e))
    if sched.n_units != instance.n_units or sched.horizon != instance.horizon:
        raise CliError(
            f"schedule is {sched.horizon}x{sched.n_units}, instance needs "
            f"{instance.horizon}x{instance.n_units}")
    tol = Tolerances() if args.strict else Tolerances(
        balance=args.tolerance, slack=args.tolerance)
    report = check_all(instance, sched.solution(), powers=sched.power, tol=tol)
    if report.feasible:
        print(f"{args.schedule}: feasible (all constraints satisfied)")
        return 0
    print(f"{args.schedule}: {len(report.violations)} violation(s)")
    for v in report.violations:
        where = []
        if v.t is not None:
            where.append(f"hour {v.t + 1}")
        if v.unit is not None:
            where.append(f"unit {v.unit + 1}")
        loc = ", ".join(where) or "fleet"
        print(f"  {v.constraint:<18} {loc:<18} magnitude {v.magnitude:.4f}")
    return RUN_ERROR


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "compare": cmd_compare, "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except CliError as e:
        print(f"evuc: error: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
