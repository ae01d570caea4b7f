import json

import pytest

import evuc
from evuc.cro import CroParams
from evuc.report import (comparison_figure, convergence_figure,
                         report_payload, schedule_figure, write_report)
from evuc.runner import run_many
from evuc.schedule import build_schedule


@pytest.fixture(scope="module")
def records(inst10):
    return run_many(inst10, CroParams(eval_budget=400), seed=6, runs=3)


class TestPayload:
    def test_structure(self, inst10, records):
        payload = report_payload(inst10, CroParams(eval_budget=400), 6,
                                 records, "v2g")
        assert payload["instance"]["units"] == 10
        assert payload["params"]["eval_budget"] == 400
        assert len(payload["runs"]) == 3
        agg = payload["aggregate"]
        assert agg["best_cost"] == min(r["cost"] for r in payload["runs"])
        assert agg["best_cost"] <= agg["mean_cost"] <= agg["worst_cost"]
        assert payload["best_run_trace"][0][0] == 100

    def test_written_report_is_valid_json(self, inst10, records, tmp_path):
        payload = report_payload(inst10, CroParams(eval_budget=400), 6,
                                 records, "v2g")
        path = tmp_path / "out.report.json"
        write_report(path, payload)
        assert json.loads(path.read_text())["master_seed"] == 6


class TestFigures:
    def test_convergence_figure_written(self, records, tmp_path):
        path = tmp_path / "conv.png"
        convergence_figure(records, path)
        assert path.stat().st_size > 5_000

    def test_schedule_figure_written(self, inst10, records, tmp_path):
        best = min(records, key=lambda r: r.cost)
        sched = build_schedule(inst10, best.solution, best.dispatch)
        path = tmp_path / "sched.png"
        schedule_figure(inst10, sched, path)
        assert path.stat().st_size > 5_000

    def test_comparison_figure_written(self, tmp_path):
        results = {
            "load-leveling": {"best_cost": 572_467.0, "mean_cost": 574_000.0},
            "v2g": {"best_cost": 564_728.0, "mean_cost": 565_019.0},
        }
        path = tmp_path / "cmp.png"
        comparison_figure(results, path)
        assert path.stat().st_size > 5_000
