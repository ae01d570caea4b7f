import csv

import numpy as np
import pytest

import evuc
from evuc.cro import CroParams, solve
from evuc.schedule import (build_schedule, format_table, read_csv,
                           reserve_percent, write_csv)

from conftest import FIXTURES


@pytest.fixture(scope="module")
def solved(inst10):
    result = solve(inst10, CroParams(eval_budget=800), seed=2)
    return build_schedule(inst10, result.solution, result.dispatch)


class TestRoundTrip:
    def test_csv_round_trip(self, inst10, solved, tmp_path):
        path = tmp_path / "sched.csv"
        write_csv(inst10, solved, path)
        back = read_csv(path)
        assert np.allclose(back.power, solved.power, atol=1e-6)
        assert np.allclose(back.ev_power, solved.ev_power, atol=1e-6)
        assert np.allclose(back.load, solved.load, atol=1e-6)
        assert np.array_equal(back.commitment(), solved.commitment())

    def test_written_schedule_validates_strictly(self, inst10, solved, tmp_path):
        path = tmp_path / "sched.csv"
        write_csv(inst10, solved, path)
        back = read_csv(path)
        report = evuc.check_all(inst10, back.solution(), powers=back.power)
        assert report.feasible, report.violations[:4]

    def test_commitment_inference(self, published_v2g):
        u = published_v2g.commitment()
        assert u.shape == (24, 10)
        assert u[0].tolist() == [1, 1, 0, 0, 0, 0, 0, 0, 0, 0]
        assert u[11].tolist() == [1, 1, 1, 1, 1, 1, 1, 1, 0, 0]


class TestReserveColumn:
    @pytest.mark.parametrize("name", ["published_best_v2g.csv",
                                      "published_best_load_leveling.csv"])
    def test_recomputed_reserve_matches_published_column(self, inst10, name):
        path = FIXTURES / name
        sched = read_csv(path)
        with open(path, newline="") as fh:
            printed = np.array([float(r["reserve_pct"])
                                for r in csv.DictReader(fh)])
        recomputed = reserve_percent(inst10, sched)
        assert np.max(np.abs(recomputed - printed)) <= 0.01 + 1e-9


class TestErrors:
    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("hour,unit1,load_mw\n1,10.0,10.0\n")
        with pytest.raises(ValueError, match="v2g_mw"):
            read_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_csv(path)

    def test_no_unit_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("hour,v2g_mw,load_mw\n1,0.0,10.0\n")
        with pytest.raises(ValueError, match="unit"):
            read_csv(path)


class TestTable:
    def test_format_contains_layout(self, inst10, published_v2g):
        text = format_table(inst10, published_v2g)
        lines = text.splitlines()
        assert len(lines) == 25
        assert "V2G" in lines[0] and "reserve" in lines[0]
        assert "455.00" in lines[1] and "-127.27" in lines[1]
        assert lines[1].strip().startswith("1")
