import numpy as np
import pytest

import evuc
import evuc.cro as cro_mod
from evuc.cro import CroEngine, CroParams, solve
from evuc.dispatch import DispatchResult


def tiny_params(**kw):
    base = dict(pop_size=3, eval_budget=300)
    base.update(kw)
    return CroParams(**base)


def make_engine(inst, **kw):
    params = tiny_params(eval_budget=kw.pop("eval_budget", 3))
    params = CroParams(**{**params.__dict__, **kw})
    return CroEngine(inst, params, np.random.default_rng(5))


class TestParams:
    def test_defaults_are_the_benchmark_settings(self):
        p = CroParams()
        assert (p.pop_size, p.initial_ke, p.initial_buffer) == (5, 100.0, 0.0)
        assert (p.mole_coll, p.ke_loss_rate) == (0.05, 0.05)
        assert (p.alpha, p.beta, p.eval_budget) == (10_000, 100_000.0, 50_000)

    @pytest.mark.parametrize("kw", [
        dict(pop_size=1), dict(mole_coll=1.5), dict(ke_loss_rate=-0.1),
        dict(initial_ke=-1.0), dict(eval_budget=2, pop_size=5),
    ])
    def test_invalid_params_rejected(self, kw):
        with pytest.raises(ValueError):
            CroParams(**{**CroParams().__dict__, **kw}).validate()


class TestOnWall:
    def test_degenerate_perturbation_only_redistributes_energy(
            self, inst10, monkeypatch):
        engine = make_engine(inst10)
        monkeypatch.setattr(cro_mod, "perturb", lambda inst, sol, rng: sol)
        m = engine.molecules[0]
        pe0, ke0 = m.pe, m.ke
        buffer0 = engine.buffer
        engine.on_wall(m)
        assert m.pe == pe0
        assert engine.stats.accepted["on_wall"] == 1
        assert 0.0 <= m.ke <= ke0
        assert engine.buffer == pytest.approx(buffer0 + (ke0 - m.ke))

    def test_rejection_leaves_molecule_unchanged(self, inst10, monkeypatch):
        engine = make_engine(inst10)
        m = engine.molecules[0]
        m.ke = 0.0
        worse = m.structure.copy()
        monkeypatch.setattr(cro_mod, "perturb", lambda inst, sol, rng: worse)
        monkeypatch.setattr(
            cro_mod, "evaluate",
            lambda inst, sol: DispatchResult(None, 0, 0, 0, m.pe + 1.0, True))
        structure0, pe0 = m.structure, m.pe
        engine.on_wall(m)
        assert m.structure is structure0 and m.pe == pe0
        assert m.num_hit == 1
        assert engine.stats.accepted["on_wall"] == 0


class TestSynthesis:
    def test_better_parent_is_perturbed_and_child_absorbs_energy(
            self, inst10, monkeypatch):
        engine = make_engine(inst10)
        m1, m2 = engine.molecules[0], engine.molecules[1]
        m1.pe, m1.ke = 570_000.0, 100.0
        m2.pe, m2.ke = 575_000.0, 100.0
        seen = []
        monkeypatch.setattr(
            cro_mod, "perturb",
            lambda inst, sol, rng: seen.append(sol) or sol)
        child_pe = 1_145_200.0  # exactly the combined energy of the pair
        monkeypatch.setattr(
            cro_mod, "evaluate",
            lambda inst, sol: DispatchResult(None, 0, 0, 0, child_pe, True))
        pop0 = len(engine.molecules)
        engine.syn(m1, m2)
        assert seen == [m1.structure]  # the lower-pe parent seeds the child
        assert len(engine.molecules) == pop0 - 1
        assert engine.stats.accepted["syn"] == 1
        child = engine.molecules[-1]
        assert child.pe == child_pe
        assert child.ke == pytest.approx(0.0)

    def test_rejected_when_child_exceeds_combined_energy(
            self, inst10, monkeypatch):
        engine = make_engine(inst10)
        m1, m2 = engine.molecules[0], engine.molecules[1]
        m1.pe, m1.ke = 570_000.0, 100.0
        m2.pe, m2.ke = 575_000.0, 100.0
        monkeypatch.setattr(cro_mod, "perturb", lambda inst, sol, rng: sol)
        monkeypatch.setattr(
            cro_mod, "evaluate",
            lambda inst, sol: DispatchResult(None, 0, 0, 0, 1_145_200.01, True))
        pop0 = len(engine.molecules)
        engine.syn(m1, m2)
        assert len(engine.molecules) == pop0
        assert engine.stats.accepted["syn"] == 0
        assert m1.num_hit == 1 and m2.num_hit == 1


class TestDecomposition:
    def test_buffer_draw_covers_children(self, inst10, monkeypatch):
        engine = make_engine(inst10)
        engine.buffer = 500.0
        m = engine.molecules[0]
        m.ke = 0.0
        monkeypatch.setattr(cro_mod, "perturb",
                            lambda inst, sol, rng: sol.copy())
        # two children each cost 100 more than the parent holds
        monkeypatch.setattr(
            cro_mod, "evaluate",
            lambda inst, sol: DispatchResult(None, 0, 0, 0,
                                             (m.pe / 2) + 100.0, True))
        total0 = engine._total_energy()
        engine.dec(m)
        assert engine.stats.accepted["dec"] == 1
        assert len(engine.molecules) == 4
        assert engine.buffer == pytest.approx(300.0)
        assert engine._total_energy() == pytest.approx(total0)

    def test_rejection_resets_hit_floor(self, inst10, monkeypatch):
        engine = make_engine(inst10)
        engine.buffer = 0.0
        m = engine.molecules[0]
        m.ke = 0.0
        m.num_hit = 50
        m.min_hit = 0
        monkeypatch.setattr(cro_mod, "perturb",
                            lambda inst, sol, rng: sol.copy())
        monkeypatch.setattr(
            cro_mod, "evaluate",
            lambda inst, sol: DispatchResult(None, 0, 0, 0, m.pe + 1e9, True))
        engine.dec(m)
        assert engine.stats.accepted["dec"] == 0
        assert len(engine.molecules) == 3
        assert m.min_hit == m.num_hit  # decomposition will not refire at once


class TestSolve:
    def test_budget_equal_to_population_returns_best_initial(self, inst10):
        params = tiny_params(pop_size=4, eval_budget=4)
        result = solve(inst10, params, seed=9)
        assert result.stats.evaluations == 4
        assert all(v == 0 for v in result.stats.fired.values())
        assert result.dispatch.total_cost == result.stats.best_cost

    def test_two_runs_same_seed_are_identical(self, inst10):
        a = solve(inst10, tiny_params(eval_budget=600), seed=123)
        b = solve(inst10, tiny_params(eval_budget=600), seed=123)
        assert a.dispatch.total_cost == b.dispatch.total_cost
        assert np.array_equal(a.solution.commitment, b.solution.commitment)
        assert np.array_equal(a.solution.ev_power, b.solution.ev_power)

    def test_different_seeds_diverge(self, inst10):
        a = solve(inst10, tiny_params(eval_budget=600), seed=1)
        b = solve(inst10, tiny_params(eval_budget=600), seed=2)
        assert a.dispatch.total_cost != b.dispatch.total_cost

    def test_evaluation_budget_respected(self, inst10):
        for budget in (7, 100, 501):
            result = solve(inst10, tiny_params(eval_budget=budget), seed=4)
            assert budget <= result.stats.evaluations <= budget + 2

    def test_energy_conserved_through_a_run(self, inst10):
        result = solve(inst10, tiny_params(eval_budget=2000, pop_size=5),
                       seed=17)
        assert result.stats.max_energy_drift <= 1e-6

    def test_population_accounting(self, inst10):
        result = solve(inst10, tiny_params(eval_budget=2000, pop_size=5),
                       seed=17)
        stats = result.stats
        assert stats.final_population == (
            5 + stats.accepted["dec"] - stats.accepted["syn"])
        assert stats.final_population >= 2

    def test_best_cost_trace_is_monotone(self, inst10):
        result = solve(inst10, tiny_params(eval_budget=1500), seed=29)
        trace = result.stats.best_trace
        assert trace[0][0] == 100
        assert trace[-1][0] == result.stats.evaluations
        costs = [c for _, c in trace]
        assert costs == sorted(costs, reverse=True)

    def test_best_solution_is_feasible_and_matches_cost(self, inst10):
        result = solve(inst10, tiny_params(eval_budget=800), seed=31)
        report = evuc.check_all(inst10, result.solution)
        assert report.feasible
        again = evuc.evaluate(inst10, result.solution)
        assert again.total_cost == result.dispatch.total_cost

    def test_load_leveling_never_discharges(self, inst10_ll):
        result = solve(inst10_ll, tiny_params(eval_budget=800), seed=37)
        assert np.all(result.solution.ev_power <= 1e-12)


class TestReactionSelection:
    def test_synthesis_skipped_at_population_floor(self, inst10):
        # beta far above any kinetic energy makes synthesis otherwise
        # unconditional; the floor keeps a pair alive for bimolecular steps
        params = tiny_params(pop_size=2, eval_budget=1200, beta=1e12)
        result = solve(inst10, params, seed=41)
        assert result.stats.accepted["syn"] == 0
        assert result.stats.final_population == 2

    def test_unimolecular_only_when_collision_rate_zero(self, inst10):
        params = tiny_params(mole_coll=0.0, eval_budget=400)
        result = solve(inst10, params, seed=43)
        assert result.stats.fired["inter"] == 0
        assert result.stats.fired["syn"] == 0
        assert result.stats.fired["on_wall"] > 0

    def test_decomposition_fires_at_threshold(self, inst10):
        params = tiny_params(pop_size=2, eval_budget=2000, alpha=10,
                             mole_coll=0.0)
        result = solve(inst10, params, seed=47)
        # firing needs a molecule stalled for alpha hits; acceptance also
        # needs a buffer able to fund two children, which stays rare
        assert result.stats.fired["dec"] > 0
        assert result.stats.final_population == \
            2 + result.stats.accepted["dec"]
