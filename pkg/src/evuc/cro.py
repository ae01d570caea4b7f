"""Chemical reaction optimization engine.

A population of molecules carries candidate schedules; four energy-
conserving elementary reactions (on-wall collision, decomposition,
inter-molecular collision, synthesis) perturb them until the objective
evaluation budget is exhausted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .constraints import GenerationError, initial_ev, initial_uc
from .dispatch import DispatchResult, evaluate
from .model import Instance, Solution
from .neighborhood import perturb

#: Best-cost trace sampling interval, in objective evaluations.
TRACE_EVERY = 100

_INIT_ATTEMPTS = 100


@dataclass
class CroParams:
    """Engine parameters; the defaults reproduce the benchmark settings."""

    pop_size: int = 5
    initial_ke: float = 100.0
    initial_buffer: float = 0.0
    mole_coll: float = 0.05
    ke_loss_rate: float = 0.05
    alpha: int = 10_000
    beta: float = 100_000.0
    eval_budget: int = 50_000

    def validate(self) -> "CroParams":
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if not 0.0 <= self.mole_coll <= 1.0:
            raise ValueError("mole_coll must be a probability")
        if not 0.0 <= self.ke_loss_rate <= 1.0:
            raise ValueError("ke_loss_rate must be a probability")
        if self.initial_ke < 0 or self.initial_buffer < 0:
            raise ValueError("energies must be >= 0")
        if self.eval_budget < self.pop_size:
            raise ValueError("eval_budget must cover the initial population")
        return self


@dataclass(eq=False)
class Molecule:
    """A candidate schedule with its energy state and hit counters."""

    structure: Solution
    pe: float
    ke: float
    num_hit: int = 0
    min_hit: int = 0
    min_pe: float = math.inf

    def __post_init__(self):
        if math.isinf(self.min_pe):
            self.min_pe = self.pe


REACTION_NAMES = ("on_wall", "dec", "inter", "syn")


@dataclass
class RunStats:
    """Run accounting: budget use, reactions, convergence trace, energy audit."""

    evaluations: int = 0
    fired: dict = field(default_factory=lambda: {n: 0 for n in REACTION_NAMES})
    accepted: dict = field(default_factory=lambda: {n: 0 for n in REACTION_NAMES})
    best_cost: float = math.inf
    best_trace: list = field(default_factory=list)
    max_energy_drift: float = 0.0
    final_population: int = 0


class SolveResult(NamedTuple):
    solution: Solution
    dispatch: DispatchResult
    stats: RunStats


class CroEngine:
    """One optimization run over a private molecule population."""

    def __init__(self, instance: Instance, params: CroParams, rng):
        self.instance = instance
        self.params = params.validate()
        self.rng = rng
        self.buffer = float(params.initial_buffer)
        self.stats = RunStats()
        self.best_solution: Solution | None = None
        self.molecules: list[Molecule] = []
        for _ in range(params.pop_size):
            sol = self._initial_solution()
            self.molecules.append(
                Molecule(sol, pe=self._evaluate(sol), ke=float(params.initial_ke)))
        self._total_energy0 = self._total_energy()

    def _initial_solution(self) -> Solution:
        last_error = None
        for _ in range(_INIT_ATTEMPTS):
            u = initial_uc(self.instance, self.rng)
            try:
                ev = initial_ev(self.instance, u)
            except GenerationError as e:
                last_error = e
                continue
            return Solution(u, ev)
        raise GenerationError(
            f"could not build a feasible initial solution: {last_error}")

    def _evaluate(self, sol: Solution) -> float:
        cost = evaluate(self.instance, sol).total_cost
        self.stats.evaluations += 1
        if cost < self.stats.best_cost:
            self.stats.best_cost = cost
            self.best_solution = sol
        if self.stats.evaluations % TRACE_EVERY == 0:
            self.stats.best_trace.append((self.stats.evaluations, self.stats.best_cost))
        return cost

    def _total_energy(self) -> float:
        return self.buffer + sum(m.pe + m.ke for m in self.molecules)

    def _audit(self):
        total = self._total_energy()
        drift = abs(total - self._total_energy0) / max(abs(self._total_energy0), 1.0)
        if drift > self.stats.max_energy_drift:
            self.stats.max_energy_drift = drift

    def _absorb(self, m: Molecule, sol: Solution, pe: float, ke: float):
        m.structure = sol
        m.pe = pe
        m.ke = ke
        if pe < m.min_pe:
            m.min_pe = pe
            m.min_hit = m.num_hit

    # -- elementary reactions ------------------------------------------------

    def on_wall(self, m: Molecule):
        self.stats.fired["on_wall"] += 1
        sol = perturb(self.instance, m.structure, self.rng)
        pe_new = self._evaluate(sol)
        m.num_hit += 1
        if m.pe + m.ke >= pe_new:
            surplus = m.pe + m.ke - pe_new
            q = self.rng.uniform(self.params.ke_loss_rate, 1.0)
            self.buffer += surplus * (1.0 - q)
            self._absorb(m, sol, pe_new, surplus * q)
            self.stats.accepted["on_wall"] += 1

    def dec(self, m: Molecule):
        self.stats.fired["dec"] += 1
        sol1 = perturb(self.instance, m.structure, self.rng)
        pe1 = self._evaluate(sol1)
        sol2 = perturb(self.instance, m.structure, self.rng)
        pe2 = self._evaluate(sol2)
        m.num_hit += 1
        available = m.pe + m.ke
        need = pe1 + pe2
        draw = 0.0 if available >= need else need - available
        if draw > self.buffer:
            # not enough energy even with the whole buffer: reject, and
            # reset the hit counter so decomposition does not refire at once
            m.min_hit = m.num_hit
            return
        self.buffer -= draw
        residual = available + draw - need
        k = self.rng.uniform()
        child1 = Molecule(sol1, pe=pe1, ke=residual * k)
        child2 = Molecule(sol2, pe=pe2, ke=residual * (1.0 - k))
        idx = self.molecules.index(m)
        self.molecules[idx] = child1
        self.molecules.append(child2)
        self.stats.accepted["dec"] += 1

    def inter(self, m1: Molecule, m2: Molecule):
        self.stats.fired["inter"] += 1
        sol1 = perturb(self.instance, m1.structure, self.rng)
        pe1 = self._evaluate(sol1)
        sol2 = perturb(self.instance, m2.structure, self.rng)
        pe2 = self._evaluate(sol2)
        m1.num_hit += 1
        m2.num_hit += 1
        total = m1.pe + m2.pe + m1.ke + m2.ke
        if total >= pe1 + pe2:
            residual = total - pe1 - pe2
            k = self.rng.uniform()
            self._absorb(m1, sol1, pe1, residual * k)
            self._absorb(m2, sol2, pe2, residual * (1.0 - k))
            self.stats.accepted["inter"] += 1

    def syn(self, m1: Molecule, m2: Molecule):
        self.stats.fired["syn"] += 1
        donor = m1 if m1.pe <= m2.pe else m2
        sol = perturb(self.instance, donor.structure, self.rng)
        pe_new = self._evaluate(sol)
        total = m1.pe + m2.pe + m1.ke + m2.ke
        if total >= pe_new:
            child = Molecule(sol, pe=pe_new, ke=total - pe_new)
            self.molecules = [m for m in self.molecules if m is not m1 and m is not m2]
            self.molecules.append(child)
            self.stats.accepted["syn"] += 1
        else:
            m1.num_hit += 1
            m2.num_hit += 1

    # -- main loop -----------------------------------------------------------

    def step(self):
        pop = self.molecules
        if len(pop) == 1 or self.rng.uniform() > self.params.mole_coll:
            m = pop[int(self.rng.integers(len(pop)))]
            if m.num_hit - m.min_hit >= self.params.alpha:
                self.dec(m)
            else:
                self.on_wall(m)
        else:
            i = int(self.rng.integers(len(pop)))
            j = int(self.rng.integers(len(pop) - 1))
            if j >= i:
                j += 1
            m1, m2 = pop[i], pop[j]
            # synthesis would merge the pair; keep at least two molecules
            if m1.ke <= self.params.beta and m2.ke <= self.params.beta and len(pop) > 2:
                self.syn(m1, m2)
            else:
                self.inter(m1, m2)
        self._audit()

    def run(self) -> SolveResult:
        while self.stats.evaluations < self.params.eval_budget:
            self.step()
        self.stats.final_population = len(self.molecules)
        if not self.stats.best_trace or self.stats.best_trace[-1][0] != self.stats.evaluations:
            self.stats.best_trace.append((self.stats.evaluations, self.stats.best_cost))
        best = self.best_solution.copy()
        return SolveResult(best, evaluate(self.instance, best), self.stats)


def solve(instance: Instance, params: CroParams | None = None,
          seed=None) -> SolveResult:
    """Run one seeded optimization and return the best schedule found.

    ``seed`` feeds ``numpy.random.default_rng``; identical seeds give
    bit-identical results.
    """
    engine = CroEngine(instance, params or CroParams(), np.random.default_rng(seed))
    return engine.run()
