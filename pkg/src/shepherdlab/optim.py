"""Automatic design: iterated racing over machines and elitist neuroevolution."""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seed
from .errors import BudgetExhausted, InvalidArgument
from .nn import NnGenome, mutate_genome
from .pfsm import mutate_pfsm, sample_pfsm
from .sim import run_episode
from .stats import friedman_eliminate, friedman_test

__all__ = [
    "Budget",
    "DesignOutcome",
    "Evaluator",
    "charge",
    "evolve",
    "iterated_race",
]

MIN_DESIGN_BUDGET = 1000


class Budget:
    """Episode budget; ``charge`` either takes the whole amount or refuses."""

    def __init__(self, max_episodes=100_000, consumed=0):
        if max_episodes < 0 or not 0 <= consumed <= max_episodes:
            raise InvalidArgument("invalid budget")
        self.max_episodes = int(max_episodes)
        self._consumed = int(consumed)
        self._lock = threading.Lock()

    @property
    def consumed(self):
        return self._consumed

    @property
    def remaining(self):
        return self.max_episodes - self._consumed

    def charge(self, n=1):
        if n < 0:
            raise InvalidArgument("cannot charge a negative amount")
        with self._lock:
            if self._consumed + n > self.max_episodes:
                raise BudgetExhausted(f"charging {n} would exceed {self.max_episodes} "
                                      f"(consumed {self._consumed})")
            self._consumed += n
        return self

    def __repr__(self):
        return f"Budget(max_episodes={self.max_episodes}, consumed={self._consumed})"


def charge(budget, n):
    return budget.charge(n)


class Evaluator:
    """Runs batches of episodes against a budget.

    ``episode_fn(controller, seed) -> objective`` replaces the simulator,
    e.g. for stub evaluators in tests. Batches are charged up front, so a
    batch runs completely or not at all. With ``threads > 1`` episodes run
    concurrently and results keep the submission order.
    """

    def __init__(self, scenario, budget, threads=1, episode_fn=None):
        self.scenario = scenario
        self.budget = budget
        self.threads = max(1, int(threads))
        self.episode_fn = episode_fn or (lambda c, s: run_episode(scenario, c, s).objective)
        self.episodes_run = 0
        self._lock = threading.Lock()

    def affordable(self, n):
        return n <= self.budget.remaining

    def _one(self, job):
        value = self.episode_fn(*job)
        with self._lock:
            self.episodes_run += 1
        return value

    def evaluate(self, jobs):
        """Objectives for ``(controller, seed)`` pairs."""
        jobs = list(jobs)
        self.budget.charge(len(jobs))
        if self.threads == 1 or len(jobs) < 2:
            return [self._one(j) for j in jobs]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(self._one, jobs))


@dataclass
class DesignOutcome:
    best: object
    best_score: float
    history: list = field(default_factory=list)
    consumed: int = 0


def _stamp(history, t0, budget, **entry):
    entry.update(consumed=budget.consumed, elapsed=round(time.perf_counter() - t0, 6))
    history.append(entry)


# iterated racing -----------------------------------------------------------


class _Race:
    """Score cache over a shared, growing list of instances (episode seeds)."""

    def __init__(self, evaluator, base_seed, sense):
        self.ev = evaluator
        self.base = base_seed
        self.cost_sign = sense.sign()
        self.configs = []
        self.scores = []

    def add(self, config):
        self.configs.append(config)
        self.scores.append([])
        return len(self.configs) - 1

    def seed(self, k):
        return derive_seed(self.base, "instance", k)

    def ensure(self, ids, k):
        """Evaluate instance ``k`` for every id lacking it (one charged batch)."""
        todo = [i for i in ids if len(self.scores[i]) <= k]
        for i in todo:
            if len(self.scores[i]) != k:
                raise AssertionError("instances must be evaluated in order")
        values = self.ev.evaluate([(self.configs[i], self.seed(k)) for i in todo])
        for i, v in zip(todo, values):
            self.scores[i].append(float(v))
        return len(todo)

    def matrix(self, ids, k):
        return np.array([self.scores[i][:k] for i in ids])

    def mean(self, i, k=None):
        s = self.scores[i] if k is None else self.scores[i][:k]
        return float(np.mean(s))


def _new_candidates(rng, race, elites, n):
    if not elites:
        return [race.add(sample_pfsm(rng)) for _ in range(n)]
    m = len(elites)
    weights = np.arange(m, 0, -1, dtype=np.float64)
    cum = np.cumsum(weights / weights.sum())
    out = []
    for _ in range(n):
        parent = elites[min(int(np.searchsorted(cum, rng.random(), side="right")), m - 1)]
        out.append(race.add(mutate_pfsm(race.configs[parent], rng)))
    return out


def iterated_race(scenario, budget, rng, *, evaluator=None, n_iterations=5, first_test=5,
                  alpha=0.05, max_elites=5, threads=1, return_outcome=False):
    """Design a machine by iterated F-race within ``budget`` episodes.

    Each iteration gets an equal share of the remaining budget and races
    ``share // (first_test + min(5, j))`` candidates over a shared instance
    list: uniform samples in the first iteration, then the carried elites
    plus mutants of them. Friedman tests start once ``first_test``
    instances are complete.

    Every raced machine shares the first ``first_test`` instances, which
    serve as a fixed reference set. A race winner replaces the incumbent
    only if it covers that set and its mean is no worse both there and on
    all instances the two share. History ``best_score`` is the incumbent's
    reference-set mean, so it never worsens; ``best_mean`` is its mean over
    every instance it has seen.
    """
    if budget.max_episodes < MIN_DESIGN_BUDGET:
        raise InvalidArgument(f"design budget must be at least {MIN_DESIGN_BUDGET} episodes")
    if first_test < 2 or n_iterations < 1 or max_elites < 1:
        raise InvalidArgument("invalid racing parameters")
    ev = evaluator or Evaluator(scenario, budget, threads)
    sense = scenario.sense
    race = _Race(ev, rng.u64(), sense)
    t0 = time.perf_counter()
    history = []
    elites = []
    incumbent = None
    j = 0
    while True:
        j += 1
        left = max(1, n_iterations - j + 1)
        share = budget.remaining // left
        n_cand = share // (first_test + min(5, j))
        n_new = n_cand - len(elites)
        if n_new < 1 or not ev.affordable(n_new):
            break
        alive = elites + _new_candidates(rng, race, elites, n_new)
        n_start = len(alive)
        stop_at = max(2, n_start // 4)
        spent = 0
        k = 0
        while True:
            need = sum(1 for i in alive if len(race.scores[i]) <= k)
            if spent + need > share or not ev.affordable(need):
                break
            spent += race.ensure(alive, k)
            k += 1
            if k >= first_test and len(alive) > 1:
                keep = friedman_eliminate(race.matrix(alive, k), alpha, sense)
                alive = [alive[i] for i in keep]
            if len(alive) <= stop_at:
                break
        if k == 0:
            break
        ranked = _rank(race, alive, k)
        elites = ranked[:max_elites]
        winner = ranked[0]
        if incumbent is None or _replaces(race, winner, incumbent, first_test):
            incumbent = winner
        _stamp(history, t0, budget, iteration=j, candidates=n_start, instances=k,
               survivors=len(alive), best_score=race.mean(incumbent, first_test),
               best_mean=race.mean(incumbent), best_instances=len(race.scores[incumbent]))
        if budget.remaining <= 0:
            break
    if incumbent is None:
        # budget too small even for one race step: fall back to a sample
        incumbent = race.add(sample_pfsm(rng))
        best_score = math.nan
    else:
        best_score = race.mean(incumbent)
    outcome = DesignOutcome(race.configs[incumbent], best_score, history, budget.consumed)
    outcome.race = race
    return outcome if return_outcome else outcome.best


def _rank(race, ids, k):
    """Order ids by mean Friedman rank over the first ``k`` instances, then mean cost."""
    if len(ids) == 1:
        return list(ids)
    costs = race.matrix(ids, k).T * race.cost_sign
    mean_rank = friedman_test(costs).mean_ranks
    mean_cost = costs.mean(axis=0)
    order = sorted(range(len(ids)), key=lambda i: (mean_rank[i], mean_cost[i], ids[i]))
    return [ids[i] for i in order]


def _replaces(race, challenger, incumbent, n_ref):
    if challenger == incumbent:
        return True
    k = min(len(race.scores[challenger]), len(race.scores[incumbent]))
    if k < n_ref:
        return False
    sign = race.cost_sign
    return (race.mean(challenger, k) * sign <= race.mean(incumbent, k) * sign
            and race.mean(challenger, n_ref) * sign <= race.mean(incumbent, n_ref) * sign)


# neuroevolution ------------------------------------------------------------


def evolve(scenario, budget, rng, *, evaluator=None, population=100, n_elites=20,
           episodes_per_individual=10, threads=1, return_outcome=False):
    """Elitist evolution of network genomes within ``budget`` episodes.

    Every generation scores each genome as its mean objective over the same
    fresh seeds, keeps the best ``n_elites`` unchanged and fills the rest
    with mutants of uniformly drawn elites. Returns the best genome seen.
    """
    if budget.max_episodes < MIN_DESIGN_BUDGET:
        raise InvalidArgument(f"design budget must be at least {MIN_DESIGN_BUDGET} episodes")
    if not 0 < n_elites < population or episodes_per_individual < 1:
        raise InvalidArgument("invalid evolution parameters")
    ev = evaluator or Evaluator(scenario, budget, threads)
    sense = scenario.sense
    base = rng.u64()
    t0 = time.perf_counter()
    history = []
    pop = [NnGenome.random(rng) for _ in range(population)]
    best, best_fit = None, math.nan
    generations = budget.remaining // (population * episodes_per_individual)
    gen = 0
    while gen < generations or (gen == 0 and generations == 0):
        seeds = [derive_seed(base, "generation", gen, e) for e in range(episodes_per_individual)]
        if generations == 0:
            # not even one full generation: score as many genomes as affordable
            n_aff = budget.remaining // episodes_per_individual
            if n_aff == 0:
                break
            pop_eval = pop[:n_aff]
        else:
            pop_eval = pop
        values = ev.evaluate([(g, s) for g in pop_eval for s in seeds])
        fit = np.array(values).reshape(len(pop_eval), episodes_per_individual).mean(axis=1)
        order = sorted(range(len(pop_eval)), key=lambda i: (fit[i] * sense.sign(), i))
        if best is None or sense.better(fit[order[0]], best_fit):
            best, best_fit = pop_eval[order[0]], float(fit[order[0]])
        _stamp(history, t0, budget, generation=gen, generation_best=float(fit[order[0]]),
               best_score=best_fit)
        gen += 1
        if generations == 0:
            break
        elites = [pop_eval[i] for i in order[:n_elites]]
        pop = elites + [mutate_genome(elites[rng.integers(n_elites)], rng)
                        for _ in range(population - n_elites)]
    if best is None:
        best = pop[0]
    outcome = DesignOutcome(best, best_fit, history, budget.consumed)
    outcome.population = pop
    return outcome if return_outcome else outcome.best
