"""scikit-learn style wrappers around the design methods.

``fit`` takes a scenario and designs a controller for it; ``predict`` maps
episode seeds to objectives of the designed controller; ``score`` is the
mean sense-adjusted objective, so higher is always better.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._rng import RngStream
from .optim import Budget, DesignOutcome, evolve, iterated_race
from .pfsm import RandomWalk
from .sim import evaluate_many
from .validation import check_positive_int, check_probability, check_scenario, check_seed

__all__ = ["EvoCMYDesigner", "PistacchioDesigner", "RandomWalkDesigner"]


class _Designer(BaseEstimator):
    def _design(self, scenario, budget, rng):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Design a controller for scenario ``X``; ``y`` is ignored."""
        scenario = check_scenario(X)
        budget = Budget(check_positive_int(self.budget, "budget"))
        outcome = self._design(scenario, budget, RngStream(check_seed(self.random_state)))
        self.scenario_ = scenario
        self.controller_ = outcome.best
        self.history_ = outcome.history
        self.best_score_ = outcome.best_score
        self.budget_consumed_ = budget.consumed
        return self

    def predict(self, X):
        """Objective of the designed controller for each seed in ``X``."""
        check_is_fitted(self, "controller_")
        seeds = [check_seed(int(s)) for s in np.asarray(X).ravel()]
        return np.array([r.objective for r in
                         evaluate_many(self.scenario_, self.controller_, seeds, self.n_jobs)])

    def score(self, X, y=None):
        check_is_fitted(self, "controller_")
        return float(-self.scenario_.sense.sign() * np.mean(self.predict(X)))


class PistacchioDesigner(_Designer):
    """Iterated racing over probabilistic finite-state machines."""

    def __init__(self, budget=100_000, n_iterations=5, first_test=5, alpha=0.05,
                 max_elites=5, random_state=0, n_jobs=1):
        self.budget = budget
        self.n_iterations = n_iterations
        self.first_test = first_test
        self.alpha = alpha
        self.max_elites = max_elites
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _design(self, scenario, budget, rng):
        return iterated_race(
            scenario, budget, rng,
            n_iterations=check_positive_int(self.n_iterations, "n_iterations"),
            first_test=check_positive_int(self.first_test, "first_test", 2),
            alpha=check_probability(self.alpha, "alpha"),
            max_elites=check_positive_int(self.max_elites, "max_elites"),
            threads=check_positive_int(self.n_jobs, "n_jobs"),
            return_outcome=True,
        )


class EvoCMYDesigner(_Designer):
    """Elitist neuroevolution of the feed-forward network."""

    def __init__(self, budget=100_000, population=100, n_elites=20,
                 episodes_per_individual=10, random_state=0, n_jobs=1):
        self.budget = budget
        self.population = population
        self.n_elites = n_elites
        self.episodes_per_individual = episodes_per_individual
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _design(self, scenario, budget, rng):
        return evolve(
            scenario, budget, rng,
            population=check_positive_int(self.population, "population", 2),
            n_elites=check_positive_int(self.n_elites, "n_elites"),
            episodes_per_individual=check_positive_int(self.episodes_per_individual,
                                                       "episodes_per_individual"),
            threads=check_positive_int(self.n_jobs, "n_jobs"),
            return_outcome=True,
        )


class RandomWalkDesigner(_Designer):
    """The fixed baseline; fitting consumes no budget."""

    def __init__(self, budget=1, random_state=0, n_jobs=1):
        self.budget = budget
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _design(self, scenario, budget, rng):
        return DesignOutcome(RandomWalk(), float("nan"), [], 0)
