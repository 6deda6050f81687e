"""Budgeted learners on the hard instances, measuring how often learning
beats the query lower bound's prediction (it should not, for small budgets)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import prng
from ..policy import compute_optimal_smooth_strategy, is_epsilon_optimal
from .instances import hard_learning_instance


class LearnerBudgetExceeded(RuntimeError):
    pass


class _BudgetedOracle:
    """Counting wrapper that cuts the oracle off after ``budget`` pulls."""

    def __init__(self, oracle, budget: int):
        self._oracle = oracle
        self.budget = budget
        self.used = 0
        self.n = oracle.n

    def pull(self, i: int) -> float:
        if self.used + 1 > self.budget:
            raise LearnerBudgetExceeded(f"budget of {self.budget} pulls exceeded")
        self.used += 1
        return self._oracle.pull(i)


def _greedy_from_observations(n: int, sigma: float, totals, counts) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    if counts.sum() == 0:
        return np.full(n, 1.0 / n)  # nothing observed: uniform guess
    means = np.zeros(n)
    seen = counts > 0
    means[seen] = np.asarray(totals, dtype=float)[seen] / counts[seen]
    return compute_optimal_smooth_strategy(n, sigma, means).strategy


def uniform_greedy_learner(oracle, n: int, sigma: float, budget: int,
                           gen: np.random.Generator) -> np.ndarray:
    """Pull uniformly random arms, then play greedily on observed means."""
    totals = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    for _ in range(budget):
        i = int(gen.integers(0, n))
        totals[i] += oracle.pull(i)
        counts[i] += 1
    return _greedy_from_observations(n, sigma, totals, counts)


def round_robin_greedy_learner(oracle, n: int, sigma: float, budget: int,
                               gen: np.random.Generator) -> np.ndarray:
    """Pull arms 0,1,2,... in order, then play greedily on observed means."""
    totals = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    for t in range(budget):
        i = t % n
        totals[i] += oracle.pull(i)
        counts[i] += 1
    return _greedy_from_observations(n, sigma, totals, counts)


LEARNERS = {
    "uniform_greedy": uniform_greedy_learner,
    "round_robin_greedy": round_robin_greedy_learner,
}


@dataclass
class LearningReport:
    learner: str
    n: int
    sigma: float
    eps: float
    budget: int
    trials: int
    successes: int
    invalid_trials: int = 0
    mean_queries: float = 0.0
    success_values: list = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials


def measure_learning_success(learner_name: str, n: int, sigma: float, eps: float,
                             budget: int, trials: int, seed: int) -> LearningReport:
    """Fraction of random hard instances where the learner's output is
    eps-optimal (judged against the instance's true utilities)."""
    learner = LEARNERS[learner_name]
    successes = 0
    invalid = 0
    total_queries = 0
    for t in range(trials):
        inst = hard_learning_instance(n, sigma, prng.generator(seed, "instance", t))
        oracle = _BudgetedOracle(inst.bandit.oracle(prng.derive(seed, "oracle", t)), budget)
        try:
            pi = learner(oracle, n, sigma, budget, prng.generator(seed, "learner", t))
        except LearnerBudgetExceeded:
            invalid += 1
            continue
        total_queries += oracle.used
        if is_epsilon_optimal(pi, inst.expected_utilities(), sigma, eps):
            successes += 1
    return LearningReport(
        learner=learner_name, n=n, sigma=sigma, eps=eps, budget=budget,
        trials=trials, successes=successes, invalid_trials=invalid,
        mean_queries=total_queries / max(1, trials - invalid),
    )
