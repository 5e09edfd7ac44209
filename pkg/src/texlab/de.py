"""Self-contained rand/1/bin differential-evolution global optimizer.

Generation-synchronous: all trial vectors of a generation are built from the
current population, evaluated (optionally as one batch), then selected. This
makes results deterministic for a given seed regardless of how evaluation is
parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import OptimizationError
from .linalg import Rng

__all__ = ["OptimizerConfig", "DEResult", "differential_evolution"]


@dataclass(frozen=True)
class OptimizerConfig:
    """Differential-evolution hyperparameters.

    mutation is an interval; the scale factor is redrawn uniformly from it
    once per generation (dither).
    """

    max_iterations: int = 500
    population_size: int = 40
    mutation: tuple[float, float] = (0.5, 1.0)
    crossover_rate: float = 0.7
    tolerance: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise OptimizationError("population_size must be at least 4")
        if not 0.0 < self.crossover_rate <= 1.0:
            raise OptimizationError("crossover_rate must be in (0, 1]")
        lo, hi = self.mutation
        if not 0.0 <= lo <= hi < 2.0:
            raise OptimizationError("mutation interval must satisfy 0 <= lo <= hi < 2")
        if self.max_iterations < 1:
            raise OptimizationError("max_iterations must be positive")
        if self.tolerance < 0.0:
            raise OptimizationError("tolerance must be nonnegative")


@dataclass(frozen=True)
class DEResult:
    """Best point found, plus bookkeeping. Unpacks as (x, value)."""

    x: np.ndarray
    value: float
    iterations: int
    converged: bool

    def __iter__(self):
        return iter((self.x, self.value))


def _reflect(points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    points = np.where(points < lo, 2.0 * lo - points, points)
    points = np.where(points > hi, 2.0 * hi - points, points)
    return np.clip(points, lo, hi)


def differential_evolution(
    objective: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    config: OptimizerConfig | None = None,
    rng: Rng | None = None,
    *,
    batch_objective: Callable[[np.ndarray], np.ndarray] | None = None,
    init: np.ndarray | None = None,
    history: list | None = None,
) -> DEResult:
    """Minimize `objective` over a box with the rand/1/bin strategy.

    Parameters
    ----------
    objective : callable mapping a point (dim,) to a finite-or-inf float.
    bounds : per-coordinate (low, high) pairs; all finite, low < high.
    config : hyperparameters; defaults to OptimizerConfig().
    rng : random stream; defaults to Rng(config.seed).
    batch_objective : optional callable mapping (n, dim) to (n,) values,
        used instead of `objective` for whole-population evaluation.
    init : optional (n, dim) array of seed members that replace the first
        rows of the random initial population (clipped to bounds).
    history : optional list; the per-generation best value is appended.
    """
    config = config or OptimizerConfig()
    rng = rng or Rng(config.seed)

    bnds = np.asarray(bounds, dtype=float)
    if bnds.ndim != 2 or bnds.shape[1] != 2 or bnds.shape[0] < 1:
        raise OptimizationError("bounds must be a nonempty sequence of (low, high) pairs")
    lo, hi = bnds[:, 0], bnds[:, 1]
    if not (np.all(np.isfinite(bnds)) and np.all(lo < hi)):
        raise OptimizationError("bounds must be finite with low < high")
    dim = bnds.shape[0]
    n_pop = config.population_size

    def evaluate(points: np.ndarray) -> np.ndarray:
        if batch_objective is not None:
            return np.asarray(batch_objective(points), dtype=float)
        return np.array([float(objective(p)) for p in points])

    pop = lo + (hi - lo) * rng.uniform(size=(n_pop, dim))
    if init is not None:
        seeds = np.clip(np.atleast_2d(np.asarray(init, dtype=float)), lo, hi)
        n_seed = min(seeds.shape[0], n_pop)
        pop[:n_seed] = seeds[:n_seed]
    fitness = evaluate(pop)

    best_idx = int(np.argmin(fitness))
    best_x = pop[best_idx].copy()
    best_f = float(fitness[best_idx])

    m_lo, m_hi = config.mutation
    iterations = 0
    converged = False
    for _ in range(config.max_iterations):
        iterations += 1
        scale = float(rng.uniform(m_lo, m_hi)) if m_hi > m_lo else m_lo

        abc = np.empty((n_pop, 3), dtype=int)
        for i in range(n_pop):
            picks = rng.choice(n_pop - 1, size=3, replace=False)
            abc[i] = np.where(picks >= i, picks + 1, picks)
        mutants = pop[abc[:, 0]] + scale * (pop[abc[:, 1]] - pop[abc[:, 2]])
        mutants = _reflect(mutants, lo, hi)

        cross = rng.uniform(size=(n_pop, dim)) < config.crossover_rate
        forced = rng.integers(0, dim, size=n_pop)
        cross[np.arange(n_pop), forced] = True
        trials = np.where(cross, mutants, pop)

        trial_f = evaluate(trials)
        better = trial_f <= fitness
        pop[better] = trials[better]
        fitness[better] = trial_f[better]

        gen_best = int(np.argmin(fitness))
        if fitness[gen_best] < best_f:
            best_f = float(fitness[gen_best])
            best_x = pop[gen_best].copy()
        if history is not None:
            history.append(best_f)

        spread = float(np.std(fitness)) if np.all(np.isfinite(fitness)) else np.inf
        if spread < config.tolerance:
            converged = True
            break

    return DEResult(x=best_x, value=best_f, iterations=iterations, converged=converged)
