"""Convex-roof evaluation via ensemble parameterization and global search.

Every decomposition of a rank-r state into k pure pieces is reachable from
its eigendecomposition through a k x r semi-unitary mixing matrix. The
mixing matrix is produced from a free real vector by QR, so the roof
minimization becomes a box-constrained global optimization handled by the
differential-evolution engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .de import OptimizerConfig, differential_evolution
from .errors import DimensionError, InvalidStateError, OptimizationError
from .linalg import DensityMatrix, PureState, Rng
from .measures import FreeSet, MeasureValue, _pure_rugosity_batch, pure_rugosity

__all__ = [
    "Ensemble",
    "RoofResult",
    "RoofTrials",
    "hjw_decomposition",
    "semi_unitary_from_vector",
    "convex_roof",
    "repeated_convex_roof",
    "roof_result_to_dict",
]

RANK_EIGENVALUE_FLOOR = 1e-12
WEIGHT_FLOOR = 1e-14


@dataclass(frozen=True)
class Ensemble:
    """Weighted pure-state decomposition of a density matrix."""

    weights: np.ndarray
    states: tuple[PureState, ...]
    source: DensityMatrix

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or len(w) != len(self.states):
            raise InvalidStateError("weights and states must align")
        if np.any(w < 0.0):
            raise InvalidStateError("ensemble weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise InvalidStateError(f"weights sum to {w.sum()}, not 1")
        defect = float(np.max(np.abs(self.reconstruct() - self.source.matrix)))
        if defect > 1e-9:
            raise InvalidStateError(f"ensemble does not reproduce the state: defect {defect:.3e}")
        object.__setattr__(self, "weights", w)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.source.dim, self.source.dim), dtype=complex)
        for p, phi in zip(self.weights, self.states):
            out += p * np.outer(phi.vector, phi.vector.conj())
        return out

    def average_rugosity(self, free: FreeSet) -> float:
        """Sum_i p_i R(phi_i); independent re-evaluation used for audits."""
        vecs = np.array([s.vector for s in self.states])
        rug = _pure_rugosity_batch(free, vecs)
        total = 0.0
        for p, r in zip(self.weights, rug):
            if p > 0.0:
                total += p * r
        return float(total)


@dataclass(frozen=True)
class RoofResult:
    value: MeasureValue
    best_ensemble: Ensemble
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class RoofTrials:
    """Repeated-seed summary: statistical mode and [0.05, 0.95] quantiles."""

    values: tuple[float, ...]
    mode: float
    quantile_low: float
    quantile_high: float


def hjw_decomposition(rho: DensityMatrix, u: np.ndarray, *, eig=None) -> Ensemble:
    """Ensemble from a semi-unitary mixing of rho's eigendecomposition.

    u must be k x r with u^dag u = 1_r, where r is the rank of rho
    (eigenvalues above 1e-12) and k >= r. Members with weight below 1e-14
    are dropped.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2:
        raise InvalidStateError("mixing matrix must be 2-D")
    k, r = u.shape
    if k < r:
        raise InvalidStateError(f"mixing matrix needs k >= r, got {k} < {r}")
    defect = float(np.max(np.abs(u.conj().T @ u - np.eye(r))))
    if defect > 1e-10:
        raise InvalidStateError(f"matrix is not semi-unitary: defect {defect:.3e}")
    if eig is None:
        vals, vecs = rho.eigensystem()
    else:
        vals, vecs = eig
    keep = vals > RANK_EIGENVALUE_FLOOR
    rank = int(np.count_nonzero(keep))
    if rank != r:
        raise InvalidStateError(f"mixing matrix rank {r} does not match state rank {rank}")
    lam = vals[keep]
    v = vecs[:, keep]

    zeta = (u * np.sqrt(lam)[None, :]) @ v.T  # rows are unnormalized members
    p = np.sum(np.abs(zeta) ** 2, axis=1)
    weights = []
    states = []
    for i in range(k):
        if p[i] < WEIGHT_FLOOR:
            continue
        weights.append(float(p[i]))
        states.append(PureState(zeta[i] / np.sqrt(p[i])))
    weights = np.asarray(weights)
    weights = weights / weights.sum()
    return Ensemble(weights, tuple(states), rho)


def semi_unitary_from_vector(x: np.ndarray, k: int, r: int) -> np.ndarray:
    """k x r semi-unitary from 2*k*r interleaved (re, im) coordinates.

    QR with the R diagonal phased to be real nonnegative, so the map is
    deterministic. Rank-deficient inputs are perturbed by 1e-10 and retried
    once before failing.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != 2 * k * r:
        raise DimensionError(f"expected {2 * k * r} coordinates, got {x.size}")
    if not np.any(x):
        raise InvalidStateError("all-zero coordinate vector")
    for attempt in range(2):
        mat = (x[0::2] + 1j * x[1::2]).reshape(k, r)
        q, rr = np.linalg.qr(mat)
        diag = np.diag(rr)
        if np.min(np.abs(diag)) < 1e-12:
            if attempt == 0:
                x = x + 1e-10
                continue
            raise InvalidStateError("rank-deficient coordinate matrix")
        phase = diag / np.abs(diag)
        return q * phase[None, :]
    raise InvalidStateError("unreachable")


def _semi_unitary_batch(xs: np.ndarray, k: int, r: int) -> np.ndarray:
    """(n, 2kr) -> (n, k, r); same construction as semi_unitary_from_vector."""
    mats = (xs[:, 0::2] + 1j * xs[:, 1::2]).reshape(-1, k, r)
    q, rr = np.linalg.qr(mats)
    diag = np.diagonal(rr, axis1=1, axis2=2).copy()
    mod = np.abs(diag)
    degenerate = mod.min(axis=1) < 1e-12
    if np.any(degenerate):
        mats[degenerate] += 1e-10
        q2, rr2 = np.linalg.qr(mats[degenerate])
        q[degenerate] = q2
        diag[degenerate] = np.diagonal(rr2, axis1=1, axis2=2)
        mod = np.abs(diag)
    phase = diag / np.where(mod > 0, mod, 1.0)
    return q * phase[:, None, :]


def convex_roof(
    free: FreeSet,
    rho: DensityMatrix,
    k: int | None = None,
    config: OptimizerConfig | None = None,
    rng: Rng | None = None,
    polish: bool = True,
) -> RoofResult:
    """Minimal ensemble-averaged pure rugosity over all k-member
    decompositions of rho.

    k defaults to dim^2 (the Caratheodory bound) and may not exceed it.
    Pure inputs skip the optimization. The initial population is seeded
    with the eigendecomposition point, so the result never exceeds the
    spectral ensemble's value. By default the global-search result is
    polished with a bounded local minimizer and the polished point is kept
    only when it improves.
    """
    if free.dim != rho.dim:
        raise DimensionError("convex_roof with mismatched dims")
    d = rho.dim
    k = d * d if k is None else int(k)
    if not 1 <= k <= d * d:
        raise DimensionError(f"decomposition size k must be in [1, {d * d}]")
    config = config or OptimizerConfig()
    rng = rng or Rng(config.seed)

    vals, vecs = rho.eigensystem()
    keep = vals > RANK_EIGENVALUE_FLOOR
    r = int(np.count_nonzero(keep))
    if r == 1:
        phi = PureState(vecs[:, -1])
        value = pure_rugosity(free, phi)
        ens = Ensemble(np.array([1.0]), (phi,), rho)
        return RoofResult(value, ens, 0, True)
    if k < r:
        raise DimensionError(f"k = {k} below the state rank {r}")
    lam = vals[keep]
    v = vecs[:, keep]
    sqrt_lam = np.sqrt(lam)

    def batch_objective(xs: np.ndarray) -> np.ndarray:
        u = _semi_unitary_batch(xs, k, r)
        zeta = (u * sqrt_lam[None, None, :]) @ v.T  # (n, k, d)
        p = np.sum(np.abs(zeta) ** 2, axis=2)
        safe = np.where(p > WEIGHT_FLOOR, p, 1.0)
        members = zeta / np.sqrt(safe)[:, :, None]
        rug = _pure_rugosity_batch(free, members.reshape(-1, d)).reshape(p.shape)
        contrib = np.where(p > WEIGHT_FLOOR, rug, 0.0)
        with np.errstate(invalid="ignore"):
            out = np.where(p > WEIGHT_FLOOR, p * contrib, 0.0).sum(axis=1)
        return out

    def objective(x: np.ndarray) -> float:
        return float(batch_objective(x[None, :])[0])

    # Spectral-decomposition warm start: u = [1_r; 0].
    warm = np.zeros((k, r), dtype=complex)
    warm[:r, :r] = np.eye(r)
    x0 = np.empty(2 * k * r)
    x0[0::2] = warm.reshape(-1).real
    x0[1::2] = warm.reshape(-1).imag

    result = differential_evolution(
        objective,
        [(-1.0, 1.0)] * (2 * k * r),
        config,
        rng,
        batch_objective=batch_objective,
        init=x0[None, :],
    )
    best_x, best_val = result.x, float(result.value)
    if polish and math.isfinite(best_val):
        local = minimize(
            objective, best_x, method="L-BFGS-B", bounds=[(-1.0, 1.0)] * (2 * k * r)
        )
        if np.isfinite(local.fun) and local.fun < best_val:
            best_x, best_val = local.x, float(local.fun)
    u_best = semi_unitary_from_vector(best_x, k, r)
    ensemble = hjw_decomposition(rho, u_best, eig=(vals, vecs))
    value = MeasureValue(best_val, "convex_roof")
    return RoofResult(value, ensemble, result.iterations, result.converged)


def _mode(values: np.ndarray, decimals: int = 3) -> float:
    """Binned statistical mode: round, take the most frequent, break ties
    toward the smallest. Infinite when most trials are infinite."""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    if finite.size <= values.size / 2.0:
        return math.inf
    rounded = np.round(finite, decimals)
    uniq, counts = np.unique(rounded, return_counts=True)
    return float(uniq[counts == counts.max()].min())


def repeated_convex_roof(
    free: FreeSet,
    rho: DensityMatrix,
    k: int | None = None,
    config: OptimizerConfig | None = None,
    rng: Rng | None = None,
    n_trials: int = 30,
) -> RoofTrials:
    """Run the roof minimization under n_trials independent seeds and report
    the mode and the [0.05, 0.95] quantiles of the values."""
    if n_trials < 1:
        raise OptimizationError("n_trials must be >= 1")
    config = config or OptimizerConfig()
    rng = rng or Rng(config.seed)
    values = []
    for t in range(n_trials):
        res = convex_roof(free, rho, k, config, rng.child(t))
        values.append(float(res.value.value))
    arr = np.asarray(values)
    if np.all(np.isinf(arr)):
        low = high = math.inf
    else:
        low, high = np.quantile(arr, [0.05, 0.95])
    return RoofTrials(tuple(values), _mode(arr), float(low), float(high))


def _json_float(v: float):
    if math.isinf(v):
        return "inf"
    return float(v)


def roof_result_to_dict(result: RoofResult) -> dict:
    """JSON-ready dict with the full best ensemble: weights plus one
    amplitude column per basis ket, each entry as [re, im]."""
    ens = result.best_ensemble
    return {
        "value": _json_float(result.value.value),
        "method": result.value.method,
        "iterations_used": result.iterations_used,
        "converged": result.converged,
        "ensemble": {
            "weights": [float(w) for w in ens.weights],
            "amplitudes": [
                [[float(a.real), float(a.imag)] for a in s.vector] for s in ens.states
            ],
        },
    }
