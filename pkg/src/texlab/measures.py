"""Resource measures: Sigma functional, rugosity, fidelity lower bound,
and closed-form qubit imaginarity / coherence.

All logarithms are natural. Overlaps below 1e-14 report an infinite
measure rather than a huge float; experiment drivers serialize the
infinity as a sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .de import OptimizerConfig, differential_evolution
from .errors import DimensionError, InvalidStateError, UnsupportedVariantError
from .linalg import (
    DensityMatrix,
    PureState,
    Rng,
    _sqrtm_psd,
    bloch_from_qubit,
    fidelity,
)

__all__ = [
    "FreeSet",
    "MeasureValue",
    "OVERLAP_FLOOR",
    "sigma_functional",
    "rugosity_single",
    "pure_rugosity",
    "lower_bound_measure",
    "qubit_imaginarity",
    "qubit_coherence",
]

OVERLAP_FLOOR = 1e-14

SINGLE_PURE = "single_pure"
ORTHOGONAL_PURE = "orthogonal_pure"
INCOHERENT = "incoherent"
REAL_STATES = "real"
SINGLE_MIXED = "single_mixed"


@dataclass(frozen=True)
class MeasureValue:
    """Nonnegative measure value; `math.inf` when the state is orthogonal
    to the whole free set. `method` records the evaluation route."""

    value: float
    method: str

    def __post_init__(self):
        if not math.isinf(self.value) and self.value < -1e-10:
            raise InvalidStateError(f"measure value below zero: {self.value}")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def __float__(self) -> float:
        return float(self.value)


def _log_measure(overlap: float, method: str) -> MeasureValue:
    if overlap < OVERLAP_FLOOR:
        return MeasureValue(math.inf, method)
    return MeasureValue(max(-math.log(overlap), 0.0) + 0.0, method)  # +0.0 kills -0.0


@dataclass(frozen=True)
class FreeSet:
    """Tagged description of the zero-resource set.

    Variants: a single pure state, a family of mutually orthogonal pure
    states, the full incoherent-diagonal set, the real-entried states, or
    a single mixed state.
    """

    variant: str
    dim: int
    states: tuple[PureState, ...] = field(default=())
    tau: DensityMatrix | None = None

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionError("free set needs dim >= 2")
        for s in self.states:
            if s.dim != self.dim:
                raise DimensionError("free-set member dimension mismatch")
        if self.variant == ORTHOGONAL_PURE:
            if not 1 <= len(self.states) <= self.dim:
                raise InvalidStateError("orthogonal family size must be in [1, dim]")
            for i in range(len(self.states)):
                for j in range(i + 1, len(self.states)):
                    ov = abs(self.states[i].overlap(self.states[j]))
                    if ov > 1e-10:
                        raise InvalidStateError(f"free states not orthogonal: |<i|j>| = {ov:.3e}")
        if self.variant == SINGLE_MIXED and (self.tau is None or self.tau.dim != self.dim):
            raise InvalidStateError("single_mixed free set needs a matching tau")

    @classmethod
    def single_pure(cls, psi: PureState) -> "FreeSet":
        return cls(SINGLE_PURE, psi.dim, (psi,))

    @classmethod
    def orthogonal_pure(cls, states) -> "FreeSet":
        states = tuple(states)
        return cls(ORTHOGONAL_PURE, states[0].dim, states)

    @classmethod
    def incoherent(cls, dim: int) -> "FreeSet":
        return cls(INCOHERENT, dim)

    @classmethod
    def real_states(cls, dim: int) -> "FreeSet":
        return cls(REAL_STATES, dim)

    @classmethod
    def single_mixed(cls, tau: DensityMatrix) -> "FreeSet":
        return cls(SINGLE_MIXED, tau.dim, (), tau)

    def extreme_state_matrix(self) -> np.ndarray | None:
        """Rows are the pure extreme points, when the set has finitely many."""
        if self.variant in (SINGLE_PURE, ORTHOGONAL_PURE):
            return np.array([s.vector for s in self.states])
        if self.variant == INCOHERENT:
            return np.eye(self.dim, dtype=complex)
        return None

    def contains(self, rho: DensityMatrix, tol: float = 1e-8) -> bool:
        """Membership test for the free set."""
        if rho.dim != self.dim:
            raise DimensionError("contains() with mismatched dims")
        m = rho.matrix
        if self.variant == SINGLE_PURE:
            return bool(np.max(np.abs(m - self.states[0].density().matrix)) <= tol)
        if self.variant == ORTHOGONAL_PURE:
            proj = np.zeros_like(m)
            for s in self.states:
                w = float(np.real(np.vdot(s.vector, m @ s.vector)))
                proj += w * np.outer(s.vector, s.vector.conj())
            return bool(np.max(np.abs(m - proj)) <= tol)
        if self.variant == INCOHERENT:
            off = m - np.diag(np.diag(m))
            return bool(np.max(np.abs(off)) <= tol)
        if self.variant == REAL_STATES:
            return bool(np.max(np.abs(m.imag)) <= tol)
        return bool(np.max(np.abs(m - self.tau.matrix)) <= tol)


def sigma_functional(psi: PureState, rho: DensityMatrix) -> float:
    """D <psi|rho|psi>; equals the grand sum of rho's entries when psi is
    the uniform superposition."""
    if psi.dim != rho.dim:
        raise DimensionError("sigma_functional with mismatched dims")
    return rho.dim * rho.expectation(psi)


def rugosity_single(psi: PureState, rho: DensityMatrix) -> MeasureValue:
    """-ln <psi|rho|psi>: texture of rho against the reference state psi."""
    if psi.dim != rho.dim:
        raise DimensionError("rugosity_single with mismatched dims")
    return _log_measure(rho.expectation(psi), "direct")


def _pure_rugosity_batch(free: FreeSet, vecs: np.ndarray) -> np.ndarray:
    """Rugosity of each row of `vecs` (n, dim); rows must be normalized.
    Returns values that may contain inf."""
    extremes = free.extreme_state_matrix()
    if extremes is not None:
        if free.variant == INCOHERENT:
            overlaps = np.max(np.abs(vecs) ** 2, axis=1)
        else:
            overlaps = np.max(np.abs(vecs.conj() @ extremes.T) ** 2, axis=1)
    elif free.variant == REAL_STATES:
        outer = vecs[:, :, None] * vecs.conj()[:, None, :]
        overlaps = np.linalg.eigvalsh(outer.real)[:, -1]
    else:  # single mixed state
        overlaps = np.real(np.einsum("ni,ij,nj->n", vecs.conj(), free.tau.matrix, vecs))
    overlaps = np.clip(overlaps, 0.0, None)
    out = np.full(overlaps.shape, np.inf)
    ok = overlaps >= OVERLAP_FLOOR
    out[ok] = np.maximum(-np.log(overlaps[ok]), 0.0)
    return out


def pure_rugosity(free: FreeSet, phi: PureState) -> MeasureValue:
    """-ln of the best squared overlap between phi and the free set.

    The maximization runs over the extreme points of the set; for the
    real-states set it reduces to the largest eigenvalue of the real part
    of |phi><phi|.
    """
    if phi.dim != free.dim:
        raise DimensionError("pure_rugosity with mismatched dims")
    val = float(_pure_rugosity_batch(free, phi.vector[None, :])[0])
    return MeasureValue(val, "closed_form")


def _max_root_fidelity_over_simplex(
    free: FreeSet, rho: DensityMatrix, config: OptimizerConfig, rng: Rng
) -> float:
    """max over sigma in the hull of the orthogonal extreme points of
    sqrt(F(rho, sigma)), via softmax weights and differential evolution."""
    extremes = free.extreme_state_matrix()
    n_ext = extremes.shape[0]
    sqrt_rho = _sqrtm_psd(rho.matrix)
    # sqrt_rho |psi_k> columns: inner matrix is G diag(w) G^dag.
    g = sqrt_rho @ extremes.T.conj()  # (D, n_ext)

    def batch_objective(xs: np.ndarray) -> np.ndarray:
        shifted = xs - xs.max(axis=1, keepdims=True)
        w = np.exp(shifted)
        w /= w.sum(axis=1, keepdims=True)
        inner = np.einsum("ik,nk,jk->nij", g, w, g.conj())
        vals = np.linalg.eigvalsh((inner + inner.conj().transpose(0, 2, 1)) / 2.0)
        vals = np.clip(vals, 0.0, None)
        return -np.sqrt(vals).sum(axis=1)

    def objective(x: np.ndarray) -> float:
        return float(batch_objective(x[None, :])[0])

    bounds = [(-12.0, 12.0)] * n_ext
    # Seed the population with every vertex, the flat mixture, and the
    # diagonal projection of rho onto the extreme points.
    diag_overlap = np.real(np.einsum("ki,ij,kj->k", extremes.conj(), rho.matrix, extremes))
    diag_seed = np.log(np.clip(diag_overlap, 1e-12, None))
    seeds = np.vstack([np.eye(n_ext) * 24.0 - 12.0, np.zeros(n_ext), diag_seed])
    result = differential_evolution(
        objective, bounds, config, rng, batch_objective=batch_objective, init=seeds
    )
    best_x, best_val = result.x, result.value
    local = minimize(objective, best_x, method="L-BFGS-B", bounds=bounds)
    if np.isfinite(local.fun) and local.fun < best_val:
        best_val = float(local.fun)
    return min(-best_val, 1.0)


def lower_bound_measure(
    free: FreeSet,
    rho: DensityMatrix,
    config: OptimizerConfig | None = None,
    rng: Rng | None = None,
) -> MeasureValue:
    """-ln of the maximal Uhlmann fidelity between rho and the free set.

    Closed for the single-state variants; for orthogonal families the root
    fidelity is maximized over the probability simplex of the extreme
    points (softmax parameterization, differential evolution). The
    real-states variant is only defined here for pure inputs via
    pure_rugosity and is rejected for mixed states.
    """
    if rho.dim != free.dim:
        raise DimensionError("lower_bound_measure with mismatched dims")
    if free.variant == SINGLE_PURE:
        return _log_measure(rho.expectation(free.states[0]), "lower_bound")
    if free.variant == SINGLE_MIXED:
        return _log_measure(fidelity(rho, free.tau), "lower_bound")
    if free.variant == REAL_STATES:
        raise UnsupportedVariantError(
            "lower bound over all real density matrices is not supported; "
            "use pure_rugosity for pure states or the convex roof"
        )
    if len(free.states) == 1:
        return _log_measure(rho.expectation(free.states[0]), "lower_bound")
    config = config or OptimizerConfig(max_iterations=200, population_size=20)
    rng = rng or Rng(config.seed)
    root_f = _max_root_fidelity_over_simplex(free, rho, config, rng)
    if root_f < 1e-7:  # fidelity below the 1e-14 overlap floor
        return MeasureValue(math.inf, "lower_bound")
    return MeasureValue(max(-2.0 * math.log(root_f), 0.0), "lower_bound")


def qubit_imaginarity(rho: DensityMatrix) -> MeasureValue:
    """Closed-form imaginarity of a qubit: depends only on the Bloch
    y-component, range [0, ln 2]."""
    if rho.dim != 2:
        raise DimensionError("qubit_imaginarity needs dim 2")
    n_y = bloch_from_qubit(rho).n_y
    arg = 0.5 * (1.0 + math.sqrt(max(1.0 - n_y * n_y, 0.0)))
    return MeasureValue(max(-math.log(arg), 0.0) + 0.0, "closed_form")


def qubit_coherence(rho: DensityMatrix) -> MeasureValue:
    """Closed-form coherence of a qubit: depends only on the transverse
    Bloch components, zero iff rho is diagonal."""
    if rho.dim != 2:
        raise DimensionError("qubit_coherence needs dim 2")
    b = bloch_from_qubit(rho)
    r_perp_sq = b.n_x * b.n_x + b.n_y * b.n_y
    arg = 0.5 * (1.0 + math.sqrt(max(1.0 - r_perp_sq, 0.0)))
    return MeasureValue(max(-math.log(arg), 0.0) + 0.0, "closed_form")
