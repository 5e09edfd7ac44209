"""Trace-preserving Kraus channels with fixed-point block structure.

A channel tagged with free_dim = m keeps the first m computational basis
states exactly invariant: each operator is block upper-triangular with a
diagonal m x m top-left block, a zero bottom-left block, and per-index
moduli satisfying sum_n |alpha_{i,n}|^2 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidChannelError, InvalidStateError
from .linalg import DensityMatrix, Rng

__all__ = [
    "KrausChannel",
    "KrausOutcomes",
    "apply",
    "kraus_outcomes",
    "random_fixed_point_channel",
    "filter_channel",
    "complete_dephasing",
    "depolarize_to",
    "compose",
    "channel_to_json",
    "channel_from_json",
]

COMPLETENESS_HARD_TOL = 1e-8
BLOCK_MODULI_TOL = 1e-10


class KrausChannel:
    """Ordered list of same-shape complex Kraus operators."""

    __slots__ = ("operators", "dim", "free_dim")

    def __init__(self, operators, free_dim: int | None = None):
        ops = tuple(np.array(k, dtype=complex) for k in operators)
        if not ops:
            raise InvalidChannelError("channel needs at least one operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.ndim != 2 or k.shape != (d, d):
                raise DimensionError("all Kraus operators must be square with equal shape")
        gram = sum(k.conj().T @ k for k in ops)
        defect = float(np.max(np.abs(gram - np.eye(d))))
        if defect > COMPLETENESS_HARD_TOL:
            raise InvalidChannelError(f"completeness violated: defect {defect:.3e}")
        if free_dim is not None:
            m = int(free_dim)
            if not 0 < m <= d:
                raise InvalidChannelError(f"free_dim must be in (0, {d}]")
            moduli = np.zeros(m)
            for k in ops:
                if np.any(k[m:, :m] != 0):
                    raise InvalidChannelError("bottom-left block must be exactly zero")
                top = k[:m, :m]
                if np.any(top - np.diag(np.diag(top)) != 0):
                    raise InvalidChannelError("top-left block must be exactly diagonal")
                moduli += np.abs(np.diag(top)) ** 2
            if np.max(np.abs(moduli - 1.0)) > BLOCK_MODULI_TOL:
                raise InvalidChannelError("sum_n |alpha_{i,n}|^2 != 1 on the free block")
        for k in ops:
            k.flags.writeable = False
        self.operators = ops
        self.dim = d
        self.free_dim = None if free_dim is None else int(free_dim)

    @property
    def rank(self) -> int:
        return len(self.operators)

    def completeness_defect(self) -> float:
        gram = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def blocks(self, n: int):
        """(alpha diag, T, L) partition of operator n; free_dim required."""
        if self.free_dim is None:
            raise InvalidChannelError("blocks() needs a channel with free_dim set")
        m = self.free_dim
        k = self.operators[n]
        return np.diag(k[:m, :m]).copy(), k[:m, m:].copy(), k[m:, m:].copy()

    def __repr__(self):
        return f"KrausChannel(dim={self.dim}, rank={self.rank}, free_dim={self.free_dim})"


def apply(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Sum_n K_n rho K_n^dag, re-Hermitized; trace drift beyond 1e-10 errors."""
    if channel.dim != rho.dim:
        raise DimensionError("channel and state dims differ")
    out = np.zeros_like(rho.matrix)
    for k in channel.operators:
        out = out + k @ rho.matrix @ k.conj().T
    out = (out + out.conj().T) / 2.0
    trace = float(np.real(np.trace(out)))
    if abs(trace - 1.0) > 1e-10:
        raise InvalidChannelError(f"output trace drifted by {abs(trace - 1.0):.3e}")
    return DensityMatrix(out / trace)


@dataclass(frozen=True)
class KrausOutcomes:
    """Measurement outcomes (p_j, sigma_j); near-zero-probability branches
    are dropped and counted in n_dropped."""

    pairs: tuple
    n_dropped: int

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @property
    def probabilities(self):
        return tuple(p for p, _ in self.pairs)


def kraus_outcomes(
    channel: KrausChannel, rho: DensityMatrix, min_probability: float = 1e-14
) -> KrausOutcomes:
    """Selective application: outcome states K_j rho K_j^dag / p_j."""
    if channel.dim != rho.dim:
        raise DimensionError("channel and state dims differ")
    pairs = []
    dropped = 0
    for k in channel.operators:
        raw = k @ rho.matrix @ k.conj().T
        raw = (raw + raw.conj().T) / 2.0
        p = float(np.real(np.trace(raw)))
        if p < min_probability:
            dropped += 1
            continue
        pairs.append((p, DensityMatrix(raw / p)))
    return KrausOutcomes(tuple(pairs), dropped)


def _crandn(rng: Rng, shape) -> np.ndarray:
    """Standard complex normal: N(0, 1/2) real and imaginary parts."""
    size = int(np.prod(shape))
    z = rng.standard_normal(2 * size).view(complex).reshape(shape)
    return z / np.sqrt(2.0)


def _inv_sqrt_psd(mat: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    vals = np.maximum(vals, floor)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def random_fixed_point_channel(
    dim: int, free_dim: int, kraus_rank: int = 3, rng: Rng | None = None
) -> KrausChannel:
    """Random trace-preserving channel fixing the first `free_dim` basis states.

    Nonzero blocks are drawn from the standard complex normal and the raw
    set is renormalized with a Schur-complement whitening so the result is
    exactly trace preserving while keeping the block-triangular form.
    Ill-conditioned draws (condition number above 1e12) are resampled, at
    most ten times.
    """
    if rng is None:
        raise ValueError("random_fixed_point_channel requires an rng")
    if dim < 2:
        raise DimensionError("channel dim must be >= 2")
    m = int(free_dim)
    if not 1 <= m <= dim:
        raise DimensionError(f"free_dim must be in [1, {dim}]")
    if kraus_rank < 1:
        raise InvalidChannelError("kraus_rank must be >= 1")
    p = dim - m

    for _ in range(10):
        raw = []
        for _n in range(kraus_rank):
            k = np.zeros((dim, dim), dtype=complex)
            k[:m, :m] = np.diag(_crandn(rng, (m,)))
            if p:
                k[:m, m:] = _crandn(rng, (m, p))
                k[m:, m:] = _crandn(rng, (p, p))
            raw.append(k)
        gram = sum(k.conj().T @ k for k in raw)
        m00_diag = np.real(np.diag(gram)[:m])
        if m00_diag.min() <= 0 or m00_diag.max() / m00_diag.min() > 1e12:
            continue
        x = np.zeros((dim, dim), dtype=complex)
        x[:m, :m] = np.diag(1.0 / np.sqrt(m00_diag))
        if p:
            m01 = gram[:m, m:]
            m11 = gram[m:, m:]
            schur = m11 - m01.conj().T @ ((1.0 / m00_diag)[:, None] * m01)
            schur = (schur + schur.conj().T) / 2.0
            svals = np.linalg.eigvalsh(schur)
            if svals.min() <= 0 or svals.max() / svals.min() > 1e12:
                continue
            s_inv_half = _inv_sqrt_psd(schur)
            x[:m, m:] = -(1.0 / m00_diag)[:, None] * (m01 @ s_inv_half)
            x[m:, m:] = s_inv_half
        ops = [k @ x for k in raw]
        try:
            return KrausChannel(ops, free_dim=m)
        except InvalidChannelError:
            continue
    raise InvalidChannelError("failed to draw a well-conditioned channel in 10 attempts")


def filter_channel(dim: int, a: float) -> KrausChannel:
    """Two-outcome diagonal filter that can boost texture with some
    probability; free state is the first basis ket."""
    if dim < 2:
        raise DimensionError("filter_channel needs dim >= 2")
    if not 0.5 <= a <= 1.0:
        raise InvalidStateError(f"filter parameter a must be in [1/2, 1], got {a}")
    leak = (1.0 - a) / (a * (dim - 1))
    d1 = np.ones(dim)
    d1[0] = np.sqrt(leak)
    d2 = np.zeros(dim)
    d2[0] = np.sqrt(max(1.0 - leak, 0.0))
    return KrausChannel([np.diag(d1).astype(complex), np.diag(d2).astype(complex)], free_dim=1)


def complete_dephasing(dim: int) -> KrausChannel:
    """Projects onto the diagonal; fixes every diagonal state."""
    if dim < 2:
        raise DimensionError("complete_dephasing needs dim >= 2")
    ops = []
    for i in range(dim):
        k = np.zeros((dim, dim), dtype=complex)
        k[i, i] = 1.0
        ops.append(k)
    return KrausChannel(ops, free_dim=dim)


def depolarize_to(tau: DensityMatrix) -> KrausChannel:
    """Constant map rho -> tau (system reset: measure any basis, reprepare).

    Kraus set sqrt(lambda_i) |v_i><j| over tau's spectral decomposition;
    any other realization of the same map would be equally valid.
    """
    vals, vecs = tau.eigensystem()
    ops = []
    for i in range(tau.dim):
        if vals[i] < 1e-15:
            continue
        for j in range(tau.dim):
            k = np.zeros((tau.dim, tau.dim), dtype=complex)
            k[:, j] = np.sqrt(vals[i]) * vecs[:, i]
            ops.append(k)
    return KrausChannel(ops)


def compose(outer: KrausChannel, inner: KrausChannel) -> KrausChannel:
    """Channel applying `inner` first, then `outer`."""
    if outer.dim != inner.dim:
        raise DimensionError("composed channels must share dim")
    ops = [ko @ ki for ko in outer.operators for ki in inner.operators]
    free_dim = outer.free_dim if outer.free_dim == inner.free_dim else None
    return KrausChannel(ops, free_dim=free_dim)


def channel_to_json(channel: KrausChannel) -> dict:
    """Serializable dict: operators as row-major [re, im] pairs."""
    return {
        "D": channel.dim,
        "m": channel.free_dim,
        "R": channel.rank,
        "operators": [
            [[float(entry.real), float(entry.imag)] for entry in op.reshape(-1)]
            for op in channel.operators
        ],
    }


def channel_from_json(data: dict) -> KrausChannel:
    d = int(data["D"])
    ops = []
    for flat in data["operators"]:
        if len(flat) != d * d:
            raise InvalidChannelError("operator entry count does not match D*D")
        arr = np.array([complex(re, im) for re, im in flat], dtype=complex).reshape(d, d)
        ops.append(arr)
    m = data.get("m")
    return KrausChannel(ops, free_dim=None if m is None else int(m))
