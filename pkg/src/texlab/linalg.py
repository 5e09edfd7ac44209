"""Dense complex linear algebra core: state types, sampling, fidelity.

Tensor-ordering convention for two-qubit states: the control qubit is the
left (most significant) factor, i.e. index = 2*control + target. Every
operation in the package relies on this ordering.

Bloch convention: rho = (I + n_x sx + n_y sy + n_z sz) / 2, so |0><0| maps
to (0, 0, 1) and (|0> + i|1>)/sqrt(2) maps to (0, 1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidStateError

__all__ = [
    "PureState",
    "DensityMatrix",
    "BlochVector",
    "Rng",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HADAMARD",
    "basis_ket",
    "uniform_superposition",
    "haar_random_pure",
    "haar_random_pure_batch",
    "haar_random_unitary",
    "random_density_matrix",
    "fidelity",
    "sqrt_fidelity",
    "partial_trace",
    "bloch_from_qubit",
    "qubit_from_bloch",
    "rotation_gate",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
PSD_FLOOR = -1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


class Rng:
    """Seeded random stream (PCG64). Identical seed, identical samples.

    One Rng per worker: parallel work derives independent streams with
    :meth:`child` instead of sharing a generator.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def child(self, index: int) -> "Rng":
        """Derive a reproducible, independent stream for worker `index`."""
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(int(index),))
        return Rng(int(seq.generate_state(1, dtype=np.uint64)[0]))

    def __getattr__(self, name):
        return getattr(self.generator, name)

    def __repr__(self):
        return f"Rng(seed={self.seed})"


class PureState:
    """Normalized complex amplitude vector of dimension >= 2."""

    __slots__ = ("vector", "dim")

    def __init__(self, amplitudes):
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if vec.size < 2:
            raise DimensionError(f"pure state needs dim >= 2, got {vec.size}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        vec = vec.copy()
        vec.flags.writeable = False
        self.vector = vec
        self.dim = vec.size

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        """Normalize an arbitrary nonzero vector into a PureState."""
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm < 1e-150:
            raise InvalidStateError("cannot normalize the zero vector")
        return cls(vec / norm)

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if self.dim != other.dim:
            raise DimensionError("overlap of states with different dims")
        return complex(np.vdot(self.vector, other.vector))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vector, self.vector.conj()))

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class DensityMatrix:
    """Hermitian, unit-trace, PSD (up to a -1e-10 eigenvalue floor) matrix."""

    __slots__ = ("matrix", "dim")

    def __init__(self, entries):
        mat = np.asarray(entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise DimensionError("density matrix needs dim >= 2")
        herm_defect = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_defect > HERMITICITY_TOL:
            raise InvalidStateError(f"not Hermitian: max|rho - rho^dag| = {herm_defect:.3e}")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace != 1: |tr - 1| = {abs(trace - 1.0):.3e}")
        eigs = np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)
        if eigs[0] < PSD_FLOOR:
            raise InvalidStateError(f"negative eigenvalue beyond floor: {eigs[0]:.3e}")
        mat = mat.copy()
        mat.flags.writeable = False
        self.matrix = mat
        self.dim = mat.shape[0]

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return psi.density()

    def expectation(self, psi: PureState) -> float:
        """Quadratic form <psi|rho|psi> (real, clipped at 0)."""
        if psi.dim != self.dim:
            raise DimensionError("expectation with mismatched dims")
        val = float(np.real(np.vdot(psi.vector, self.matrix @ psi.vector)))
        return max(val, 0.0)

    def eigensystem(self):
        """Ascending eigenvalues and matching eigenvector columns."""
        vals, vecs = np.linalg.eigh(self.matrix)
        return vals, vecs

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


@dataclass(frozen=True)
class BlochVector:
    """Real three-vector inside the unit ball; unit length iff pure."""

    n_x: float
    n_y: float
    n_z: float

    def __post_init__(self):
        if self.norm() > 1.0 + 1e-12:
            raise InvalidStateError(f"Bloch vector outside unit ball: |n| = {self.norm():.12f}")

    def norm(self) -> float:
        return float(np.sqrt(self.n_x**2 + self.n_y**2 + self.n_z**2))

    def as_array(self) -> np.ndarray:
        return np.array([self.n_x, self.n_y, self.n_z])


def basis_ket(dim: int, index: int) -> PureState:
    """Computational basis state |index> (0-based) in dimension `dim`."""
    if not 0 <= index < dim:
        raise DimensionError(f"basis index {index} out of range for dim {dim}")
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return PureState(vec)


def uniform_superposition(dim: int) -> PureState:
    """The textureless reference: equal real amplitudes 1/sqrt(dim)."""
    return PureState(np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))


def haar_random_pure(dim: int, rng: Rng) -> PureState:
    """Haar-random pure state: normalized vector of 2*dim standard normals."""
    if dim < 2:
        raise DimensionError(f"haar_random_pure needs dim >= 2, got {dim}")
    while True:
        z = rng.standard_normal(2 * dim).view(complex)
        norm = np.linalg.norm(z)
        if norm > 1e-12:
            return PureState(z / norm)


def haar_random_pure_batch(dim: int, n: int, rng: Rng) -> np.ndarray:
    """(n, dim) array of Haar-random state vectors; internal fast path."""
    if dim < 2:
        raise DimensionError(f"haar_random_pure_batch needs dim >= 2, got {dim}")
    z = rng.standard_normal((n, 2 * dim)).view(complex)
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    # Zero draws have probability 0; guard anyway.
    bad = norms[:, 0] <= 1e-12
    while np.any(bad):
        z[bad] = rng.standard_normal((int(bad.sum()), 2 * dim)).view(complex)
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        bad = norms[:, 0] <= 1e-12
    return z / norms


def haar_random_unitary(dim: int, rng: Rng) -> np.ndarray:
    """Haar-random unitary: QR of a complex Gaussian matrix with the R
    diagonal phased to be real positive."""
    if dim < 2:
        raise DimensionError("haar_random_unitary needs dim >= 2")
    z = rng.standard_normal((dim, 2 * dim)).view(complex)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))[None, :]


def random_density_matrix(dim: int, rng: Rng, rank: int | None = None) -> DensityMatrix:
    """Random mixed state G G^dag / tr(G G^dag) with G complex Gaussian."""
    if dim < 2:
        raise DimensionError("random_density_matrix needs dim >= 2")
    r = dim if rank is None else int(rank)
    if not 1 <= r <= dim:
        raise DimensionError(f"rank must be in [1, {dim}]")
    g = rng.standard_normal((dim, 2 * r)).view(complex)
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix((mat + mat.conj().T) / 2.0)


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues below 1e-12 clamp to 0."""
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2.0)
    vals = np.where(vals < 1e-12, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def sqrt_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    if rho.dim != sigma.dim:
        raise DimensionError("fidelity of states with different dims")
    s = _sqrtm_psd(rho.matrix)
    inner = s @ sigma.matrix @ s
    vals = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    # same 1e-12 clamp as the square roots: rank-deficiency noise would
    # otherwise contribute sqrt(eps) per spurious mode
    vals = np.where(vals < 1e-12, 0.0, vals)
    return min(float(np.sum(np.sqrt(vals))), 1.0)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    return sqrt_fidelity(rho, sigma) ** 2


def partial_trace(rho_ab: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduce a two-qubit state (control x target ordering) to one qubit.

    keep="control" traces out the target qubit; keep="target" the control.
    Only dim 4 is supported.
    """
    if rho_ab.dim != 4:
        raise DimensionError("partial_trace supports two-qubit (dim 4) states only")
    r = rho_ab.matrix.reshape(2, 2, 2, 2)  # [ctrl, tgt, ctrl', tgt']
    if keep == "control":
        red = np.einsum("itjt->ij", r)
    elif keep == "target":
        red = np.einsum("ctcs->ts", r)
    else:
        raise ValueError(f"keep must be 'control' or 'target', got {keep!r}")
    red = (red + red.conj().T) / 2.0
    return DensityMatrix(red / np.trace(red).real)


def bloch_from_qubit(rho: DensityMatrix) -> BlochVector:
    """Pauli expectation values of a qubit state."""
    if rho.dim != 2:
        raise DimensionError("bloch_from_qubit needs dim 2")
    m = rho.matrix
    n_x = float(np.real(m[0, 1] + m[1, 0]))
    n_y = float(np.imag(m[1, 0] - m[0, 1]))
    n_z = float(np.real(m[0, 0] - m[1, 1]))
    return BlochVector(n_x, n_y, n_z)


def qubit_from_bloch(b: BlochVector) -> DensityMatrix:
    """Inverse of :func:`bloch_from_qubit`."""
    m = 0.5 * (np.eye(2, dtype=complex) + b.n_x * PAULI_X + b.n_y * PAULI_Y + b.n_z * PAULI_Z)
    return DensityMatrix(m)


def rotation_gate(axis: str, angle: float) -> np.ndarray:
    """Spinor rotation I cos(angle/2) - i sigma_axis sin(angle/2)."""
    if not np.isfinite(angle):
        raise ValueError("rotation angle must be finite")
    if axis == "y":
        sigma = PAULI_Y
    elif axis == "z":
        sigma = PAULI_Z
    elif axis == "x":
        sigma = PAULI_X
    else:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    half = 0.5 * float(angle)
    return np.cos(half) * np.eye(2, dtype=complex) - 1j * np.sin(half) * sigma
