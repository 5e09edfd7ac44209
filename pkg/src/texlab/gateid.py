"""CNOT-vs-single-qubit gate identification from randomized identical inputs.

The protocol prepares identical Haar-random qubit pairs, pushes them through
an unknown single layer, and tracks the averaged overlap statistic
2<psi|rho|psi> of each output qubit for a chosen reference state psi and its
lab-Hadamard partner H psi. A single-qubit layer averages all four
statistics to exactly 1; a CNOT layer shifts them by basis-dependent
amounts, which both reveals the gate and constrains its basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import (
    DegenerateContinuumError,
    DimensionError,
    InvalidStateError,
    NoCandidatesError,
)
from .linalg import (
    HADAMARD,
    PureState,
    Rng,
    basis_ket,
    bloch_from_qubit,
    haar_random_pure_batch,
    rotation_gate,
)

__all__ = [
    "CnotBasis",
    "LayerSpec",
    "SigmaEstimates",
    "DetectionReport",
    "cnot_in_basis",
    "hadamard_partner",
    "closed_form_averages",
    "monte_carlo_protocol",
    "failure_family",
    "failure_basis",
    "failure_circle_distance",
    "detect_cnot",
    "reconstruct_basis_candidates",
]

CNOT_STANDARD = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

# Bloch axis fixed by the lab Hadamard; the failure family of reference
# states is the great circle orthogonal to it.
_HADAMARD_AXIS = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)


class CnotBasis:
    """Orthonormal qubit pair (c, c') defining a CNOT's control basis and
    target-flip operator. The relative phase of c' matters."""

    __slots__ = ("c", "c_prime")

    def __init__(self, c: PureState, c_prime: PureState):
        if c.dim != 2 or c_prime.dim != 2:
            raise DimensionError("CNOT basis states must be qubits")
        ov = abs(c.overlap(c_prime))
        if ov > 1e-12:
            raise InvalidStateError(f"basis states not orthogonal: |<c|c'>| = {ov:.3e}")
        self.c = c
        self.c_prime = c_prime

    @classmethod
    def computational(cls) -> "CnotBasis":
        return cls(basis_ket(2, 0), basis_ket(2, 1))

    @classmethod
    def from_state(cls, c: PureState, rel_phase: float = 0.0) -> "CnotBasis":
        """Basis from c and its orthogonal partner, with a chosen phase."""
        a, b = c.vector
        partner = np.exp(1j * rel_phase) * np.array([-np.conj(b), np.conj(a)])
        return cls(c, PureState(partner))

    @classmethod
    def random(cls, rng: Rng) -> "CnotBasis":
        vecs = haar_random_pure_batch(2, 1, rng)
        phase = float(rng.uniform(0.0, 2.0 * np.pi))
        return cls.from_state(PureState(vecs[0]), rel_phase=phase)

    def unitary(self) -> np.ndarray:
        """Column map |0> -> c, |1> -> c'."""
        return np.column_stack([self.c.vector, self.c_prime.vector])

    def __repr__(self):
        return f"CnotBasis(c={np.round(self.c.vector, 4)}, c'={np.round(self.c_prime.vector, 4)})"


@dataclass(frozen=True)
class LayerSpec:
    """Single circuit layer: either one shared single-qubit unitary or a
    CNOT in some basis."""

    kind: str
    unitary: np.ndarray | None = None
    basis: CnotBasis | None = None

    @classmethod
    def single(cls, unitary: np.ndarray) -> "LayerSpec":
        u = np.asarray(unitary, dtype=complex)
        if u.shape != (2, 2):
            raise DimensionError("single-qubit layer needs a 2x2 unitary")
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-12:
            raise InvalidStateError("layer matrix is not unitary")
        return cls("single", unitary=u)

    @classmethod
    def cnot(cls, basis: CnotBasis) -> "LayerSpec":
        return cls("cnot", basis=basis)


@dataclass(frozen=True)
class SigmaEstimates:
    """Averaged overlap statistics for (psi, H psi) on (control, target)."""

    sigma_c: float
    sigma_t: float
    sigma_c_h: float
    sigma_t_h: float
    std_err_c: float
    std_err_t: float
    std_err_c_h: float
    std_err_t_h: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidStateError("n_samples must be >= 1")
        if min(self.std_err_c, self.std_err_t, self.std_err_c_h, self.std_err_t_h) < 0:
            raise InvalidStateError("standard errors must be nonnegative")

    def values(self) -> np.ndarray:
        return np.array([self.sigma_c, self.sigma_t, self.sigma_c_h, self.sigma_t_h])

    def std_errs(self) -> np.ndarray:
        return np.array([self.std_err_c, self.std_err_t, self.std_err_c_h, self.std_err_t_h])

    def to_dict(self) -> dict:
        return {
            "sigma_c": self.sigma_c,
            "sigma_t": self.sigma_t,
            "sigma_c_h": self.sigma_c_h,
            "sigma_t_h": self.sigma_t_h,
            "std_err_c": self.std_err_c,
            "std_err_t": self.std_err_t,
            "std_err_c_h": self.std_err_c_h,
            "std_err_t_h": self.std_err_t_h,
            "n_samples": self.n_samples,
        }


@dataclass(frozen=True)
class DetectionReport:
    verdict: str  # "cnot_detected" | "single_qubit_consistent"
    z_scores: tuple[float, float, float, float]
    basis_candidates: tuple[CnotBasis, ...] = ()

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "z_scores": list(self.z_scores),
            "basis_candidates": [
                {
                    "c": [[v.real, v.imag] for v in b.c.vector],
                    "c_prime": [[v.real, v.imag] for v in b.c_prime.vector],
                }
                for b in self.basis_candidates
            ],
        }


def cnot_in_basis(basis: CnotBasis) -> np.ndarray:
    """4x4 CNOT with control states (c, c'), control qubit on the left."""
    v = basis.unitary()
    v2 = np.kron(v, v)
    return v2 @ CNOT_STANDARD @ v2.conj().T


def hadamard_partner(psi: PureState) -> PureState:
    """H psi with the Hadamard fixed in the lab (computational) basis."""
    return PureState(HADAMARD @ psi.vector)


def closed_form_averages(psi: PureState, basis: CnotBasis) -> SigmaEstimates:
    """Exact averages of the four statistics for a CNOT layer.

    Control: 1 + (2/3) Re <psi|c><c'|psi>; target: (2/3)(1 + |<psi|c>|^2),
    and the same with H psi. Standard errors are zero.
    """
    if psi.dim != 2:
        raise DimensionError("closed_form_averages needs a qubit reference state")
    psi_h = hadamard_partner(psi)

    def pair(ref: PureState) -> tuple[float, float]:
        ip_c = np.vdot(ref.vector, basis.c.vector)
        ip_cp = np.vdot(basis.c_prime.vector, ref.vector)
        ctrl = 1.0 + (2.0 / 3.0) * float(np.real(ip_c * ip_cp))
        tgt = (2.0 / 3.0) * (1.0 + float(abs(ip_c) ** 2))
        return ctrl, tgt

    sc, st = pair(psi)
    sch, sth = pair(psi_h)
    return SigmaEstimates(sc, st, sch, sth, 0.0, 0.0, 0.0, 0.0, 1)


def monte_carlo_protocol(
    layer: LayerSpec,
    psi: PureState,
    n_samples: int,
    rng: Rng,
    batch_size: int = 1 << 15,
) -> SigmaEstimates:
    """Estimate the four averaged statistics from identical Haar-random inputs.

    CNOT layers act on |chi> x |chi| and each output qubit is reduced by a
    partial trace before the overlap statistic is taken; single-qubit layers
    apply the same unitary to every qubit, so the control and target slots
    carry identical statistics.
    """
    if psi.dim != 2:
        raise DimensionError("reference state must be a qubit")
    if n_samples < 1000:
        raise InvalidStateError("n_samples must be at least 1000")
    psi_v = psi.vector
    psih_v = hadamard_partner(psi).vector

    sums = np.zeros(4)
    sumsq = np.zeros(4)
    done = 0
    if layer.kind == "cnot":
        u4 = cnot_in_basis(layer.basis)
    while done < n_samples:
        b = min(batch_size, n_samples - done)
        chi = haar_random_pure_batch(2, b, rng)
        if layer.kind == "cnot":
            pair_in = (chi[:, :, None] * chi[:, None, :]).reshape(b, 4)
            out = pair_in @ u4.T
            o = out.reshape(b, 2, 2)  # [sample, control, target]
            rho_c = np.einsum("bct,bdt->bcd", o, o.conj())
            rho_t = np.einsum("bct,bcs->bts", o, o.conj())
            vals = np.empty((4, b))
            vals[0] = 2.0 * np.real(np.einsum("i,bij,j->b", psi_v.conj(), rho_c, psi_v))
            vals[1] = 2.0 * np.real(np.einsum("i,bij,j->b", psi_v.conj(), rho_t, psi_v))
            vals[2] = 2.0 * np.real(np.einsum("i,bij,j->b", psih_v.conj(), rho_c, psih_v))
            vals[3] = 2.0 * np.real(np.einsum("i,bij,j->b", psih_v.conj(), rho_t, psih_v))
        else:
            out = chi @ layer.unitary.T
            s_psi = 2.0 * np.abs(out @ psi_v.conj()) ** 2
            s_psih = 2.0 * np.abs(out @ psih_v.conj()) ** 2
            vals = np.stack([s_psi, s_psi, s_psih, s_psih])
        sums += vals.sum(axis=1)
        sumsq += (vals**2).sum(axis=1)
        done += b

    means = sums / n_samples
    var = np.maximum(sumsq - n_samples * means**2, 0.0) / (n_samples - 1)
    errs = np.sqrt(var / n_samples)
    return SigmaEstimates(*means, *errs, n_samples)


def failure_family(mu: float, nu2: float, basis: CnotBasis) -> tuple[PureState, PureState]:
    """Reference states blind to a CNOT: U psi_plus and U psi_minus, where
    psi_pm = (c +- i c')/sqrt(2) and U = e^{i mu} R_y(pi/4) R_z(nu2).

    The pair satisfies H (U psi_minus) = U psi_plus (lab Hadamard) whenever
    the seeding basis commutes with sigma_z up to phase, in particular for
    the computational basis. The CNOT basis these states cannot detect is
    the transformed one returned by :func:`failure_basis`.
    """
    u = np.exp(1j * mu) * (rotation_gate("y", np.pi / 4.0) @ rotation_gate("z", nu2))
    plus = (basis.c.vector + 1j * basis.c_prime.vector) / np.sqrt(2.0)
    minus = (basis.c.vector - 1j * basis.c_prime.vector) / np.sqrt(2.0)
    return PureState.normalized(u @ plus), PureState.normalized(u @ minus)


def failure_basis(mu: float, nu2: float, basis: CnotBasis) -> CnotBasis:
    """The CNOT basis that the matching failure_family states cannot see:
    the input basis carried through the same rotation."""
    u = np.exp(1j * mu) * (rotation_gate("y", np.pi / 4.0) @ rotation_gate("z", nu2))
    return CnotBasis(
        PureState.normalized(u @ basis.c.vector),
        PureState.normalized(u @ basis.c_prime.vector),
    )


def failure_circle_distance(psi: PureState) -> float:
    """Bloch angle from psi to the great circle of failure states
    (the circle orthogonal to the lab-Hadamard axis)."""
    n = bloch_from_qubit(psi.density()).as_array()
    n = n / np.linalg.norm(n)
    return float(abs(np.pi / 2.0 - np.arccos(np.clip(n @ _HADAMARD_AXIS, -1.0, 1.0))))


def detect_cnot(
    est: SigmaEstimates,
    z_threshold: float = 5.0,
    psi: PureState | None = None,
) -> DetectionReport:
    """Flag a CNOT when any statistic deviates from 1 beyond z_threshold.

    Analytic inputs (zero standard error) fall back to an exact comparison
    at 1e-9. When a CNOT is flagged and psi is supplied, basis candidates
    are reconstructed; reconstruction failures leave the list empty.
    """
    values = est.values()
    errs = est.std_errs()
    z = np.zeros(4)
    for k in range(4):
        if errs[k] > 0.0:
            z[k] = (values[k] - 1.0) / errs[k]
        else:
            z[k] = math.inf if abs(values[k] - 1.0) > 1e-9 else 0.0
    detected = bool(np.max(np.abs(z)) > z_threshold)
    candidates: tuple[CnotBasis, ...] = ()
    if detected and psi is not None:
        try:
            candidates = tuple(reconstruct_basis_candidates(est, psi))
        except NoCandidatesError:
            candidates = ()
    return DetectionReport(
        verdict="cnot_detected" if detected else "single_qubit_consistent",
        z_scores=tuple(float(v) for v in z),
        basis_candidates=candidates,
    )


def _candidate_states(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """c and its zero-phase partner for arrays of sphere angles."""
    half = theta / 2.0
    c = np.stack([np.cos(half), np.exp(1j * phi) * np.sin(half)], axis=-1)
    c0p = np.stack([-np.exp(-1j * phi) * np.sin(half), np.cos(half) + 0j], axis=-1)
    return c, c0p


def _basis_from_angles(theta: float, phi: float, gamma: float) -> CnotBasis:
    c, c0p = _candidate_states(np.array(theta), np.array(phi))
    return CnotBasis(PureState.normalized(c), PureState.normalized(np.exp(1j * gamma) * c0p))


def reconstruct_basis_candidates(
    est: SigmaEstimates,
    psi: PureState,
    grid_points: int = 10_000,
    phase_points: int = 64,
) -> list[CnotBasis]:
    """Invert the four averaged statistics to candidate CNOT bases.

    Targets |<psi|c>|^2 = (3/2) sigma_t - 1 (and its H partner) together
    with the two Re constraints are matched over a Fibonacci grid on the
    Bloch sphere times a relative-phase grid, then polished with
    Nelder-Mead. Candidates must satisfy every constraint within 3 standard
    errors (floored at 1e-6, the local-polish resolution, for analytic
    inputs). An empty intersection raises NoCandidatesError; a continuum of
    surviving solutions (as for failure-family references) raises
    DegenerateContinuumError.
    """
    values = est.values()
    errs = np.maximum(est.std_errs(), 1e-6)
    # targets: A = |<psi|c>|^2, B = Re<psi|c><c'|psi>, then the H partners
    targets = np.array(
        [
            1.5 * values[1] - 1.0,
            1.5 * (values[0] - 1.0),
            1.5 * values[3] - 1.0,
            1.5 * (values[2] - 1.0),
        ]
    )
    sigmas = 1.5 * np.array([errs[1], errs[0], errs[3], errs[2]])

    psi_v = psi.vector
    psih_v = hadamard_partner(psi).vector

    def residual_terms(c, c0p, gamma):
        """Squared z-scores of the four constraints; broadcasts gamma."""
        ip_c = c @ psi_v.conj()
        ip_c_h = c @ psih_v.conj()
        ip_p0 = c0p.conj() @ psi_v
        ip_p0_h = c0p.conj() @ psih_v
        phase = np.exp(-1j * np.asarray(gamma))
        pa = np.abs(ip_c) ** 2
        pah = np.abs(ip_c_h) ** 2
        pb = np.real(ip_c[..., None] * ip_p0[..., None] * phase)
        pbh = np.real(ip_c_h[..., None] * ip_p0_h[..., None] * phase)
        za = (pa[..., None] - targets[0]) / sigmas[0]
        zb = (pb - targets[1]) / sigmas[1]
        zah = (pah[..., None] - targets[2]) / sigmas[2]
        zbh = (pbh - targets[3]) / sigmas[3]
        return za**2 + zb**2 + zah**2 + zbh**2

    i = np.arange(grid_points)
    z_coord = 1.0 - 2.0 * (i + 0.5) / grid_points
    theta = np.arccos(z_coord)
    phi = np.mod(i * np.pi * (3.0 - np.sqrt(5.0)), 2.0 * np.pi)
    gammas = np.linspace(0.0, 2.0 * np.pi, phase_points, endpoint=False)
    c, c0p = _candidate_states(theta, phi)
    res = residual_terms(c, c0p, gammas)  # (grid, phase)

    flat = res.reshape(-1)
    order = np.argsort(flat)
    starts = []
    for idx in order[: 40 * phase_points]:
        gi, pi_ = divmod(int(idx), phase_points)
        point = np.array([theta[gi], phi[gi], gammas[pi_]])
        if any(_angle_distance(point, s) < 0.35 for s in starts):
            continue
        starts.append(point)
        if len(starts) >= 24:
            break

    def scalar_residual(x):
        cc, cp = _candidate_states(np.array(x[0]), np.array(x[1]))
        return float(residual_terms(cc[None, :], cp[None, :], [x[2]])[0, 0])

    accepted = []
    for start in starts:
        opt = minimize(
            scalar_residual,
            start,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-14, "maxiter": 600},
        )
        th, ph, ga = opt.x
        cc, cp = _candidate_states(np.array(th), np.array(ph))
        terms = residual_terms(cc[None, :], cp[None, :], [ga])[0, 0]
        # componentwise 3-sigma acceptance
        comp = _component_scores(cc, cp, ga, psi_v, psih_v, targets, sigmas)
        if np.all(np.abs(comp) <= 3.0) and np.isfinite(terms):
            accepted.append((float(terms), float(th), float(ph), float(ga)))

    if not accepted:
        raise NoCandidatesError("no basis satisfies the four constraints at 3 sigma")

    unique: list[tuple[float, CnotBasis, np.ndarray]] = []
    for score, th, ph, ga in sorted(accepted):
        cand = _basis_from_angles(th, ph, ga)
        mat = cnot_in_basis(cand)
        if any(np.max(np.abs(mat - m)) < 1e-2 for _, _, m in unique):
            continue
        unique.append((score, cand, mat))

    if len(unique) > 8:
        raise DegenerateContinuumError(
            "constraints admit a continuum of bases (failure-family reference)"
        )
    return [cand for _, cand, _ in unique[:4]]


def _component_scores(c, c0p, gamma, psi_v, psih_v, targets, sigmas) -> np.ndarray:
    ip_c = c @ psi_v.conj()
    ip_c_h = c @ psih_v.conj()
    ip_p = np.exp(-1j * gamma) * (c0p.conj() @ psi_v)
    ip_p_h = np.exp(-1j * gamma) * (c0p.conj() @ psih_v)
    preds = np.array(
        [
            abs(ip_c) ** 2,
            float(np.real(ip_c * ip_p)),
            abs(ip_c_h) ** 2,
            float(np.real(ip_c_h * ip_p_h)),
        ]
    )
    return (preds - targets) / sigmas


def _angle_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Distance in (theta, phi, gamma) space with circular wrapping."""
    sphere = np.arccos(
        np.clip(
            np.cos(p[0]) * np.cos(q[0]) + np.sin(p[0]) * np.sin(q[0]) * np.cos(p[1] - q[1]),
            -1.0,
            1.0,
        )
    )
    dg = abs((p[2] - q[2] + np.pi) % (2.0 * np.pi) - np.pi)
    return float(sphere + 0.5 * dg)
