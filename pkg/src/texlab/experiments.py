"""End-to-end reproductions: strong-monotonicity violations, random-walk
weak-monotonicity studies, and gate-identification sweeps."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .channels import (
    KrausChannel,
    apply,
    filter_channel,
    kraus_outcomes,
    random_fixed_point_channel,
)
from .de import OptimizerConfig
from .errors import DimensionError, InvalidStateError, TexlabError
from .gateid import (
    CnotBasis,
    LayerSpec,
    detect_cnot,
    failure_basis,
    failure_circle_distance,
    failure_family,
    monte_carlo_protocol,
)
from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    PureState,
    Rng,
    basis_ket,
    bloch_from_qubit,
    haar_random_pure,
    rotation_gate,
)
from .measures import FreeSet, rugosity_single
from .roof import RoofTrials, repeated_convex_roof

__all__ = [
    "ViolationReport",
    "WalkRecord",
    "violation_state",
    "strong_monotonicity_check",
    "default_violation_family",
    "random_walk_experiment",
    "walk_records_to_csv",
    "gate_id_sweep",
    "sweep_rows_to_csv",
    "detection_rate",
]


def violation_state(dim: int, a: float) -> PureState:
    """sqrt(a)|1> + sqrt((1-a)/(D-1)) sum_{k>=2} |k>, texture -ln(a) against
    the free state |1> (index 0)."""
    if dim < 2:
        raise DimensionError("violation_state needs dim >= 2")
    if not 0.5 <= a <= 1.0:
        raise InvalidStateError("parameter a must be in [1/2, 1]")
    vec = np.full(dim, np.sqrt((1.0 - a) / (dim - 1)), dtype=complex)
    vec[0] = np.sqrt(a)
    return PureState.normalized(vec)


@dataclass(frozen=True)
class ViolationReport:
    """Both evaluation routes of the strong-monotonicity inequality for the
    two-outcome filter: closed form and explicit channel outcomes."""

    d: int
    a: float
    lhs: float  # -ln a
    rhs: float  # p1 ln D
    violation_metric: float  # a * D^(D(1-a)/(D-1))
    violated: bool
    p1: float
    outcome_rugosities: tuple[float, ...]
    lhs_numeric: float
    rhs_numeric: float
    route_gap: float

    def to_dict(self) -> dict:
        return {
            "D": self.d,
            "a": self.a,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violation_metric": self.violation_metric,
            "violated": self.violated,
            "p1": self.p1,
            "outcome_rugosities": list(self.outcome_rugosities),
            "lhs_numeric": self.lhs_numeric,
            "rhs_numeric": self.rhs_numeric,
            "route_gap": self.route_gap,
        }


def strong_monotonicity_check(d: int, a: float) -> ViolationReport:
    """Test the averaged-outcome inequality on the filter channel.

    The input state has texture -ln(a); the filter's first outcome is the
    uniform superposition (texture ln D) with probability D(1-a)/(D-1), the
    second is the free state itself. Averaged outcomes beat the input
    exactly when a * D^(D(1-a)/(D-1)) > 1.
    """
    channel = filter_channel(d, a)
    tau = violation_state(d, a)
    free_state = basis_ket(d, 0)

    rho = tau.density()
    lhs_numeric = float(rugosity_single(free_state, rho).value)
    outcomes = kraus_outcomes(channel, rho)
    rugs = []
    rhs_numeric = 0.0
    for p, sigma in outcomes:
        r = float(rugosity_single(free_state, sigma).value)
        rugs.append(r)
        rhs_numeric += p * r

    lhs = -math.log(a)
    p1 = d * (1.0 - a) / (d - 1)
    rhs = p1 * math.log(d)
    metric = a * d ** (d * (1.0 - a) / (d - 1))

    route_gap = max(abs(lhs - lhs_numeric), abs(rhs - rhs_numeric))
    if route_gap > 1e-6:
        raise TexlabError(f"closed-form and channel routes disagree by {route_gap:.3e}")
    violated = metric > 1.0
    if violated != (rhs > lhs) and abs(metric - 1.0) > 1e-12:
        raise TexlabError("violation criteria disagree away from the boundary")
    return ViolationReport(
        d=d,
        a=float(a),
        lhs=lhs,
        rhs=rhs,
        violation_metric=metric,
        violated=violated,
        p1=p1,
        outcome_rugosities=tuple(rugs),
        lhs_numeric=lhs_numeric,
        rhs_numeric=rhs_numeric,
        route_gap=route_gap,
    )


def default_violation_family(dims=(2, 3, 10)) -> list[ViolationReport]:
    """The a(D) = 1 - 1/(2D) family; violates for every checked dimension."""
    return [strong_monotonicity_check(d, 1.0 - 1.0 / (2 * d)) for d in dims]


@dataclass(frozen=True)
class WalkRecord:
    iteration: int
    state: DensityMatrix
    measure_mode: float
    quantile_low: float
    quantile_high: float
    free_dim: int
    trials: RoofTrials


def random_walk_experiment(
    dim: int = 4,
    free_dim: int = 1,
    kraus_rank: int = 3,
    n_rounds: int = 4,
    n_trials: int = 30,
    k: int = 16,
    config: OptimizerConfig | None = None,
    rng: Rng | None = None,
    channels: list[KrausChannel] | None = None,
) -> list[WalkRecord]:
    """Walk the maximally resourceful state through random free operations.

    One channel sequence drives the whole experiment (shared across
    optimizer trials). The roof measure of each iterate is estimated
    n_trials times with independent seeds; records carry the mode and the
    [0.05, 0.95] quantiles. Iteration 0 is recorded even when its measure is
    infinite (state orthogonal to the free set).

    Passing serialized channels back in replays the identical walk.
    """
    if rng is None:
        raise ValueError("random_walk_experiment requires an rng")
    if not 1 <= free_dim <= dim:
        raise DimensionError("free_dim must be in [1, dim]")
    config = config or OptimizerConfig()
    if channels is None:
        gen = rng.child(0)
        channels = [
            random_fixed_point_channel(dim, free_dim, kraus_rank, gen) for _ in range(n_rounds)
        ]
    else:
        if len(channels) < n_rounds:
            raise InvalidStateError("not enough channels supplied for the requested rounds")
        channels = list(channels[:n_rounds])
        for ch in channels:
            if ch.dim != dim:
                raise DimensionError("supplied channel dimension mismatch")

    free = FreeSet.orthogonal_pure([basis_ket(dim, i) for i in range(free_dim)])
    rho = basis_ket(dim, dim - 1).density()

    records = []
    for i in range(n_rounds + 1):
        if i > 0:
            rho = apply(channels[i - 1], rho)
        trial_rng = rng.child(1 + i)
        trials = repeated_convex_roof(free, rho, k, config, trial_rng, n_trials)
        records.append(
            WalkRecord(
                iteration=i,
                state=rho,
                measure_mode=trials.mode,
                quantile_low=trials.quantile_low,
                quantile_high=trials.quantile_high,
                free_dim=free_dim,
                trials=trials,
            )
        )
    return records


def _csv_float(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return repr(float(v))


def walk_records_to_csv(records: list[WalkRecord]) -> str:
    out = io.StringIO()
    out.write("Iteration,Measure,Measure_Low,Measure_High\n")
    for rec in records:
        out.write(
            f"{rec.iteration},{_csv_float(rec.measure_mode)},"
            f"{_csv_float(rec.quantile_low)},{_csv_float(rec.quantile_high)}\n"
        )
    return out.getvalue()


def _perturb_off_circle(psi: PureState, delta: float) -> PureState:
    """Rotate psi by `delta` radians toward the Hadamard axis, i.e. straight
    off the failure circle."""
    if delta == 0.0:
        return psi
    n = bloch_from_qubit(psi.density()).as_array()
    h_axis = np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    axis = np.cross(n, h_axis)
    norm = np.linalg.norm(axis)
    if norm < 1e-12:
        raise InvalidStateError("state already on the Hadamard axis")
    axis /= norm
    sigma = axis[0] * PAULI_X + axis[1] * PAULI_Y + axis[2] * PAULI_Z
    gate = math.cos(delta / 2.0) * np.eye(2) - 1j * math.sin(delta / 2.0) * sigma
    return PureState.normalized(gate @ psi.vector)


def gate_id_sweep(
    n_bases: int,
    n_psi: int,
    n_samples: int,
    rng: Rng | None = None,
    z_threshold: float = 5.0,
    failure_offsets=(0.0, 0.1, 0.2, 0.3, 0.5),
) -> list[dict]:
    """Detection-rate study across random and deliberately pathological
    configurations.

    Families: random CNOT bases with random references, CNOT bases matched
    to failure-circle references displaced by the given Bloch offsets, and
    single-qubit layers (false-positive control). Each row records the
    Bloch distance of the reference from the failure circle and the
    detection verdict.
    """
    if rng is None:
        raise ValueError("gate_id_sweep requires an rng")
    if n_bases < 1 or n_psi < 1 or n_samples < 1000:
        raise InvalidStateError("counts must be positive and n_samples >= 1000")
    rows = []
    comp = CnotBasis.computational()

    stream = 0
    for b in range(n_bases):
        basis = CnotBasis.random(rng.child(stream))
        stream += 1
        layer = LayerSpec.cnot(basis)
        for j in range(n_psi):
            r = rng.child(stream)
            stream += 1
            psi = haar_random_pure(2, r)
            est = monte_carlo_protocol(layer, psi, n_samples, r)
            rep = detect_cnot(est, z_threshold)
            rows.append(
                {
                    "case": "cnot_random",
                    "basis_index": b,
                    "psi_index": j,
                    "distance_rad": failure_circle_distance(psi),
                    "max_abs_z": float(np.max(np.abs(rep.z_scores))),
                    "verdict": rep.verdict,
                    "detected": int(rep.verdict == "cnot_detected"),
                    "n_samples": n_samples,
                }
            )

    for b in range(n_bases):
        r = rng.child(stream)
        stream += 1
        nu2 = float(r.uniform(0.0, 2.0 * np.pi))
        mu = float(r.uniform(0.0, 2.0 * np.pi))
        psi_on, _ = failure_family(mu, nu2, comp)
        target = failure_basis(mu, nu2, comp)
        layer = LayerSpec.cnot(target)
        for delta in failure_offsets:
            psi = _perturb_off_circle(psi_on, float(delta))
            est = monte_carlo_protocol(layer, psi, n_samples, r)
            rep = detect_cnot(est, z_threshold)
            rows.append(
                {
                    "case": "cnot_failure_offset",
                    "basis_index": b,
                    "psi_index": -1,
                    "distance_rad": failure_circle_distance(psi),
                    "max_abs_z": float(np.max(np.abs(rep.z_scores))),
                    "verdict": rep.verdict,
                    "detected": int(rep.verdict == "cnot_detected"),
                    "n_samples": n_samples,
                }
            )

    for b in range(n_bases):
        for j in range(n_psi):
            r = rng.child(stream)
            stream += 1
            theta = float(r.uniform(0.0, 2.0 * np.pi))
            axis = ["x", "y", "z"][int(r.integers(0, 3))]
            layer = LayerSpec.single(rotation_gate(axis, theta))
            psi = haar_random_pure(2, r)
            est = monte_carlo_protocol(layer, psi, n_samples, r)
            rep = detect_cnot(est, z_threshold)
            rows.append(
                {
                    "case": "single_qubit",
                    "basis_index": b,
                    "psi_index": j,
                    "distance_rad": failure_circle_distance(psi),
                    "max_abs_z": float(np.max(np.abs(rep.z_scores))),
                    "verdict": rep.verdict,
                    "detected": int(rep.verdict == "cnot_detected"),
                    "n_samples": n_samples,
                }
            )
    return rows


def sweep_rows_to_csv(rows: list[dict]) -> str:
    cols = [
        "case",
        "basis_index",
        "psi_index",
        "distance_rad",
        "max_abs_z",
        "verdict",
        "detected",
        "n_samples",
    ]
    out = io.StringIO()
    out.write(",".join(cols) + "\n")
    for row in rows:
        parts = []
        for c in cols:
            v = row[c]
            parts.append(_csv_float(v) if isinstance(v, float) else str(v))
        out.write(",".join(parts) + "\n")
    return out.getvalue()


def detection_rate(rows: list[dict], case: str, min_distance: float = 0.0) -> float:
    """Fraction detected among rows of one case family at or beyond the
    given failure-circle distance."""
    hits = [r["detected"] for r in rows if r["case"] == case and r["distance_rad"] >= min_distance]
    if not hits:
        return math.nan
    return float(np.mean(hits))
