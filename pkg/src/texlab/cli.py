"""Command-line entry point: gate-id, roof, monotonicity, violation.

Every run with --out also writes <out>.manifest.json carrying the version,
seed, and full flag set needed to replay it. Outputs are byte-identical for
identical configs and seeds; only the manifest records wall time.

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .channels import channel_to_json
from .de import OptimizerConfig
from .errors import TexlabError
from .experiments import (
    default_violation_family,
    random_walk_experiment,
    strong_monotonicity_check,
    walk_records_to_csv,
)
from .gateid import CnotBasis, LayerSpec, detect_cnot, monte_carlo_protocol
from .linalg import (
    DensityMatrix,
    PureState,
    Rng,
    basis_ket,
    haar_random_pure,
    haar_random_unitary,
    uniform_superposition,
)
from .measures import FreeSet
from .roof import convex_roof, repeated_convex_roof, roof_result_to_dict

__all__ = ["main"]


class UsageError(Exception):
    pass


def _json_ready(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def _dump_json(obj) -> str:
    def convert(o):
        if isinstance(o, dict):
            return {k: convert(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [convert(v) for v in o]
        return _json_ready(o)

    return json.dumps(convert(obj), indent=2, sort_keys=True) + "\n"


def _write_output(text: str, out_path: str | None):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _write_manifest(args: argparse.Namespace, wall_time: float):
    if args.out is None:
        return
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "version": __version__,
        "config": config,
        "seed": args.seed,
        "wall_time_s": wall_time,
    }
    with open(args.out + ".manifest.json", "w") as fh:
        fh.write(_dump_json(manifest))


def _parse_floats(spec: str, what: str) -> list[float]:
    try:
        return [float(p) for p in spec.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {spec!r}: {exc}") from exc


def _qubit_from_angles(spec: str) -> PureState:
    parts = _parse_floats(spec, "state angles")
    if len(parts) != 2:
        raise UsageError(f"expected 'theta,phi', got {spec!r}")
    theta, phi = parts
    return PureState.normalized(
        np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])
    )


def _resolve_basis(spec: str, rng: Rng) -> CnotBasis:
    if spec == "random":
        return CnotBasis.random(rng)
    if spec == "comp":
        return CnotBasis.computational()
    parts = _parse_floats(spec, "basis angles")
    if len(parts) == 2:
        theta, phi, gamma = parts[0], parts[1], 0.0
    elif len(parts) == 3:
        theta, phi, gamma = parts
    else:
        raise UsageError(f"--basis expects random, comp, or 'theta,phi[,gamma]', got {spec!r}")
    c = PureState.normalized(
        np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])
    )
    return CnotBasis.from_state(c, rel_phase=gamma)


def _resolve_psi(spec: str, basis: CnotBasis, rng: Rng) -> PureState:
    if spec == "random":
        return haar_random_pure(2, rng)
    if spec == "c":
        return basis.c
    if spec == "cprime":
        return basis.c_prime
    if spec == "f1":
        return uniform_superposition(2)
    if spec == "psi-plus":
        return PureState.normalized(basis.c.vector + 1j * basis.c_prime.vector)
    return _qubit_from_angles(spec)


def _load_state(spec: str) -> DensityMatrix:
    if spec == "ket4":
        return basis_ket(4, 3).density()
    if spec == "psi-plus":
        return PureState.normalized(np.array([1.0, 1.0j])).density()
    if spec == "f1":
        return uniform_superposition(2).density()
    try:
        with open(spec) as fh:
            data = json.load(fh)
        dim = int(data["dim"])
        rows = data["matrix"]
        mat = np.array(
            [[complex(re, im) for re, im in row] for row in rows], dtype=complex
        ).reshape(dim, dim)
        return DensityMatrix(mat)
    except (OSError, KeyError, ValueError, TypeError, TexlabError) as exc:
        raise UsageError(f"cannot load state {spec!r}: {exc}") from exc


def _resolve_free_set(spec: str, dim: int) -> FreeSet:
    if spec == "single":
        return FreeSet.single_pure(basis_ket(dim, 0))
    if spec.startswith("orth:"):
        m = int(spec.split(":", 1)[1])
        if not 1 <= m <= dim:
            raise UsageError(f"orth:m needs 1 <= m <= {dim}")
        return FreeSet.orthogonal_pure([basis_ket(dim, i) for i in range(m)])
    if spec == "incoherent":
        return FreeSet.incoherent(dim)
    if spec == "real":
        return FreeSet.real_states(dim)
    raise UsageError(f"unknown free set {spec!r}")


def _cmd_gate_id(args: argparse.Namespace) -> int:
    rng = Rng(args.seed)
    basis = _resolve_basis(args.basis, rng.child(0))
    if args.layer == "cnot":
        layer = LayerSpec.cnot(basis)
    else:
        layer = LayerSpec.single(haar_random_unitary(2, rng.child(1)))
    psi = _resolve_psi(args.psi, basis, rng.child(2))
    est = monte_carlo_protocol(layer, psi, args.samples, rng.child(3))
    report = detect_cnot(est, args.z_threshold, psi=psi)
    payload = {
        "layer": args.layer,
        "estimates": est.to_dict(),
        "report": report.to_dict(),
        "psi": [[v.real, v.imag] for v in psi.vector],
        "basis": {
            "c": [[v.real, v.imag] for v in basis.c.vector],
            "c_prime": [[v.real, v.imag] for v in basis.c_prime.vector],
        },
    }
    _write_output(_dump_json(payload), args.out)
    return 0


def _cmd_roof(args: argparse.Namespace) -> int:
    rng = Rng(args.seed)
    rho = _load_state(args.state)
    free = _resolve_free_set(args.free_set, rho.dim)
    k = args.k if args.k is not None else rho.dim * rho.dim
    config = OptimizerConfig(
        max_iterations=args.maxiter, population_size=args.popsize, seed=args.seed
    )
    representative = convex_roof(free, rho, k, config, rng.child(0))
    payload = {"result": roof_result_to_dict(representative), "trials": args.trials}
    if args.trials > 1:
        stats = repeated_convex_roof(free, rho, k, config, rng, args.trials)
        payload.update(
            {
                "values": [_json_ready(v) for v in stats.values],
                "mode": _json_ready(stats.mode),
                "quantile_low": _json_ready(stats.quantile_low),
                "quantile_high": _json_ready(stats.quantile_high),
            }
        )
    _write_output(_dump_json(payload), args.out)
    return 0


def _cmd_monotonicity(args: argparse.Namespace) -> int:
    rng = Rng(args.seed)
    config = OptimizerConfig(
        max_iterations=args.maxiter, population_size=args.popsize, seed=args.seed
    )
    records = random_walk_experiment(
        dim=args.D,
        free_dim=args.m,
        kraus_rank=args.kraus_rank,
        n_rounds=args.rounds,
        n_trials=args.trials,
        k=args.k,
        config=config,
        rng=rng,
    )
    _write_output(walk_records_to_csv(records), args.out)
    if args.channels_out:
        gen = rng.child(0)
        from .channels import random_fixed_point_channel

        chans = [
            random_fixed_point_channel(args.D, args.m, args.kraus_rank, gen)
            for _ in range(args.rounds)
        ]
        with open(args.channels_out, "w") as fh:
            fh.write(_dump_json([channel_to_json(c) for c in chans]))
    return 0


def _cmd_violation(args: argparse.Namespace) -> int:
    if args.grid is not None:
        if args.grid != "default":
            raise UsageError("only --grid default is available")
        reports = default_violation_family()
        payload = [r.to_dict() for r in reports]
    else:
        if args.D is None or args.a is None:
            raise UsageError("provide --D and --a, or --grid default")
        payload = strong_monotonicity_check(args.D, args.a).to_dict()
    _write_output(_dump_json(payload), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texlab",
        description="State-texture resource-theory laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_threads = int(os.environ.get("TEXLAB_THREADS", "1"))

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="RNG seed (64-bit)")
        p.add_argument("--out", type=str, default=None, help="output path (stdout if omitted)")
        p.add_argument(
            "--threads",
            type=int,
            default=default_threads,
            help="max worker hint (results are worker-count independent)",
        )

    p = sub.add_parser("gate-id", help="run the CNOT identification protocol")
    p.add_argument("--layer", choices=["single", "cnot"], default="cnot")
    p.add_argument("--basis", type=str, default="random", help="random | comp | theta,phi[,gamma]")
    p.add_argument("--psi", type=str, default="random", help="random | c | cprime | f1 | psi-plus | theta,phi")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--z-threshold", dest="z_threshold", type=float, default=5.0)
    common(p)
    p.set_defaults(func=_cmd_gate_id)

    p = sub.add_parser("roof", help="evaluate the convex-roof measure")
    p.add_argument("--free-set", dest="free_set", type=str, default="single",
                   help="single | orth:m | incoherent | real")
    p.add_argument("--state", type=str, required=True,
                   help="state file (JSON) or named example: ket4, psi-plus, f1")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--maxiter", type=int, default=500)
    p.add_argument("--popsize", type=int, default=40)
    p.add_argument("--trials", type=int, default=1)
    common(p)
    p.set_defaults(func=_cmd_roof)

    p = sub.add_parser("monotonicity", help="random-walk weak-monotonicity experiment")
    p.add_argument("--D", type=int, default=4)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--rounds", type=int, default=4)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--kraus-rank", dest="kraus_rank", type=int, default=3)
    p.add_argument("--maxiter", type=int, default=500)
    p.add_argument("--popsize", type=int, default=40)
    p.add_argument("--channels-out", dest="channels_out", type=str, default=None,
                   help="also dump the generated channel sequence as JSON")
    common(p)
    p.set_defaults(func=_cmd_monotonicity)

    p = sub.add_parser("violation", help="strong-monotonicity violation reports")
    p.add_argument("--D", type=int, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--grid", type=str, default=None, help="'default' for the a(D)=1-1/(2D) family")
    common(p)
    p.set_defaults(func=_cmd_violation)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    start = time.perf_counter()
    try:
        code = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TexlabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    _write_manifest(args, time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
