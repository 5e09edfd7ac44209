#!/usr/bin/env python3
"""Random-walk experiment: roof measure of a maximally resourceful state
under successive random free operations, one CSV per free-set size."""

import argparse
import pathlib

from texlab import OptimizerConfig, Rng, random_walk_experiment
from texlab.experiments import walk_records_to_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=4)
    parser.add_argument("--free-dims", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--rounds", type=int, default=4)
    parser.add_argument("--trials", type=int, default=30)
    parser.add_argument("--k", type=int, default=16)
    parser.add_argument("--kraus-rank", type=int, default=3)
    parser.add_argument("--maxiter", type=int, default=500)
    parser.add_argument("--popsize", type=int, default=40)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("walk_output"))
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    config = OptimizerConfig(max_iterations=args.maxiter, population_size=args.popsize)
    for m in args.free_dims:
        records = random_walk_experiment(
            dim=args.dim,
            free_dim=m,
            kraus_rank=args.kraus_rank,
            n_rounds=args.rounds,
            n_trials=args.trials,
            k=args.k,
            config=config,
            rng=Rng(args.seed + m),
        )
        path = args.out_dir / f"walk_m{m}.csv"
        path.write_text(walk_records_to_csv(records))
        modes = ", ".join(
            "inf" if r.measure_mode == float("inf") else f"{r.measure_mode:.3f}"
            for r in records
        )
        print(f"m={m}: modes [{modes}] -> {path}")


if __name__ == "__main__":
    main()
