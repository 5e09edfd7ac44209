#!/usr/bin/env python3
"""Print the strong-monotonicity violation table for the filter channel."""

import argparse

from texlab import strong_monotonicity_check


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 10])
    parser.add_argument(
        "--a-values", type=float, nargs="+", default=None,
        help="filter parameters; defaults to the a(D) = 1 - 1/(2D) family",
    )
    args = parser.parse_args()

    print(f"{'D':>3} {'a':>8} {'metric':>10} {'lhs':>10} {'rhs':>10} violated")
    for d in args.dims:
        a_values = args.a_values or [1.0 - 1.0 / (2 * d)]
        for a in a_values:
            rep = strong_monotonicity_check(d, a)
            print(
                f"{rep.d:>3} {rep.a:>8.4f} {rep.violation_metric:>10.4f} "
                f"{rep.lhs:>10.4f} {rep.rhs:>10.4f} {rep.violated}"
            )


if __name__ == "__main__":
    main()
