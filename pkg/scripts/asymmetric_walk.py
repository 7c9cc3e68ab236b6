"""Skew pressure of the signed walk on Z as the step weights become asymmetric.

For weights (a, b) on the +1 and -1 steps the skew pressure is log(2 sqrt(ab))
and the base pressure log(a + b). The table puts the series bracket next to
the fitted tilted pressure and the gap.

Usage:
    python scripts/asymmetric_walk.py [--max-n 40] [--ratios 1 2 4 9]
"""

import argparse
import math
from fractions import Fraction

from skewlab.recurrence import fit_homomorphism, pressure_gap
from skewlab.suite import signed_walk


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=40)
    ap.add_argument("--ratios", type=int, nargs="+", default=[1, 2, 4, 9, 16])
    args = ap.parse_args()
    print(f"{'b/a':>5} {'lower':>9} {'upper':>9} {'fitted':>9} {'closed':>9} {'base':>9} {'gap':>8}")
    for r in args.ratios:
        system, phi = signed_walk((Fraction(1), Fraction(r)))
        fit = fit_homomorphism(system, phi)
        gap = pressure_gap(system, phi, args.max_n)
        closed = math.log(2 * math.sqrt(r))
        b = gap.bracket
        print(f"{r:>5} {b.lower:9.5f} {b.upper:9.5f} {fit.fitted_pressure:9.5f} {closed:9.5f} "
              f"{gap.base:9.5f} {gap.gap_estimate:8.5f}")


if __name__ == "__main__":
    main()
