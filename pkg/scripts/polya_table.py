"""Recurrence of the simple walk on Z^d through the discounted skew series.

Usage:
    python scripts/polya_table.py [--max-n 40] [--dims 1 2 3]
"""

import argparse
import math

from skewlab.potentials import LocallyConstantPotential
from skewlab.recurrence import recurrence_diagnose
from skewlab.suite import walk_system
from skewlab.transfer import skew_partition_Z


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=40)
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()
    print(f"{'d':>2} {'verdict':>20} {'beta':>7} {'R^2':>7} {'partial sum':>12}  reason")
    for d in args.dims:
        system = walk_system(d)
        zero = LocallyConstantPotential.zero(system.shift)
        Z = skew_partition_Z(system, zero, 0, args.max_n)
        Zs = skew_partition_Z(system, zero, 0, args.max_n, star=True)
        rep = recurrence_diagnose(Z, Zs, math.log(2 * d))
        m = rep.main
        print(f"{d:>2} {rep.verdict:>20} {m.beta:7.3f} {m.r2:7.4f} {rep.partial_sums[-1]:12.5f}  {m.reason}")


if __name__ == "__main__":
    main()
