"""Kernel counts and cogrowth exponents for a few quotients of free groups.

Usage:
    python scripts/cogrowth_table.py [--max-n 12] [--csv DIR]
"""

import argparse
import pathlib

from skewlab.cogrowth import cogrowth_series, eta_bounds_check
from skewlab.groups import FiniteGroup, FreeGroup, LatticeGroup, SymbolMap

QUOTIENTS = {
    "F2 -> 1": (2, SymbolMap(FiniteGroup.cyclic(1), (0, 0, 0, 0))),
    "F2 -> Z/3": (2, SymbolMap(FiniteGroup.cyclic(3), (1, 2, 1, 2))),
    "F2 -> Z^2": (2, SymbolMap(LatticeGroup(2), ((1, 0), (-1, 0), (0, 1), (0, -1)))),
    "F3 -> Z": (3, SymbolMap(LatticeGroup(1), ((1,), (-1,), (1,), (-1,), (0,), (0,)))),
    "F3 -> F2": (3, SymbolMap(FreeGroup(2), ((1,), (-1,), (2,), (-2,), (1, 2), (-2, -1)))),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=12)
    ap.add_argument("--csv", help="directory for per-quotient CSV series")
    args = ap.parse_args()
    print(f"{'quotient':>10} {'a_N':>12} {'gamma':>8} {'eta':>7} {'sqrt bound':>10} {'passed':>7}")
    for name, (t, psi) in QUOTIENTS.items():
        rep = cogrowth_series(t, psi, args.max_n)
        chk = eta_bounds_check(rep)
        print(f"{name:>10} {rep.a[-1]:>12} {chk.gamma:8.4f} {chk.eta:7.4f} {chk.sqrt_bound:10.4f} {str(chk.passed):>7}")
        if args.csv:
            out = pathlib.Path(args.csv)
            out.mkdir(parents=True, exist_ok=True)
            slug = name.replace(" -> ", "_to_").replace("/", "").replace("^", "")
            (out / f"{slug}.csv").write_text(rep.to_csv())


if __name__ == "__main__":
    main()
