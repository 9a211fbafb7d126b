"""Which certificates fire on the family y1^2 - y2^2 + y1 x1^3 + y2 x2^3 + g."""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "tests"))

from germsolve.certify import check_certificate  # noqa: E402
from germsolve.modfilt import IdealT  # noqa: E402
from germsolve.solver import SolutionTrace, solve_order_by_order  # noqa: E402
from fixtures import twovar  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=7, help="total degree of the monomials g")
    ap.add_argument("--trunc", type=int, default=12)
    args = ap.parse_args()
    d = args.degree
    print("%-12s %-9s %-7s %-7s %s" % ("g", "tougeron", "fisher", "bk(m^3)", "solved"))
    for a in range(d, -1, -1):
        b = d - a
        s = twovar(args.trunc, g=lambda x1, x2: x1 ** a * x2 ** b)
        row = [check_certificate(s, k).passed for k in ("tougeron", "fisher")]
        bk = check_certificate(s, "bk", {"J": IdealT.maximal(s.xring) ** 3})
        row.append(bk.passed)
        solved = bk.passed and isinstance(solve_order_by_order(s, bk.filtration, args.trunc), SolutionTrace)
        print("%-12s %-9s %-7s %-7s %s" % ("x1^%d*x2^%d" % (a, b), *row, solved))


if __name__ == "__main__":
    main()
