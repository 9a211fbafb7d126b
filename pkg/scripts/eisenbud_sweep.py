"""Sweep random Jacobian matrices and count breaks of a_L >= I_max(L) >= a_L^p."""

import argparse
import collections
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "tests"))

from test_modfilt import eisenbud_violations, random_L  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--degree", type=int, default=6)
    ap.add_argument("--start", type=int, default=0)
    args = ap.parse_args()
    shapes = collections.Counter()
    broken = []
    t0 = time.perf_counter()
    for seed in range(args.start, args.start + args.count):
        L = random_L(seed, args.degree)
        shapes[L.shape] += 1
        if eisenbud_violations(L, args.degree):
            broken.append(seed)
    print("matrices %d  degree %d  %.1fs" % (args.count, args.degree, time.perf_counter() - t0))
    for shape, k in sorted(shapes.items()):
        print("  shape %dx%d: %d" % (shape + (k,)))
    print("violations: %d %s" % (len(broken), broken[:20]))


if __name__ == "__main__":
    main()
