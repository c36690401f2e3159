#!/usr/bin/env python3
"""Sweep the pairing radius constant C and report matched fractions.

The Rouche construction pairs a root X with a unique critical point inside
B_{C/n}(X) when |V(X)| exceeds ~1/C, so the matched fraction for the unit
disk rises from ~0 at C=1 toward 1 as C grows.
"""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from critlab.measures import UniformDisk, sample_roots
from critlab.metrics import pairing_report
from critlab.polyroots import RootPolynomial, critical_points
from critlab.seeds import split_seed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-values", type=int, nargs="+", default=[100, 500])
    ap.add_argument("--c-values", type=float, nargs="+", default=[1.0, 2.0, 4.0, 8.0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20250810)
    args = ap.parse_args()

    print("C        " + "".join(f"n={n:<10d}" for n in args.n_values))
    for C in args.c_values:
        row = []
        for n in args.n_values:
            fractions = []
            for t in range(args.trials):
                s = sample_roots(UniformDisk(1.0), n, split_seed(args.seed, n, t))
                cps = critical_points(RootPolynomial(s.roots))
                rep = pairing_report(s, cps, C)
                fractions.append(rep.matched / n)
            row.append(float(np.mean(fractions)))
        print(f"{C:<9.2f}" + "".join(f"{v:<12.3f}" for v in row))


if __name__ == "__main__":
    main()
