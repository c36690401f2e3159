#!/usr/bin/env python3
"""Run the disk convergence experiment: Prohorov distance medians vs n."""

import argparse
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from critlab.experiment import load_config, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(pathlib.Path(__file__).parent.parent / "configs" / "disk_convergence.toml"))
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    overrides = {"threads": args.threads} if args.threads else {}
    config = load_config(args.config, **overrides)
    agg = run_experiment(config)
    medians = []
    for n in config.n_values:
        entry = agg["per_n"][str(n)]
        medians.append(entry["prohorov"]["median"])
        print(f"n={n}: Prohorov median {medians[-1]:.4f} "
              f"(mean {entry['prohorov']['mean']:.4f}, se {entry['prohorov']['se']:.4f})")
    trend = "decreasing" if all(a > b for a, b in zip(medians, medians[1:])) else "NOT monotone"
    print(f"median trend across n: {trend}")


if __name__ == "__main__":
    main()
