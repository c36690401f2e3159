#!/usr/bin/env python3
"""Run the unit-circle count-law experiment and print the verdict.

Compares the empirical distribution of N(rho) = #(critical points in B_rho)
at finite n against the Bernoulli-sum limit law (means rho^{2k}).
"""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from critlab.experiment import load_config, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(pathlib.Path(__file__).parent.parent / "configs" / "circle_count_law.toml"))
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    overrides = {}
    if args.trials:
        overrides["trials"] = args.trials
    if args.threads:
        overrides["threads"] = args.threads
    config = load_config(args.config, **overrides)
    agg = run_experiment(config)
    for n, entry in agg["per_n"].items():
        nrho = entry["N_rho"]
        print(f"n={n}: mean N(rho) = {nrho['mean']:.4f} (law {nrho['law_mean']:.4f}, "
              f"se {nrho['se']:.4f}), TV to count law = {nrho['tv_to_count_law']:.4f}")
    print(json.dumps({"thresholds": agg["thresholds"], "failures": agg["failures_total"]}))


if __name__ == "__main__":
    main()
