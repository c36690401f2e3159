"""Command-line interface.

Subcommands cover the artifact surfaces: sampling roots to CSV, certifying
critical points of a roots CSV, comparing two point CSVs in Prohorov
distance, the circle/GAF statistics pipelines, the classical-theorem sweeps,
the z^n - 1 perturbation demo, and JSON-lines report aggregation.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 solver
failure budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .circle import count_law, radial_bin_edges, sample_gaf_zeros
from .classic import gauss_lucas_check, interlacing_check, jensen_check, marden_check, perturbation_demo
from .errors import ConfigurationError, SolverFailure
from .experiment import (
    aggregate_reports,
    load_config,
    read_points_csv,
    run_experiment,
    write_cps_csv,
    write_roots_csv,
)
from .measures import UniformDisk, UniformSegment, sample_roots
from .metrics import DiscreteMeasure, prohorov_distance
from .polyroots import RootPolynomial, critical_points


def _cmd_sample(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.master_seed
    sample = sample_roots(config.measure, args.n, seed)
    write_roots_csv(args.out, sample.roots)
    print(f"wrote {args.n} roots to {args.out}")
    return 0


def _cmd_critical_points(args) -> int:
    roots = read_points_csv(getattr(args, "in"))
    poly = (
        RootPolynomial(roots, args.precision_bits)
        if args.precision_bits
        else RootPolynomial(roots)
    )
    cps = critical_points(poly)
    write_cps_csv(args.out, cps)
    print(f"wrote {len(cps)} critical points to {args.out} (precision {cps.precision_bits})")
    return 0


def _cmd_compare(args) -> int:
    mu = DiscreteMeasure.from_csv(args.first)
    nu = DiscreteMeasure.from_csv(args.second)
    dist = prohorov_distance(mu, nu, args.tol)
    print(f"{dist:.17g}")
    return 0


def _cmd_circle_stats(args) -> int:
    overrides = {"with_circle_stats": True}
    if args.threads is not None:
        overrides["threads"] = args.threads
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.precision_bits is not None:
        overrides["precision_bits"] = args.precision_bits
    if args.out is not None:
        overrides["output_dir"] = args.out
    config = load_config(args.config, **overrides)
    aggregate = run_experiment(config)
    print(json.dumps({k: aggregate[k] for k in ("name", "failures_total", "per_n")},
                     sort_keys=True, indent=2))
    if aggregate["failures_total"] > config.max_failures:
        return 3
    return 0


def _cmd_gaf_zeros(args) -> int:
    law = count_law(args.rho, args.tail_tol)
    counts = []
    all_moduli = []
    with open(args.out, "w") as fh:
        for t in range(args.trials):
            gaf = sample_gaf_zeros(args.rho, args.tail_tol, args.seed + t)
            counts.append(len(gaf.zeros_in_B_rho))
            all_moduli.extend(np.abs(gaf.zeros_in_B_rho).tolist())
            rec = {
                "trial": t,
                "M": gaf.M,
                "zeros": [[z.real, z.imag] for z in gaf.zeros_in_B_rho],
                "boundary_flags": gaf.boundary_flags.tolist(),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    counts = np.asarray(counts)
    summary = {
        "trials": args.trials,
        "rho": args.rho,
        "mean_count": float(counts.mean()),
        "se_count": float(counts.std(ddof=1) / math.sqrt(len(counts))),
        "law_mean": law.mean,
    }
    if len(all_moduli) >= 50:
        edges = radial_bin_edges(args.rho, 10)
        observed, _ = np.histogram(all_moduli, bins=edges)
        expected = len(all_moduli) / 10.0
        chi2 = float(((observed - expected) ** 2 / expected).sum())
        summary["radial_chi2"] = chi2
        summary["radial_chi2_dof"] = 9
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 0


def _cmd_classic_checks(args) -> int:
    rng = np.random.Generator(np.random.PCG64(args.seed))
    ok = True

    worst_dev = 0.0
    done = 0
    while done < args.trials:
        v = rng.uniform(-1.0, 1.0, size=6)
        z1, z2, z3 = v[0] + 1j * v[1], v[2] + 1j * v[3], v[4] + 1j * v[5]
        area2 = abs(((z2 - z1) * (z3 - z1).conjugate()).imag)
        if area2 < 1e-3:
            continue
        _, dev = marden_check(z1, z2, z3)
        worst_dev = max(worst_dev, dev)
        done += 1
    passed = worst_dev < 1e-10
    ok &= passed
    print(f"[{'PASS' if passed else 'FAIL'}] marden: max focus deviation {worst_dev:.3e} over {args.trials} triangles")

    bad = 0
    for t in range(args.trials):
        sample = sample_roots(UniformSegment(0.0, 1.0), 50, args.seed + 7919 * t)
        cps = critical_points(RootPolynomial(sample.roots))
        if not interlacing_check(sample.roots, cps):
            bad += 1
    ok &= bad == 0
    print(f"[{'PASS' if bad == 0 else 'FAIL'}] interlacing: {bad} failures over {args.trials} real-rooted trials")

    bad = 0
    for t in range(args.trials):
        k = int(rng.integers(1, 6))
        j = int(rng.integers(0, 4))
        upper = rng.uniform(-1, 1, size=(k, 2))
        reals = rng.uniform(-1, 1, size=j)
        roots = []
        for re, im in upper:
            roots += [complex(re, abs(im) + 1e-3), complex(re, -abs(im) - 1e-3)]
        roots += [complex(r, 0.0) for r in reals]
        cps = critical_points(RootPolynomial(roots))
        if not jensen_check(roots, cps):
            bad += 1
    ok &= bad == 0
    print(f"[{'PASS' if bad == 0 else 'FAIL'}] jensen: {bad} failures over {args.trials} conjugate-closed trials")

    bad = 0
    for t in range(args.trials):
        n = int(rng.integers(3, 50))
        sample = sample_roots(UniformDisk(1.0), n, args.seed + 104729 * t)
        cps = critical_points(RootPolynomial(sample.roots))
        if not gauss_lucas_check(sample.roots, cps).contained:
            bad += 1
    ok &= bad == 0
    print(f"[{'PASS' if bad == 0 else 'FAIL'}] gauss-lucas: {bad} hull violations over {args.trials} disk trials")

    return 0 if ok else 1


def _cmd_perturb_demo(args) -> int:
    demo = perturbation_demo(args.n, steps=args.steps, precision_bits=args.precision_bits or 256)
    demo.to_csv(args.out)
    print(f"wrote {len(demo.fractions)} rows to {args.out}; "
          f"endpoints {demo.max_moduli[0]:.3e} -> {demo.max_moduli[-1]:.6f}")
    return 0


def _cmd_report(args) -> int:
    records = []
    for path in args.files:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
    aggregate = aggregate_reports(records)
    with open(args.out, "w") as fh:
        json.dump(aggregate, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"aggregated {len(records)} trials from {len(args.files)} files into {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critlab",
                                     description="Monte Carlo lab for critical points of random polynomials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample roots from the configured measure to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("critical-points", help="roots CSV in, certified critical points CSV out")
    p.add_argument("--in", dest="in", required=True)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_critical_points)

    p = sub.add_parser("compare", help="Prohorov distance between two point CSVs")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("circle-stats", help="run the unit-circle experiment from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory override")
    p.set_defaults(func=_cmd_circle_stats)

    p = sub.add_parser("gaf-zeros", help="zeros of truncated Gaussian power series")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tail-tol", type=float, default=1e-8)
    p.add_argument("--out", required=True, help="JSON-lines output path")
    p.set_defaults(func=_cmd_gaf_zeros)

    p = sub.add_parser("classic-checks", help="classical-theorem verification sweeps")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=20240601)
    p.set_defaults(func=_cmd_classic_checks)

    p = sub.add_parser("perturb-demo", help="max |critical point| as a root of z^n-1 slides")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_perturb_demo)

    p = sub.add_parser("report", help="aggregate JSON-lines trial reports")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
