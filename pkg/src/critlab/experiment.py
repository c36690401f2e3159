"""Experiment orchestration: seeded trial execution, aggregation, reports.

A trial is a pure function of (config, n, trial_index): its seed comes from
the documented split function, so results are independent of worker
scheduling and thread count. The aggregator consumes trial records in any
order and uses only order-insensitive statistics (sums, sorted medians,
histograms), which makes aggregation of several JSON-lines files equal to
aggregation of their concatenation.

Timing fields ("timing_ms", "timing_ms_total") are the only run-dependent
values in any report file.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circle import count_law, power_sum_coefficients
from .classic import gauss_lucas_check
from .errors import ConfigurationError, SolverFailure
from .measures import MeasureSpec, UniformCircle, measure_from_dict, sample_roots
from .metrics import DiscreteMeasure, min_gap_statistic, pairing_report, prohorov_distance
from .polyroots import DEFAULT_PRECISION_BITS, RootPolynomial, critical_points
from .seeds import split_seed

COUNT_LAW_TV_THRESHOLD = 0.05  # acceptance threshold recorded in every aggregate
TIMING_KEYS = ("timing_ms", "timing_ms_total")


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    measure: MeasureSpec
    n_values: tuple
    trials: int
    master_seed: int
    output_dir: str | None = None
    C: float = 1.0
    rho: float = 0.5
    precision_bits: int | None = None
    reference_sample_size: int = 10000
    threads: int = 1
    with_prohorov: bool = True
    with_pairing: bool = True
    with_circle_stats: bool | None = None  # None: auto-enable on the unit circle
    coefficient_count: int = 3
    prohorov_tol: float = 1e-3
    max_failures: int = 0
    name: str = "experiment"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if any(n < 2 for n in self.n_values) or not self.n_values:
            raise ConfigurationError("every n must be >= 2")
        if not 0.0 < self.rho < 1.0:
            raise ConfigurationError("need 0 < rho < 1")
        if self.threads < 1:
            raise ConfigurationError("threads must be >= 1")

    @property
    def circle_stats(self) -> bool:
        if self.with_circle_stats is not None:
            return self.with_circle_stats
        return isinstance(self.measure, UniformCircle) and self.measure.radius == 1.0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["measure"] = self.measure.to_dict()
        d["n_values"] = list(self.n_values)
        return d


# ---------------------------------------------------------------------------
# Trial execution
# ---------------------------------------------------------------------------

_TRIAL_KEYS = {
    "trial_index": int,
    "n": int,
    "seed": int,
    "timing_ms": float,
}


def validate_trial_dict(d: dict) -> None:
    """Schema check for a trial record; raises ConfigurationError on failure."""
    for key, typ in _TRIAL_KEYS.items():
        if key not in d:
            raise ConfigurationError(f"trial record missing {key!r}")
        if not isinstance(d[key], typ):
            raise ConfigurationError(f"trial record field {key!r} has wrong type")
    if d.get("error") is None:
        for key in ("cp_count", "precision_used", "hull_ok"):
            if d.get(key) is None:
                raise ConfigurationError(f"successful trial record missing {key!r}")


def run_trial(config: ExperimentConfig, reference: DiscreteMeasure | None,
              n: int, trial_index: int) -> dict:
    """Execute one trial; returns the JSON-serializable trial record."""
    seed = split_seed(config.master_seed, n, trial_index)
    t0 = time.perf_counter()
    record: dict = {"trial_index": trial_index, "n": n, "seed": seed, "error": None}
    sample = sample_roots(config.measure, n, seed)
    pb = config.precision_bits or DEFAULT_PRECISION_BITS
    try:
        cps = critical_points(RootPolynomial(sample.roots, pb))
    except SolverFailure as exc:
        record["error"] = str(exc)
        record["timing_ms"] = (time.perf_counter() - t0) * 1000.0
        return record
    record["cp_count"] = len(cps)
    record["precision_used"] = cps.precision_bits
    hull = gauss_lucas_check(sample.roots, cps)
    record["hull_ok"] = bool(hull.contained)
    record["hull_violation"] = float(hull.worst_violation)
    record["min_gap"] = min_gap_statistic(sample)
    if config.with_prohorov and reference is not None:
        dist = prohorov_distance(
            DiscreteMeasure.from_points(cps.points), reference, config.prohorov_tol
        )
        record["prohorov_to_reference"] = float(dist)
    if config.with_pairing:
        rep = pairing_report(sample, cps, config.C)
        record["pairing"] = {
            "matched": rep.matched,
            "crowded": rep.crowded,
            "unmatched": rep.unmatched,
            "max_match_dist": rep.max_match_dist,
        }
    if config.circle_stats:
        moduli = np.abs(cps.points)
        record["rho"] = config.rho
        record["N_rho"] = int((moduli <= config.rho).sum())
        coeffs = power_sum_coefficients(sample, config.coefficient_count)
        record["coefficients"] = [[c.real, c.imag] for c in coeffs.entries]
        hist, _ = np.histogram(np.clip(moduli, 0.0, 1.0), bins=np.linspace(0.0, 1.0, 21))
        record["modulus_hist"] = hist.tolist()
    if trial_index == 0:
        record["cp_scatter"] = [
            [p.real, p.imag, float(r)] for p, r in zip(cps.points, cps.residuals)
        ]
    record["timing_ms"] = (time.perf_counter() - t0) * 1000.0
    return record


_WORKER_STATE: dict = {}


def _init_worker(config: ExperimentConfig, reference: DiscreteMeasure | None):
    _WORKER_STATE["config"] = config
    _WORKER_STATE["reference"] = reference


def _worker_job(job):
    n, trial_index = job
    return run_trial(_WORKER_STATE["config"], _WORKER_STATE["reference"], n, trial_index)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def aggregate_reports(records, thresholds: dict | None = None) -> dict:
    """Fold trial records into the aggregate summary (order-insensitive)."""
    per_n: dict[int, dict] = {}
    for rec in records:
        validate_trial_dict(rec)
        acc = per_n.setdefault(
            rec["n"],
            {
                "trials": 0,
                "failures": 0,
                "timing_ms_total": 0.0,
                "prohorov": [],
                "matched_fraction": [],
                "crowded": 0,
                "unmatched": 0,
                "N_rho": [],
                "rho": None,
                "coeff_entries": [],
                "hull_violations": 0,
                "modulus_hist": None,
                "min_gap": [],
            },
        )
        acc["trials"] += 1
        acc["timing_ms_total"] += rec.get("timing_ms", 0.0)
        if rec.get("error") is not None:
            acc["failures"] += 1
            continue
        if not rec.get("hull_ok", True):
            acc["hull_violations"] += 1
        if rec.get("min_gap") is not None:
            acc["min_gap"].append(rec["min_gap"])
        if rec.get("prohorov_to_reference") is not None:
            acc["prohorov"].append(rec["prohorov_to_reference"])
        if rec.get("pairing") is not None:
            acc["matched_fraction"].append(rec["pairing"]["matched"] / rec["n"])
            acc["crowded"] += rec["pairing"]["crowded"]
            acc["unmatched"] += rec["pairing"]["unmatched"]
        if rec.get("N_rho") is not None:
            acc["N_rho"].append(rec["N_rho"])
            acc["rho"] = rec.get("rho")
        if rec.get("coefficients") is not None:
            acc["coeff_entries"].append(rec["coefficients"])
        if rec.get("modulus_hist") is not None:
            h = np.asarray(rec["modulus_hist"], dtype=int)
            acc["modulus_hist"] = h if acc["modulus_hist"] is None else acc["modulus_hist"] + h

    out: dict = {
        "thresholds": dict(thresholds or {"count_law_tv": COUNT_LAW_TV_THRESHOLD}),
        "per_n": {},
    }
    failures_total = 0
    for n in sorted(per_n):
        acc = per_n[n]
        failures_total += acc["failures"]
        entry: dict = {
            "trials": acc["trials"],
            "failures": acc["failures"],
            "hull_violations": acc["hull_violations"],
            "timing_ms_total": acc["timing_ms_total"],
        }
        if acc["prohorov"]:
            vals = np.asarray(sorted(acc["prohorov"]))
            entry["prohorov"] = {
                "mean": float(vals.mean()),
                "median": float(np.median(vals)),
                "se": float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0,
            }
        if acc["matched_fraction"]:
            vals = np.asarray(sorted(acc["matched_fraction"]))
            entry["pairing"] = {
                "matched_fraction_mean": float(vals.mean()),
                "matched_fraction_median": float(np.median(vals)),
                "crowded_total": acc["crowded"],
                "unmatched_total": acc["unmatched"],
            }
        if acc["min_gap"]:
            vals = np.asarray(sorted(acc["min_gap"]))
            entry["min_gap_median"] = float(np.median(vals))
        if acc["N_rho"]:
            counts = np.asarray(sorted(acc["N_rho"]), dtype=int)
            law = count_law(acc["rho"])
            width = max(len(law.pmf), int(counts.max()) + 1)
            emp = np.bincount(counts, minlength=width) / len(counts)
            law_pmf = np.pad(law.pmf, (0, width - len(law.pmf)))
            entry["N_rho"] = {
                "mean": float(counts.mean()),
                "se": float(counts.std(ddof=1) / math.sqrt(len(counts)))
                if len(counts) > 1
                else 0.0,
                "law_mean": law.mean,
                "pmf": emp.tolist(),
                "law_pmf": law_pmf.tolist(),
                "tv_to_count_law": float(0.5 * np.abs(emp - law_pmf).sum()),
                "rho": acc["rho"],
            }
        if acc["coeff_entries"]:
            arr = np.asarray(sorted(acc["coeff_entries"], key=json.dumps))
            stats = {}
            for r in range(arr.shape[1]):
                re, im = arr[:, r, 0], arr[:, r, 1]
                stats[f"a{r}"] = {
                    "re_mean": float(re.mean()),
                    "im_mean": float(im.mean()),
                    "re_var": float(re.var(ddof=1)) if len(re) > 1 else 0.0,
                    "im_var": float(im.var(ddof=1)) if len(im) > 1 else 0.0,
                }
            entry["coefficients"] = stats
        if acc["modulus_hist"] is not None:
            entry["modulus_hist"] = acc["modulus_hist"].tolist()
        out["per_n"][str(n)] = entry
    out["failures_total"] = failures_total
    return out


# ---------------------------------------------------------------------------
# Experiment driver and file outputs
# ---------------------------------------------------------------------------


def _write_csv(path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_roots_csv(path, points) -> None:
    _write_csv(path, "re,im", ((p.real, p.imag) for p in np.asarray(points, complex)))


def read_points_csv(path) -> np.ndarray:
    rows = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2))
    return rows[:, 0] + 1j * rows[:, 1]


def write_cps_csv(path, cps) -> None:
    _write_csv(
        path,
        "re,im,residual",
        ((p.real, p.imag, float(r)) for p, r in zip(cps.points, cps.residuals)),
    )


def run_experiment(config: ExperimentConfig) -> dict:
    """Run trials x n_values jobs, write reports, return the aggregate.

    Per-trial seeds are fixed by (master_seed, n, trial_index); the aggregate
    is identical at any thread count. Solver failures are recorded per trial
    and counted, never fatal here.
    """
    reference = None
    if config.with_prohorov:
        ref_sample = sample_roots(
            config.measure, config.reference_sample_size, split_seed(config.master_seed, 0, 0)
        )
        reference = DiscreteMeasure.from_points(ref_sample.roots)
    jobs = [(n, t) for n in config.n_values for t in range(config.trials)]
    if config.threads > 1:
        with ProcessPoolExecutor(
            max_workers=config.threads,
            initializer=_init_worker,
            initargs=(config, reference),
        ) as pool:
            records = list(pool.map(_worker_job, jobs, chunksize=8))
    else:
        records = [run_trial(config, reference, n, t) for n, t in jobs]
    records.sort(key=lambda r: (r["n"], r["trial_index"]))

    aggregate = aggregate_reports(records)
    aggregate["name"] = config.name
    aggregate["config"] = config.to_dict()

    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        out = config.output_dir
        with open(os.path.join(out, "trials.jsonl"), "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        with open(os.path.join(out, "aggregate.json"), "w") as fh:
            json.dump(aggregate, fh, sort_keys=True, indent=2)
            fh.write("\n")
        prohorov_rows = []
        for n in config.n_values:
            first = next((r for r in records if r["n"] == n and r["trial_index"] == 0), None)
            if first and first.get("cp_scatter"):
                _write_csv(
                    os.path.join(out, f"cps_scatter_n{n}.csv"),
                    "re,im,residual",
                    first["cp_scatter"],
                )
            entry = aggregate["per_n"].get(str(n), {})
            if "modulus_hist" in entry:
                edges = np.linspace(0.0, 1.0, 21)
                _write_csv(
                    os.path.join(out, f"modulus_hist_n{n}.csv"),
                    "bin_lo,bin_hi,count",
                    (
                        (edges[i], edges[i + 1], c)
                        for i, c in enumerate(entry["modulus_hist"])
                    ),
                )
            if "prohorov" in entry:
                prohorov_rows.append((n, entry["prohorov"]["median"]))
        if prohorov_rows:
            _write_csv(os.path.join(out, "prohorov_vs_n.csv"), "n,median_prohorov", prohorov_rows)
    return aggregate


# ---------------------------------------------------------------------------
# Config file loading (TOML)
# ---------------------------------------------------------------------------


def load_config(path, **overrides) -> ExperimentConfig:
    """Load an ExperimentConfig from a TOML file; kwargs override fields."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if "measure" not in raw or "experiment" not in raw:
        raise ConfigurationError("config needs [experiment] and [measure] sections")
    exp = raw["experiment"]
    stats = raw.get("stats", {})
    kwargs = dict(
        measure=measure_from_dict(raw["measure"]),
        n_values=tuple(exp.get("n_values", ())),
        trials=exp.get("trials", 1),
        master_seed=exp.get("master_seed", 0),
        output_dir=exp.get("output_dir"),
        precision_bits=exp.get("precision_bits"),
        threads=exp.get("threads", 1),
        name=exp.get("name", "experiment"),
        C=stats.get("C", 1.0),
        rho=stats.get("rho", 0.5),
        reference_sample_size=stats.get("reference_sample_size", 10000),
        with_prohorov=stats.get("prohorov", True),
        with_pairing=stats.get("pairing", True),
        with_circle_stats=stats.get("circle"),
        coefficient_count=stats.get("coefficient_count", 3),
        prohorov_tol=stats.get("prohorov_tol", 1e-3),
        max_failures=stats.get("max_failures", 0),
    )
    kwargs.update(overrides)
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
