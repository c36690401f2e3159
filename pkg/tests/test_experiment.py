import json

import numpy as np
import pytest

from critlab.errors import ConfigurationError
from critlab.experiment import (
    ExperimentConfig,
    aggregate_reports,
    load_config,
    read_points_csv,
    run_experiment,
    run_trial,
    validate_trial_dict,
    write_roots_csv,
)
from critlab.measures import UniformCircle, UniformDisk

TINY_TOML = """
[experiment]
name = "tiny"
trials = 4
n_values = [5, 8]
master_seed = 91
threads = 1

[measure]
kind = "uniform_disk"
radius = 1.0

[stats]
prohorov = true
pairing = true
reference_sample_size = 400
prohorov_tol = 0.005
"""


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k not in ("timing_ms", "timing_ms_total")}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


@pytest.fixture
def tiny_config(tmp_path):
    cfg_path = tmp_path / "exp.toml"
    cfg_path.write_text(TINY_TOML)
    return cfg_path


def test_load_config_parses_fields(tiny_config):
    cfg = load_config(tiny_config)
    assert cfg.measure == UniformDisk(1.0)
    assert cfg.n_values == (5, 8)
    assert cfg.trials == 4
    assert cfg.reference_sample_size == 400
    assert not cfg.circle_stats


def test_load_config_validation_errors(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment]\ntrials = 0\nn_values = [5]\nmaster_seed = 1\n[measure]\nkind = 'uniform_disk'\nradius = 1.0\n")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    nosec = tmp_path / "nosec.toml"
    nosec.write_text("[experiment]\ntrials = 1\n")
    with pytest.raises(ConfigurationError):
        load_config(nosec)


def test_circle_config_auto_enables_circle_stats():
    cfg = ExperimentConfig(
        measure=UniformCircle(1.0), n_values=(10,), trials=1, master_seed=0
    )
    assert cfg.circle_stats


def test_run_trial_record_schema():
    cfg = ExperimentConfig(
        measure=UniformCircle(1.0), n_values=(12,), trials=1, master_seed=5,
        with_prohorov=False,
    )
    rec = run_trial(cfg, None, 12, 0)
    validate_trial_dict(rec)
    assert rec["cp_count"] == 11
    assert rec["N_rho"] is not None and rec["coefficients"] is not None
    assert rec["cp_scatter"] is not None  # first trial carries the scatter
    json.dumps(rec)  # serializable


def test_run_experiment_outputs_and_determinism(tiny_config, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    cfg_a = load_config(tiny_config, output_dir=str(out_a))
    cfg_b = load_config(tiny_config, output_dir=str(out_b), threads=2)
    agg_a = run_experiment(cfg_a)
    agg_b = run_experiment(cfg_b)
    assert agg_a["failures_total"] == 0

    lines_a = (out_a / "trials.jsonl").read_text().strip().splitlines()
    lines_b = (out_b / "trials.jsonl").read_text().strip().splitlines()
    assert len(lines_a) == 8
    recs_a = [_strip_timing(json.loads(l)) for l in lines_a]
    recs_b = [_strip_timing(json.loads(l)) for l in lines_b]
    assert recs_a == recs_b  # thread count cannot change the reports

    agg_json_a = _strip_timing(json.loads((out_a / "aggregate.json").read_text()))
    agg_json_b = _strip_timing(json.loads((out_b / "aggregate.json").read_text()))
    for key in ("threads", "output_dir"):  # the only intentional differences
        agg_json_b["config"][key] = agg_json_a["config"][key]
    assert agg_json_a == agg_json_b

    assert (out_a / "cps_scatter_n5.csv").exists()
    assert (out_a / "prohorov_vs_n.csv").exists()


def test_aggregation_of_split_files_equals_concatenation(tiny_config, tmp_path):
    cfg = load_config(tiny_config, output_dir=str(tmp_path / "out"))
    run_experiment(cfg)
    lines = (tmp_path / "out" / "trials.jsonl").read_text().strip().splitlines()
    records = [json.loads(l) for l in lines]
    whole = aggregate_reports(records)
    parts = aggregate_reports(records[:3] + records[3:])
    assert whole == parts
    # order-insensitivity
    shuffled = aggregate_reports(list(reversed(records)))
    assert _strip_timing(whole) == _strip_timing(shuffled)


def test_roots_csv_roundtrip(tmp_path):
    pts = np.array([0.1 + 0.2j, -1.5 - 0.25j, 3 + 0j])
    path = tmp_path / "roots.csv"
    write_roots_csv(path, pts)
    back = read_points_csv(path)
    assert np.array_equal(back, pts)


def test_trial_schema_validator_rejects_garbage():
    with pytest.raises(ConfigurationError):
        validate_trial_dict({"trial_index": 0})
    with pytest.raises(ConfigurationError):
        validate_trial_dict(
            {"trial_index": 0, "n": 5, "seed": 1, "timing_ms": 0.1, "error": None}
        )
