import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.mathematics.numerics import NumericalFailure
from src.mathematics.scenario import SystemConfig, desired_from_config, load_config, reference_snr
from src.services import ExperimentService, ExperimentSpec
from src.services import experiment_service
from src.services.export_service import AGGREGATE_COLUMNS, TRIAL_COLUMNS

REPO_ROOT = Path(__file__).resolve().parents[2]

TINY_OVERRIDES = {
    "n_tx": 4,
    "n_rf": 2,
    "n_irs": 4,
    "n_bob": 2,
    "n_eve": 2,
    "angle_grid_deg": "-90:90:10",
    "hyper__max_inner_iters": 10,
    "hyper__max_outer_iters": 5,
}


def tiny_spec(**changes) -> ExperimentSpec:
    data = {
        "name": "tiny",
        "overrides": TINY_OVERRIDES,
        "sweep": {"parameter": "mu", "values": [0.2, 0.5, 0.8]},
        "variants": ["proposed_hb", "woirs_isac_fdb"],
        "trials": 2,
        "seed_base": 10,
    }
    data.update(changes)
    return ExperimentSpec.model_validate(data)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def test_spec_validation():
    with pytest.raises(ValidationError):
        tiny_spec(variants=["hybrid"])
    with pytest.raises(ValidationError):
        tiny_spec(sweep={"parameter": "n_antennas", "values": [1]})
    with pytest.raises(ValidationError):
        tiny_spec(trials=0)
    with pytest.raises(ValidationError):
        tiny_spec(name="bad name")


def test_spec_from_file_resolves_base_config(tmp_path):
    (tmp_path / "small.env").write_text("n_tx=6\nn_rf=3\n", encoding="utf-8")
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"name": "file", "base_config": "small.env"}), encoding="utf-8")
    spec = ExperimentSpec.from_file(spec_path)
    assert spec.base().n_tx == 6
    assert spec.sweep_points() == [None]


def test_records_are_complete_and_sorted():
    result = ExperimentService().run_experiment(tiny_spec())
    assert len(result.records) == 2 * 3 * 2
    keys = [r.sort_key for r in result.records]
    assert keys == sorted(keys)
    assert {r.seed for r in result.records} == {10, 11}
    assert all(not r.error for r in result.records)


def test_aggregates_are_trial_means():
    result = ExperimentService().run_experiment(tiny_spec())
    for row in result.aggregates:
        group = [r for r in result.records if r.variant == row["variant"] and r.value == row["value"]]
        assert row["trials"] == len(group) == 2
        rates = [r.secrecy_rate for r in group]
        assert row["secrecy_rate_mean"] == pytest.approx(np.mean(rates), rel=1e-12, abs=1e-300)
        assert min(rates) <= row["secrecy_rate_mean"] <= max(rates)
        expected_stderr = np.std([r.beampattern_mse for r in group], ddof=1) / np.sqrt(2)
        assert row["beampattern_mse_stderr"] == pytest.approx(expected_stderr, rel=1e-9, abs=1e-300)
    for trend in result.trends.values():
        for value in trend.values():
            assert value is None or -1.0 <= value <= 1.0


def test_outputs_written(tmp_path):
    ExperimentService().run_experiment(tiny_spec(), out_dir=tmp_path)
    proposed = read_rows(tmp_path / "tiny_proposed_hb.csv")
    assert list(proposed[0]) == TRIAL_COLUMNS
    assert len(proposed) == 6
    aggregate = read_rows(tmp_path / "tiny_aggregate.csv")
    assert list(aggregate[0]) == AGGREGATE_COLUMNS
    assert len(aggregate) == 6

    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["name"] == "tiny"
    assert manifest["trials_total"] == 12
    assert manifest["seeds"] == [10, 11]
    assert manifest["failures"] == []
    assert "numpy" in manifest["software"]


def test_reruns_are_byte_identical(tmp_path):
    spec = tiny_spec(trials=1)
    ExperimentService().run_experiment(spec, out_dir=tmp_path / "first")
    ExperimentService().run_experiment(spec, out_dir=tmp_path / "second")
    for name in ("tiny_proposed_hb.csv", "tiny_woirs_isac_fdb.csv", "tiny_aggregate.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_worker_pool_matches_serial_run():
    spec = tiny_spec(trials=1, variants=["proposed_hb"])
    serial = ExperimentService(threads=1).run_experiment(spec)
    pooled = ExperimentService(threads=2).run_experiment(spec)
    assert [r.secrecy_rate for r in serial.records] == [r.secrecy_rate for r in pooled.records]
    assert [r.beampattern_mse for r in serial.records] == [r.beampattern_mse for r in pooled.records]


def test_failed_trials_are_recorded(monkeypatch, tmp_path):
    def failing(*args, **kwargs):
        raise NumericalFailure("power equation not bracketed")

    monkeypatch.setattr(experiment_service, "exterior_penalty", failing)
    result = ExperimentService().run_experiment(tiny_spec(trials=1), out_dir=tmp_path)
    assert len(result.records) == 6
    assert all(r.error.startswith("NumericalFailure") for r in result.records)
    assert all(math.isnan(r.secrecy_rate) and not r.converged for r in result.records)
    assert all(math.isnan(row["secrecy_rate_mean"]) for row in result.aggregates)

    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert len(manifest["failures"]) == 6


def test_invalid_variant_combination_fails_before_running():
    spec = tiny_spec(variants=["subconnected_hb"], overrides={**TINY_OVERRIDES, "n_rf": 3})
    with pytest.raises(ValueError):
        ExperimentService().build_tasks(spec)


def test_service_rejects_zero_threads():
    with pytest.raises(ValueError):
        ExperimentService(threads=0)


@pytest.mark.slow
def test_mu_sweep_trends():
    spec = ExperimentSpec.model_validate({
        "name": "mu_trend",
        "sweep": {"parameter": "mu", "values": [0.1, 0.3, 0.5, 0.7, 0.9]},
        "variants": ["proposed_hb"],
        "trials": 10,
    })
    result = ExperimentService().run_experiment(spec)
    trend = result.trends["proposed_hb"]
    assert trend["secrecy_rate"] is not None and trend["secrecy_rate"] > 0


@pytest.mark.parametrize("path", sorted((REPO_ROOT / "configs").glob("*.env")), ids=lambda p: p.name)
def test_shipped_scenarios_load(path):
    cfg = load_config(path)
    assert desired_from_config(cfg).energy > 0


@pytest.mark.parametrize("path", sorted((REPO_ROOT / "experiments").glob("*.json")), ids=lambda p: p.name)
def test_shipped_experiments_build(path):
    spec = ExperimentSpec.from_file(path)
    tasks = ExperimentService().build_tasks(spec)
    assert len(tasks) == len(spec.variants) * len(spec.sweep_points()) * spec.trials


def test_default_scenario_file_matches_defaults():
    assert load_config(REPO_ROOT / "configs" / "default.env") == SystemConfig()


def test_unit_noise_scenario_has_negligible_snr():
    cfg = load_config(REPO_ROOT / "configs" / "unit_noise.env")
    assert cfg.secrecy_scaling == "none"
    assert reference_snr(cfg) < 1e-6
    assert reference_snr(SystemConfig()) > 1.0


def test_shipped_experiments_cover_every_sweep():
    specs = {p.stem: ExperimentSpec.from_file(p) for p in (REPO_ROOT / "experiments").glob("*.json")}
    swept = {spec.sweep.parameter for spec in specs.values() if spec.sweep is not None}
    assert {"mu", "n_tx", "n_rf", "n_irs", "n_eve", "n_bob"} <= swept
    assert specs["rf_chain_sweep"].sweep.values == [2, 3, 4, 5, 6, 7, 8, 9, 10]
    assert specs["irs_sweep"].sweep.values == [16, 32, 48, 64, 80]
    assert {"irs_c_hb", "irs_c_fdb"} <= set(specs["irs_sweep"].variants)
    assert specs["antenna_sweep"].base().n_rf == 4
    assert specs["single_target"].base().target_centers == (0.0,)
