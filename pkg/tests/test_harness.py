"""
Tests for configuration, orchestration, analysis, export and the CLI.

Experiment runs use a two-qubit reservoir with short series so the whole
pipeline finishes in seconds.
"""

import json
import math

import numpy as np
import pytest

from errors import ConfigError, ExportError
from harness import (
    ExperimentRunner, Reference, ResultRecord, aggregate_records, best_points, build_experiment,
    build_sweep, config_hash, export, load_records, normalize_records, resolve_document,
    run_experiment, run_sweep, run_sweep_async,
)
from harness.cli import main
from harness.config import deep_merge
from harness.database import ResultDatabase
from harness.orchestrator import build_reservoir, noise_spec, series_lengths
from ipc.models import IpcReport
from models import ProtocolKind, SweepParameter
from reservoir.hamiltonians import DrivenTfimSpec

TINY_EXPERIMENT = {
    "name": "tiny",
    "protocol": {"kind": "FRP", "clock_cycle": 5.0, "multiplexing": 3, "washout": 20},
    "hamiltonian": {"n_qubits": 2},
    "ipc": {
        "n_inputs": 400,
        "max_total_degree": 2,
        "max_delay_per_degree": {"1": 5, "2": 3},
        "n_shuffles": 20,
        "max_workers": 1,
    },
    "benchmarks": {"lorenz_transient": 1.0, "mackey_glass_transient": 30.0},
    "n_train": 200,
    "n_test": 50,
    "n_hamiltonians": 2,
}

TINY_CATALOG = {
    "presets": {
        "tiny": {"experiment": TINY_EXPERIMENT},
        "tiny-mrp": {
            "experiment": deep_merge(TINY_EXPERIMENT, {
                "name": "tiny-mrp",
                "protocol": {"kind": "MRP", "reset_length": 3},
            }),
            "sweep": {"parameter": "reset_length", "grid": [2, 4]},
        },
    },
    "scales": {"desk": {}, "full": {}},
}


def tiny_document(preset="tiny", overrides=None, seed=None):
    return resolve_document(preset, overrides=overrides, seed=seed, catalog=TINY_CATALOG)


def tiny_config(overrides=None):
    return build_experiment(tiny_document(overrides=overrides).experiment)


def record(parameter, per_degree, nrmse=None, ham_index=0, grid_index=0):
    return ResultRecord(
        parameter=parameter,
        seed=0,
        ham_index=ham_index,
        grid_index=grid_index,
        per_degree=tuple(per_degree) + (0.0,) * (6 - len(per_degree)),
        nrmse=nrmse or {},
        runtime_s=0.5,
        config_hash="0123abcd",
    )


def summary(records):
    return [(r.grid_index, r.ham_index, r.per_degree, r.nrmse, r.config_hash) for r in records]


# ============================================================================
# CONFIGURATION
# ============================================================================

class TestResolveDocument:
    """Tests for preset resolution against the shipped config.json."""

    def test_desk_scale(self):
        experiment = resolve_document("frp-default").experiment
        assert experiment.n_train == 20000
        assert experiment.n_hamiltonians == 5
        assert experiment.ipc.n_inputs == 20000
        assert experiment.protocol.multiplexing == 30

    def test_full_scale(self):
        experiment = resolve_document("frp-default", scale="full").experiment
        assert experiment.n_train == 50000
        assert experiment.n_test == 5000
        assert experiment.n_hamiltonians == 100

    def test_preset_specific_scale(self):
        """The chaos preset samples more Hamiltonians at desk scale."""
        document = resolve_document("chaos")
        assert document.experiment.n_hamiltonians == 10
        assert document.experiment.hamiltonian.normalize_spectral_radius is False
        grid = document.sweep.grid
        assert len(grid) == 13
        assert grid == sorted(grid)
        assert grid[0] == pytest.approx(0.01)
        assert grid[-1] == pytest.approx(100.0)

    def test_overrides_and_seed(self):
        document = resolve_document(
            "frp-default", overrides={"experiment": {"n_test": 7}}, seed=42,
        )
        assert document.experiment.n_test == 7
        assert document.experiment.seed == 42
        assert document.experiment.n_train == 20000

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            resolve_document("nope")

    def test_unknown_scale(self):
        with pytest.raises(ConfigError):
            resolve_document("frp-default", scale="huge")

    def test_extra_key_rejected(self):
        with pytest.raises(ConfigError):
            resolve_document("frp-default", overrides={"experiment": {"protocol": {"speed": 1}}})

    def test_sweep_protocol_mismatch(self):
        """A reset_length sweep on an FRP experiment is rejected."""
        with pytest.raises(ConfigError):
            resolve_document("mrp", overrides={"experiment": {"protocol": {"kind": "FRP"}}})

    def test_deep_merge_keeps_siblings(self):
        merged = deep_merge({"a": {"b": 1, "c": 2}}, {"a": {"c": 3}})
        assert merged == {"a": {"b": 1, "c": 3}}


class TestConfigHash:
    """Tests for config_hash."""

    def test_stable(self):
        assert config_hash(tiny_document()) == config_hash(tiny_document())

    def test_tracks_seed(self):
        assert config_hash(tiny_document(seed=1)) != config_hash(tiny_document(seed=2))

    def test_key_order_irrelevant(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})


class TestBuildExperiment:
    """Tests for build_experiment and build_sweep."""

    def test_domain_config(self):
        config = build_experiment(resolve_document("frp-default").experiment)
        assert config.protocol.kind == ProtocolKind.FRP
        assert config.readout_dimension == 120
        assert config.n_measurements == pytest.approx(1e10)
        assert len(config.config_hash) == 64

    def test_noiseless(self):
        config = tiny_config({"experiment": {"noise": {"n_measurements": None}}})
        assert math.isinf(config.n_measurements)

    def test_sweep_needs_sweep_section(self):
        with pytest.raises(ConfigError):
            build_sweep(resolve_document("frp-default"))

    def test_sweep_points(self):
        sweep = build_sweep(resolve_document("mrp"))
        assert sweep.parameter == SweepParameter.RESET_LENGTH
        assert sweep.point(0).protocol.reset_length == 2
        assert sweep.point(6).protocol.reset_length == 20

    def test_reset_length_must_be_integer(self):
        config = build_sweep(resolve_document("mrp")).base
        with pytest.raises(ConfigError):
            config.with_parameter(SweepParameter.RESET_LENGTH, 2.5)

    def test_field_strength_parameter(self):
        sweep = build_sweep(resolve_document("chaos"))
        assert sweep.point(0).hamiltonian.field_strength == pytest.approx(0.01)
        assert sweep.point(0).parameter_value(SweepParameter.FIELD_STRENGTH) == pytest.approx(0.01)


# ============================================================================
# ORCHESTRATION
# ============================================================================

class TestJobSetup:
    """Tests for per-job reservoir and noise construction."""

    def test_dsp_builds_driven_spec(self):
        config = build_experiment(resolve_document("dsp").experiment)
        reservoir = build_reservoir(config, 0)
        assert isinstance(reservoir, DrivenTfimSpec)
        assert reservoir.n_qubits == 4

    def test_ensemble_members_differ(self):
        config = tiny_config()
        assert not np.allclose(build_reservoir(config, 0), build_reservoir(config, 1))
        assert np.array_equal(build_reservoir(config, 1), build_reservoir(config, 1))

    def test_wmp_noise_scaling(self):
        sweep = build_sweep(resolve_document("wmp"))
        assert noise_spec(sweep.point(0)).wmp_strength is None
        assert noise_spec(sweep.point(3)).wmp_strength == pytest.approx(0.11)

    def test_wmp_noise_scaling_disabled(self):
        document = resolve_document(
            "wmp", overrides={"experiment": {"noise": {"scale_with_measurement_strength": False}}},
        )
        assert noise_spec(build_experiment(document.experiment)).wmp_strength is None

    def test_series_lengths(self):
        assert series_lengths(tiny_config()) == 20 + 200 + 50 + 1


@pytest.mark.integration
class TestRunExperiment:
    """End-to-end runs on the tiny preset."""

    def test_records_per_hamiltonian(self):
        records = run_experiment(tiny_config())
        assert [r.ham_index for r in records] == [0, 1]
        for r in records:
            assert set(r.nrmse) == {"LXX", "LXZ", "MG"}
            assert r.ipc_report is not None
            assert r.ipc_report.readout_dimension == 6
            assert 0.0 < r.ipc_total <= 6.0 + 1e-6

    def test_deterministic(self):
        config = tiny_config()
        assert summary(run_experiment(config)) == summary(run_experiment(config))

    def test_long_reset_window_matches_frp(self):
        """MRP with a window longer than the input stream reproduces FRP."""
        frp = tiny_config({"experiment": {"tasks": [], "n_hamiltonians": 1}})
        mrp = tiny_config({"experiment": {
            "tasks": [], "n_hamiltonians": 1, "protocol": {"kind": "MRP", "reset_length": 1000},
        }})
        a = run_experiment(frp)[0].per_degree
        b = run_experiment(mrp)[0].per_degree
        assert np.allclose(a, b, atol=1e-8)

    def test_failures_are_collected(self):
        """A missing benchmark series fails the job without raising."""
        config = tiny_config({"experiment": {"tasks": ["LXX"], "ipc": {"enabled": False}}})
        runner = ExperimentRunner(series={})
        assert runner.run_experiment(config) == []
        assert [f.ham_index for f in runner.failures] == [0, 1]
        assert "KeyError" in runner.failures[0].reason


@pytest.mark.integration
class TestRunSweep:
    """Sweeps over the tiny MRP preset."""

    @pytest.fixture
    def sweep(self):
        return build_sweep(tiny_document("tiny-mrp"))

    def test_single_point_matches_experiment(self):
        document = tiny_document("tiny-mrp", overrides={"sweep": {"grid": [3]}})
        sweep = build_sweep(document)
        outcome = run_sweep(sweep, max_workers=1)
        direct = run_experiment(sweep.base)
        assert [r.per_degree for r in outcome.records] == [r.per_degree for r in direct]
        assert [r.nrmse for r in outcome.records] == [r.nrmse for r in direct]
        assert all(r.parameter == 3.0 for r in outcome.records)
        assert {r.config_hash for r in outcome.records} == {r.config_hash for r in direct}

    def test_point_hash_matches_direct_config(self, sweep):
        """A grid point hashes like the same experiment resolved directly."""
        direct = build_experiment(tiny_document(
            "tiny-mrp", overrides={"experiment": {"protocol": {"reset_length": 4}}}).experiment)
        assert sweep.point(1).config_hash == direct.config_hash
        assert sweep.point(0).config_hash != direct.config_hash

    def test_zero_workers_rejected(self, sweep):
        with pytest.raises(ConfigError):
            run_sweep(sweep, max_workers=0)

    def test_grid_changes_hash(self, sweep):
        records = run_sweep(sweep, max_workers=1).records
        assert [(r.grid_index, r.ham_index) for r in records] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert records[0].config_hash == records[1].config_hash
        assert records[0].config_hash != records[2].config_hash

    @pytest.mark.slow
    def test_process_pool_matches_serial(self, sweep):
        serial = run_sweep(sweep, max_workers=1)
        pooled = run_sweep(sweep, max_workers=2)
        assert summary(pooled.records) == summary(serial.records)
        assert pooled.failures == []

    @pytest.mark.slow
    async def test_async_sweep(self, sweep):
        outcome = await run_sweep_async(sweep, max_workers=2)
        assert len(outcome.records) == 4
        assert [r.sort_key for r in outcome.records] == sorted(r.sort_key for r in outcome.records)


# ============================================================================
# ANALYSIS
# ============================================================================

class TestAnalysis:
    """Tests for aggregation, normalization and best points."""

    @pytest.fixture
    def records(self):
        return [
            record(1.0, (2.0, 1.0), {"MG": 0.2}, ham_index=0),
            record(1.0, (4.0, 1.0), {"MG": 0.4}, ham_index=1),
            record(2.0, (6.0, 0.5), {"MG": 0.1}, grid_index=1),
        ]

    def test_aggregate(self, records):
        frame = aggregate_records(records).set_index("parameter")
        assert frame.loc[1.0, "n"] == 2
        assert frame.loc[1.0, "ipc_linear_mean"] == pytest.approx(3.0)
        assert frame.loc[1.0, "ipc_linear_se"] == pytest.approx(1.0)
        assert frame.loc[2.0, "ipc_linear_se"] == 0.0
        assert frame.loc[2.0, "ipc_total_mean"] == pytest.approx(6.5)

    def test_aggregate_empty(self):
        assert aggregate_records([]).empty

    def test_pointwise_reference(self, records):
        frame = normalize_records(records, Reference.pointwise())
        assert np.allclose(frame[["memory", "nonlinearity", "total"]].to_numpy(), 1.0)

    def test_parameter_reference(self, records):
        frame = normalize_records(records, Reference.at_parameter(1.0)).set_index("parameter")
        assert frame.loc[1.0, "memory"] == pytest.approx(1.0)
        assert frame.loc[2.0, "memory"] == pytest.approx(2.0)
        assert frame.loc[2.0, "nonlinearity"] == pytest.approx(0.5)

    def test_max_memory_reference(self, records):
        frame = normalize_records(records, Reference.max_memory()).set_index("parameter")
        assert frame.loc[2.0, "memory"] == 1.0
        assert frame.loc[1.0, "memory"] == pytest.approx(0.5)

    def test_records_reference(self, records):
        frp = [record(float("nan"), (3.0, 2.0))]
        frame = normalize_records(records, Reference.from_records(frp)).set_index("parameter")
        assert frame.loc[2.0, "memory"] == pytest.approx(2.0)
        assert frame.loc[1.0, "nonlinearity"] == pytest.approx(0.5)

    def test_missing_reference_parameter(self, records):
        with pytest.raises(ConfigError):
            normalize_records(records, Reference.at_parameter(5.0))

    def test_zero_reference(self):
        flat = [record(1.0, (1.0, 0.0)), record(2.0, (2.0, 0.0), grid_index=1)]
        with pytest.raises(ConfigError):
            normalize_records(flat, Reference.at_parameter(1.0))

    def test_unknown_reference_kind(self):
        with pytest.raises(ConfigError):
            Reference("median")

    def test_best_points(self, records):
        best = best_points(records)
        assert best["ipc_linear"]["parameter"] == 2.0
        assert best["ipc_linear"]["value"] == pytest.approx(6.0)
        assert best["nrmse_mg"]["parameter"] == 2.0
        assert best["nrmse_mg"]["value"] == pytest.approx(0.1)
        assert "nrmse_lxx" not in best

    def test_best_points_relative_change(self, records):
        best = best_points(records, reference=[record(float("nan"), (3.0, 1.0), {"MG": 0.2})])
        assert best["ipc_linear"]["relative_change"] == pytest.approx(1.0)
        assert best["nrmse_mg"]["relative_change"] == pytest.approx(-0.5)


# ============================================================================
# EXPORT AND STORAGE
# ============================================================================

class TestExport:
    """Tests for CSV / JSON export."""

    @pytest.fixture
    def records(self):
        report = IpcReport((1.25, 0.5, 0.0, 0.0, 0.0, 0.0), 0.01, 12, 4, readout_dimension=6,
                           family_cutoffs={"1:1": 0.01}, per_family={"1": 1.25, "2": 0.5})
        first = record(0.1, (1.25, 0.5), {"LXX": 0.123456789012345, "MG": 0.5})
        first.ipc_report = report
        second = record(1.0 / 3.0, (2.0, 0.25), {"LXZ": 0.75}, ham_index=1)
        return [first, second]

    def test_csv_round_trip(self, records, tmp_path):
        path = export(records, "csv", tmp_path / "results.csv")
        loaded = load_records(path)
        for original, back in zip(records, loaded):
            original.ipc_report = None
            assert back == original

    def test_csv_column_order(self, records, tmp_path):
        path = export(records, "csv", tmp_path / "results.csv")
        header = path.read_text().splitlines()[0].split(",")
        assert header[:4] == ["parameter", "seed", "ham_index", "ipc_1"]
        assert header[-3:] == ["runtime_s", "config_hash", "grid_index"]

    def test_json_round_trip(self, records, tmp_path):
        path = export(records, "json", tmp_path / "results.json")
        assert load_records(path) == records

    def test_unsupported_format(self, records, tmp_path):
        with pytest.raises(ExportError):
            export(records, "parquet", tmp_path / "results.parquet")

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text("parameter,seed\n1.0,0\n")
        with pytest.raises(ExportError):
            load_records(path)


class TestResultDatabase:
    """Tests for ResultDatabase."""

    @pytest.fixture
    def database(self, tmp_path):
        database = ResultDatabase(f"sqlite:///{tmp_path / 'results.db'}")
        database.create_tables()
        return database

    def test_save_and_load(self, database):
        records = [
            record(2.0, (1.5, 0.5), {"MG": 0.3}),
            record(2.0, (1.0, 0.25), ham_index=1),
        ]
        records[0].ipc_report = IpcReport((1.5, 0.5, 0.0, 0.0, 0.0, 0.0), 0.02, 10, 3)
        run_id = database.save_records(records, name="tiny", parameter="reset_length", config={"a": 1})
        assert database.get_records(run_id) == records

    def test_nan_round_trip(self, database):
        missing = ResultRecord(parameter=float("nan"), seed=3, ham_index=0)
        run_id = database.save_records([missing], name="frp")
        back = database.get_records(run_id)[0]
        assert math.isnan(back.parameter)
        assert all(math.isnan(v) for v in back.per_degree)
        assert back.nrmse == {}

    def test_list_sweeps(self, database):
        database.save_records([record(1.0, (1.0,))], name="first", run_id="run-a")
        database.save_records([record(1.0, (1.0,)), record(2.0, (1.0,))], name="second", run_id="run-b")
        runs = {run["run_id"]: run for run in database.list_sweeps()}
        assert runs["run-b"]["n_records"] == 2
        assert runs["run-a"]["name"] == "first"

    def test_unknown_run(self, database):
        assert database.get_records("run-missing") == []


# ============================================================================
# CLI
# ============================================================================

class TestCli:
    """Tests for the command-line entry point."""

    @pytest.fixture
    def catalog_path(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QRC_CACHE_DIR", str(tmp_path / "cache"))
        path = tmp_path / "catalog.json"
        path.write_text(json.dumps(TINY_CATALOG))
        return path

    def test_show_config(self, capsys):
        assert main(["show-config", "--preset", "dsp"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["experiment"]["protocol"]["kind"] == "DSP"
        assert len(data["sweep"]["grid"]) == 13

    def test_bad_preset(self, capsys):
        assert main(["show-config", "--preset", "nope"]) == 1
        lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
        error = json.loads(lines[-1])
        assert error["error"] == "ConfigError"
        assert "nope" in error["message"]

    def test_missing_catalog(self, tmp_path, capsys):
        assert main(["show-config", "--config", str(tmp_path / "missing.json")]) == 1

    def test_zero_jobs(self, catalog_path, capsys):
        assert main(["sweep", "--config", str(catalog_path), "--preset", "tiny-mrp", "--jobs", "0"]) == 1
        lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
        error = json.loads(lines[-1])
        assert error["error"] == "ConfigError"
        assert "max_workers" in error["message"]

    @pytest.mark.integration
    def test_ipc_command(self, catalog_path, capsys):
        assert main(["ipc", "--config", str(catalog_path), "--preset", "tiny"]) == 0
        assert "IPC_1" in capsys.readouterr().out

    @pytest.mark.integration
    def test_task_command(self, catalog_path, capsys):
        assert main(["task", "--config", str(catalog_path), "--preset", "tiny", "--task", "MG"]) == 0
        assert "MG NRMSE" in capsys.readouterr().out

    @pytest.mark.integration
    def test_sweep_command(self, catalog_path, tmp_path):
        out = tmp_path / "out" / "sweep.csv"
        db_url = f"sqlite:///{tmp_path / 'sweeps.db'}"
        code = main([
            "sweep", "--config", str(catalog_path), "--preset", "tiny-mrp",
            "--out", str(out), "--jobs", "1", "--db", db_url,
        ])
        assert code == 0
        records = load_records(out)
        assert len(records) == 4
        assert sorted({r.parameter for r in records}) == [2.0, 4.0]
        assert (tmp_path / "out" / "sweep_summary.csv").exists()
        runs = ResultDatabase(db_url).list_sweeps()
        assert runs[0]["n_records"] == 4
        assert runs[0]["parameter"] == "reset_length"

    @pytest.mark.integration
    def test_gen_data_command(self, catalog_path, tmp_path):
        assert main(["gen-data", "--config", str(catalog_path), "--preset", "tiny"]) == 0
        assert len(list((tmp_path / "cache").iterdir())) == 2
