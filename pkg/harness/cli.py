#!/usr/bin/env python3
"""
Quantum reservoir harness CLI.

Usage:
    python main.py ipc [--preset frp-default] [--seed N]        # single IpcReport
    python main.py task --task LXZ [--preset mrp]               # single task NRMSE
    python main.py sweep --preset wmp --out results.csv         # full sweep
    python main.py gen-data [--preset frp-default]              # cache benchmark series
    python main.py show-config --preset dsp --scale full        # resolved config dump

Errors are reported as one JSON object on stderr with exit code 1.
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from benchmarks.cache import SeriesCache
from errors import QrcError
from models import TaskKind
from .analysis import best_points, sweep_table
from .config import (
    DEFAULT_PRESET, DEFAULT_SCALE, build_experiment, build_sweep, config_hash,
    default_cache_dir, default_output_dir, load_catalog, resolve_document,
)
from .database import ResultDatabase
from .orchestrator import ExperimentRunner, prepare_series, run_sweep
from .persistence import FORMATS, export

logger = logging.getLogger(__name__)


class HarnessCLI:
    """Command-line interface for experiments and sweeps."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.catalog = load_catalog(args.config)

    def _document(self, overrides: Optional[Dict[str, Any]] = None):
        return resolve_document(
            preset=self.args.preset,
            scale=self.args.scale,
            overrides=overrides,
            seed=self.args.seed,
            catalog=self.catalog,
        )

    def _cache(self) -> SeriesCache:
        return SeriesCache(default_cache_dir())

    def _output_path(self, name: str) -> Path:
        if self.args.out:
            return Path(self.args.out)
        return default_output_dir() / f"{name}.{self.args.format}"

    def cmd_ipc(self) -> Dict[str, Any]:
        """Single IpcReport for the first Hamiltonian of the preset."""
        document = self._document({"experiment": {"tasks": [], "n_hamiltonians": 1}})
        config = build_experiment(document.experiment)
        record = ExperimentRunner().run_job(config)
        report = record.ipc_report.to_dict() if record.ipc_report else {}
        print(f"\n{'='*70}")
        print(f" IPC: {config.name} (N_R = {config.readout_dimension})")
        print(f"{'='*70}")
        for degree, value in enumerate(record.per_degree, start=1):
            print(f"  IPC_{degree}: {value:.4f}")
        print(f"  linear: {record.ipc_linear:.4f}  nonlinear: {record.ipc_nonlinear:.4f}  "
              f"total: {record.ipc_total:.4f}")
        return {"config_hash": config.config_hash, "runtime_s": record.runtime_s, **report}

    def cmd_task(self) -> Dict[str, Any]:
        """Single task NRMSE for the first Hamiltonian of the preset."""
        task = TaskKind(self.args.task)
        document = self._document({"experiment": {"tasks": [task.value], "n_hamiltonians": 1,
                                                   "ipc": {"enabled": False}}})
        config = build_experiment(document.experiment)
        record = ExperimentRunner(cache=self._cache()).run_job(config)
        value = record.nrmse[task.value]
        print(f" {task.value} NRMSE ({config.name}): {value:.6f}")
        return {"task": task.value, "nrmse": value, "config_hash": config.config_hash,
                "runtime_s": record.runtime_s}

    def cmd_sweep(self) -> Dict[str, Any]:
        """Full sweep from the preset, exported to --out."""
        document = self._document()
        sweep = build_sweep(document)
        print(f"\n{'='*70}")
        print(f" Sweep {sweep.base.name}: {sweep.parameter.value} over {len(sweep.grid)} points "
              f"x {sweep.base.n_hamiltonians} Hamiltonians")
        print(f"{'='*70}\n")
        outcome = run_sweep(sweep, max_workers=self.args.jobs, cache=self._cache())
        path = export(outcome.records, self.args.format, self._output_path(sweep.base.name))
        summary_path = path.with_name(f"{path.stem}_summary.csv")
        sweep_table(outcome.records).to_csv(summary_path, index=False, float_format="%.17g")
        run_id = None
        if self.args.db:
            database = ResultDatabase(self.args.db)
            database.create_tables()
            run_id = database.save_records(
                outcome.records, name=sweep.base.name, parameter=sweep.parameter.value,
                config=document.model_dump(mode="json"),
            )
        best = best_points(outcome.records)
        for metric in ("ipc_linear", "ipc_nonlinear", "ipc_total"):
            if metric in best:
                entry = best[metric]
                print(f"  best {metric}: {entry['value']:.3f} ± {entry['se']:.3f} at {entry['parameter']:g}")
        print(f"\n Wrote {len(outcome.records)} records to {path}")
        if outcome.failures:
            print(f" {len(outcome.failures)} job(s) failed; see log")
        return {
            "records": len(outcome.records),
            "failures": [f.__dict__ for f in outcome.failures],
            "path": str(path),
            "summary_path": str(summary_path),
            "run_id": run_id,
        }

    def cmd_gen_data(self) -> Dict[str, Any]:
        """Generate and cache the benchmark series of the preset."""
        document = self._document()
        config = build_experiment(document.experiment)
        cache = self._cache()
        series = prepare_series(config, cache)
        files = {}
        for name, values in series.items():
            spec = config.lorenz if name == "lorenz" else config.mackey_glass
            files[name] = str(cache.path_for(spec, len(values)))
            print(f" {name}: {len(values)} samples -> {files[name]}")
        return {"files": files}

    def cmd_show_config(self) -> Dict[str, Any]:
        """Resolved configuration document and its hash."""
        document = self._document()
        data = document.model_dump(mode="json")
        print(json.dumps(data, indent=2))
        return {"config_hash": config_hash(document.experiment)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrc", description="Quantum reservoir computing experiments")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="preset catalog (default: config.json)")
    common.add_argument("--preset", default=DEFAULT_PRESET)
    common.add_argument("--scale", default=DEFAULT_SCALE, choices=["desk", "full"])
    common.add_argument("--seed", type=int, default=None, help="master seed (u64)")
    common.add_argument("--out", default=None, help="output path")
    common.add_argument("--format", default="csv", choices=FORMATS)
    common.add_argument("--jobs", type=int, default=None, help="worker processes for sweeps")
    common.add_argument("--db", default=None, help="SQLAlchemy URL for storing sweep records")
    common.add_argument("--log-level", default=os.environ.get("QRC_LOG_LEVEL", "INFO"))

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("ipc", parents=[common], help="single IpcReport")
    task = commands.add_parser("task", parents=[common], help="single task NRMSE")
    task.add_argument("--task", required=True, choices=[k.value for k in TaskKind])
    commands.add_parser("sweep", parents=[common], help="full sweep from config")
    commands.add_parser("gen-data", parents=[common], help="cache benchmark series")
    commands.add_parser("show-config", parents=[common], help="resolved config dump")
    return parser


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cli = HarnessCLI(args)
        handler = getattr(cli, f"cmd_{args.command.replace('-', '_')}")
        result = handler()
        logger.debug(f"{args.command} result: {json.dumps(_json_safe(result))}")
        return 0
    except (QrcError, ValidationError, OSError, KeyError) as e:
        logger.debug("Command failed", exc_info=True)
        print(json.dumps({"error": type(e).__name__, "message": str(e)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
