"""
Experiment harness: configuration, orchestration, analysis and export.
"""

from .analysis import Reference, aggregate_records, best_points, normalize_records
from .config import build_experiment, build_sweep, config_hash, resolve_document
from .models import ExperimentConfig, JobFailure, ResultRecord, SweepOutcome, SweepSpec
from .orchestrator import ExperimentRunner, run_experiment, run_sweep, run_sweep_async
from .persistence import export, load_records

__all__ = [
    'Reference',
    'aggregate_records',
    'best_points',
    'normalize_records',
    'build_experiment',
    'build_sweep',
    'config_hash',
    'resolve_document',
    'ExperimentConfig',
    'JobFailure',
    'ResultRecord',
    'SweepOutcome',
    'SweepSpec',
    'ExperimentRunner',
    'run_experiment',
    'run_sweep',
    'run_sweep_async',
    'export',
    'load_records',
]
