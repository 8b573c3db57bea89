"""
Preset loading, override merging and conversion to domain configs.

config.json holds a "presets" catalog and a "scales" section. A document
is resolved as preset <- scale overrides <- user overrides (deep merge,
field by field) and then validated with the pydantic schemas.
"""

import copy
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from benchmarks.systems import LorenzSpec, MackeyGlassSpec
from errors import ConfigError
from ipc.models import CutoffConfig, IpcBudget
from models import SweepParameter, TaskKind
from reservoir.hamiltonians import TfimSpec
from reservoir.protocols import ClockConfig, ProtocolConfig
from .models import ExperimentConfig, SweepSpec
from .schemas import ConfigDocument, ExperimentSchema

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.json"
DEFAULT_PRESET = "frp-default"
DEFAULT_SCALE = "desk"


def default_output_dir() -> Path:
    return Path(os.environ.get("QRC_OUTPUT_DIR", "./qrc_output"))


def default_cache_dir() -> Path:
    return Path(os.environ.get("QRC_CACHE_DIR", str(default_output_dir() / "cache")))


def load_catalog(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Read the preset catalog."""
    path = Path(path) if path else DEFAULT_CONFIG_PATH
    try:
        with open(path, "r") as f:
            catalog = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if "presets" not in catalog:
        raise ConfigError(f"config {path} has no 'presets' section")
    return catalog


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; values in `override` win, nested dicts merge."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def resolve_document(
    preset: str = DEFAULT_PRESET,
    scale: Optional[str] = DEFAULT_SCALE,
    overrides: Optional[Dict[str, Any]] = None,
    seed: Optional[int] = None,
    catalog: Optional[Dict[str, Any]] = None,
) -> ConfigDocument:
    """Preset, then scale overrides, then user overrides; validated."""
    catalog = catalog if catalog is not None else load_catalog()
    presets = catalog["presets"]
    if preset not in presets:
        raise ConfigError(f"unknown preset {preset!r}; available: {', '.join(sorted(presets))}")
    document = deep_merge({"preset": preset}, presets[preset])
    if scale:
        scales = catalog.get("scales", {})
        if scale not in scales:
            raise ConfigError(f"unknown scale {scale!r}; available: {', '.join(sorted(scales))}")
        scale_section = scales[scale]
        document = deep_merge(document, scale_section.get("default", {}))
        document = deep_merge(document, scale_section.get(preset, {}))
    if overrides:
        document = deep_merge(document, overrides)
    if seed is not None:
        document = deep_merge(document, {"experiment": {"seed": int(seed)}})
    try:
        return ConfigDocument.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration for preset {preset!r}: {e}") from e


def config_hash(document: Union[ConfigDocument, ExperimentSchema, Dict[str, Any]]) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, compact separators)."""
    if isinstance(document, (ConfigDocument, ExperimentSchema)):
        document = document.model_dump(mode="json")
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_experiment(schema: ExperimentSchema) -> ExperimentConfig:
    """Convert a validated experiment schema into domain configs."""
    p = schema.protocol
    protocol = ProtocolConfig(
        kind=p.kind,
        reset_length=p.reset_length,
        measurement_strength=p.measurement_strength,
        decay_rate=p.decay_rate,
        clock=ClockConfig(clock_cycle=p.clock_cycle, multiplexing=p.multiplexing),
        washout=p.washout,
        backaction_per_subreadout=p.backaction_per_subreadout,
        integrator=p.integrator,
        rk4_steps_per_cycle=p.rk4_steps_per_cycle,
        drive_offset=p.drive_offset,
        drive_scale=p.drive_scale,
    )
    h = schema.hamiltonian
    hamiltonian = TfimSpec(
        n_qubits=h.n_qubits,
        field_strength=h.field_strength,
        coupling_low=h.coupling_low,
        coupling_high=h.coupling_high,
        normalize_spectral_radius=h.normalize_spectral_radius,
        seed=schema.seed,
    )
    ipc = schema.ipc
    b = schema.benchmarks
    n_measurements = schema.noise.n_measurements
    return ExperimentConfig(
        name=schema.name,
        protocol=protocol,
        hamiltonian=hamiltonian,
        n_measurements=np.inf if n_measurements is None else float(n_measurements),
        scale_noise_with_strength=schema.noise.scale_with_measurement_strength,
        ipc_enabled=ipc.enabled,
        ipc_inputs=ipc.n_inputs,
        ipc_budget=IpcBudget(
            max_total_degree=ipc.max_total_degree,
            max_delay_per_degree=dict(ipc.max_delay_per_degree),
            early_stop_window=ipc.early_stop_window,
        ),
        cutoff=CutoffConfig(
            n_shuffles=ipc.n_shuffles,
            null_targets_per_family=ipc.null_targets_per_family,
            quantile=ipc.quantile,
            held_out_fraction=ipc.held_out_fraction,
            max_workers=ipc.max_workers,
            seed=schema.seed,
        ),
        tasks=tuple(TaskKind(t) for t in schema.tasks),
        n_train=schema.n_train,
        n_test=schema.n_test,
        seed=schema.seed,
        n_hamiltonians=schema.n_hamiltonians,
        lorenz=LorenzSpec(
            transient=b.lorenz_transient, initial_jitter=b.lorenz_initial_jitter, seed=schema.seed
        ),
        mackey_glass=MackeyGlassSpec(
            transient=b.mackey_glass_transient, interpolation=b.mackey_glass_interpolation
        ),
        config_hash=config_hash(schema),
    )


def _point_schema(schema: ExperimentSchema, parameter: SweepParameter, value: float) -> ExperimentSchema:
    """Experiment schema with the swept field set to `value`."""
    section = "hamiltonian" if parameter == SweepParameter.FIELD_STRENGTH else "protocol"
    if parameter == SweepParameter.RESET_LENGTH:
        value = int(value)
    updated = getattr(schema, section).model_copy(update={parameter.value: value})
    return schema.model_copy(update={section: updated})


def build_sweep(document: ConfigDocument) -> SweepSpec:
    """Sweep over the preset grid; each point carries the hash of its own experiment schema."""
    if document.sweep is None:
        raise ConfigError(f"preset {document.preset!r} defines no sweep")
    schema = document.experiment
    parameter = SweepParameter(document.sweep.parameter)
    grid = tuple(document.sweep.grid)
    return SweepSpec(
        parameter=parameter,
        grid=grid,
        base=build_experiment(schema),
        point_hashes=tuple(config_hash(_point_schema(schema, parameter, v)) for v in grid),
    )
