"""
Pydantic schemas for experiment documents.

An experiment document is the resolved form of a preset from config.json
after scale and command-line overrides. Validation happens here; the
harness then converts the document into frozen domain configs.
"""

from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models import ProtocolKind, SweepParameter


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============================================================================
# EXPERIMENT SCHEMAS
# ============================================================================

class ProtocolSchema(_Schema):
    """Protocol kind, clock and the parameter of the active kind"""
    kind: ProtocolKind = ProtocolKind.FRP
    reset_length: int = Field(6, ge=1)
    measurement_strength: float = Field(0.0, ge=0.0, le=float(np.pi / 2))
    decay_rate: float = Field(0.0, ge=0.0)
    clock_cycle: float = Field(50.0, gt=0.0)
    multiplexing: int = Field(30, ge=1)
    washout: int = Field(1000, ge=0)
    backaction_per_subreadout: bool = False
    integrator: Literal["rk4", "expm"] = "rk4"
    rk4_steps_per_cycle: int = Field(200, ge=1)
    drive_offset: float = 0.5
    drive_scale: float = 0.5


class HamiltonianSchema(_Schema):
    """Static TFIM (or driven-model coupling) distribution"""
    n_qubits: int = Field(4, ge=1, le=8)
    field_strength: float = 1.0
    coupling_low: float = 0.0
    coupling_high: float = 1.0
    normalize_spectral_radius: bool = True

    @model_validator(mode="after")
    def _check_range(self):
        if self.coupling_low > self.coupling_high:
            raise ValueError("coupling_low exceeds coupling_high")
        return self


class NoiseSchema(_Schema):
    """Shot noise; null n_measurements means noiseless"""
    n_measurements: Optional[float] = Field(1e10, ge=1.0)
    scale_with_measurement_strength: bool = True


class IpcSchema(_Schema):
    """Capacity budget and shuffle cutoff"""
    enabled: bool = True
    n_inputs: int = Field(20000, ge=100)
    max_total_degree: int = Field(6, ge=1, le=6)
    max_delay_per_degree: Dict[int, int] = Field(
        default_factory=lambda: {1: 60, 2: 30, 3: 15, 4: 10, 5: 8, 6: 6}
    )
    early_stop_window: int = Field(5, ge=1)
    n_shuffles: int = Field(100, ge=20)
    null_targets_per_family: int = Field(10, ge=1)
    quantile: float = Field(0.999, gt=0.0, le=1.0)
    held_out_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    max_workers: Optional[int] = Field(None, ge=1)


class BenchmarkSchema(_Schema):
    """Series generation settings"""
    lorenz_transient: float = Field(100.0, ge=0.0)
    lorenz_initial_jitter: float = Field(1e-3, ge=0.0)
    mackey_glass_transient: float = Field(1000.0, ge=0.0)
    mackey_glass_interpolation: Literal["linear", "cubic"] = "cubic"


class ExperimentSchema(_Schema):
    """One experiment: a protocol run per Hamiltonian sample"""
    name: str = "experiment"
    protocol: ProtocolSchema = Field(default_factory=ProtocolSchema)
    hamiltonian: HamiltonianSchema = Field(default_factory=HamiltonianSchema)
    noise: NoiseSchema = Field(default_factory=NoiseSchema)
    ipc: IpcSchema = Field(default_factory=IpcSchema)
    benchmarks: BenchmarkSchema = Field(default_factory=BenchmarkSchema)
    tasks: List[Literal["LXX", "LXZ", "MG"]] = Field(default_factory=lambda: ["LXX", "LXZ", "MG"])
    n_train: int = Field(50000, ge=10)
    n_test: int = Field(5000, ge=2)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    n_hamiltonians: int = Field(1, ge=1)

    @field_validator("tasks")
    @classmethod
    def _unique_tasks(cls, tasks: List[str]) -> List[str]:
        if len(set(tasks)) != len(tasks):
            raise ValueError(f"duplicate task in {tasks}")
        return tasks


# ============================================================================
# SWEEP SCHEMAS
# ============================================================================

class GridSpecSchema(_Schema):
    """Evenly spaced grid (logarithmic when log=True)"""
    start: float
    stop: float
    num: int = Field(..., ge=1)
    log: bool = False

    def values(self) -> List[float]:
        if self.log:
            if self.start <= 0 or self.stop <= 0:
                raise ValueError("log grid needs positive bounds")
            return [float(v) for v in np.logspace(np.log10(self.start), np.log10(self.stop), self.num)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.num)]


class SweepSchema(_Schema):
    """Swept parameter and its grid (explicit values or a grid spec)"""
    parameter: SweepParameter
    grid: List[float] = Field(default_factory=list)
    grid_spec: Optional[GridSpecSchema] = None

    @model_validator(mode="after")
    def _resolve_grid(self):
        if not self.grid and self.grid_spec is not None:
            self.grid = self.grid_spec.values()
            self.grid_spec = None
        if not self.grid:
            raise ValueError("sweep grid is empty")
        self.grid = sorted(float(v) for v in self.grid)
        return self


class ConfigDocument(_Schema):
    """Resolved configuration document"""
    preset: Optional[str] = None
    experiment: ExperimentSchema = Field(default_factory=ExperimentSchema)
    sweep: Optional[SweepSchema] = None

    @model_validator(mode="after")
    def _check_sweep_protocol(self):
        if self.sweep is not None and self.sweep.parameter.protocol != self.experiment.protocol.kind:
            raise ValueError(
                f"sweep over {self.sweep.parameter.value} needs protocol "
                f"{self.sweep.parameter.protocol.value}, got {self.experiment.protocol.kind.value}"
            )
        return self
