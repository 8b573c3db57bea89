"""
Domain records for experiments and sweeps.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from benchmarks.systems import LorenzSpec, MackeyGlassSpec
from errors import ConfigError
from ipc.models import CutoffConfig, IpcBudget, IpcReport
from models import ProtocolKind, SweepParameter, TaskKind
from reservoir.hamiltonians import TfimSpec
from reservoir.protocols import ProtocolConfig

IPC_COLUMNS = [f"ipc_{d}" for d in range(1, 7)] + ["ipc_linear", "ipc_nonlinear", "ipc_total"]
NRMSE_COLUMNS = [f"nrmse_{kind.value.lower()}" for kind in TaskKind]
CSV_COLUMNS = (
    ["parameter", "seed", "ham_index"]
    + IPC_COLUMNS
    + NRMSE_COLUMNS
    + ["runtime_s", "config_hash", "grid_index"]
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs, resolved and validated."""
    name: str
    protocol: ProtocolConfig
    hamiltonian: TfimSpec
    n_measurements: float = 1e10
    scale_noise_with_strength: bool = True
    ipc_enabled: bool = True
    ipc_inputs: int = 20000
    ipc_budget: IpcBudget = field(default_factory=IpcBudget)
    cutoff: CutoffConfig = field(default_factory=CutoffConfig)
    tasks: Tuple[TaskKind, ...] = (TaskKind.LXX, TaskKind.LXZ, TaskKind.MG)
    n_train: int = 50000
    n_test: int = 5000
    seed: int = 0
    n_hamiltonians: int = 1
    lorenz: LorenzSpec = field(default_factory=LorenzSpec)
    mackey_glass: MackeyGlassSpec = field(default_factory=MackeyGlassSpec)
    config_hash: str = ""

    def __post_init__(self):
        if self.n_hamiltonians < 1:
            raise ConfigError("n_hamiltonians must be >= 1")
        object.__setattr__(self, "tasks", tuple(TaskKind(t) for t in self.tasks))

    @property
    def readout_dimension(self) -> int:
        return self.hamiltonian.n_qubits * self.protocol.clock.multiplexing

    def parameter_value(self, parameter: SweepParameter) -> float:
        if parameter == SweepParameter.FIELD_STRENGTH:
            return float(self.hamiltonian.field_strength)
        return float(getattr(self.protocol, parameter.value))

    def with_parameter(self, parameter: SweepParameter, value: float) -> "ExperimentConfig":
        """Copy with one swept parameter replaced."""
        if parameter == SweepParameter.FIELD_STRENGTH:
            return replace(self, hamiltonian=replace(self.hamiltonian, field_strength=float(value)))
        if parameter == SweepParameter.RESET_LENGTH:
            if float(value) != int(value):
                raise ConfigError(f"reset_length must be an integer, got {value}")
            value = int(value)
        return replace(self, protocol=replace(self.protocol, **{parameter.value: value}))


@dataclass(frozen=True)
class SweepSpec:
    """Swept parameter, sorted grid and base experiment."""
    parameter: SweepParameter
    grid: Tuple[float, ...]
    base: ExperimentConfig
    point_hashes: Tuple[str, ...] = ()

    def __post_init__(self):
        parameter = SweepParameter(self.parameter)
        object.__setattr__(self, "parameter", parameter)
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        if list(self.grid) != sorted(self.grid):
            raise ConfigError("sweep grid must be sorted")
        if parameter.protocol != self.base.protocol.kind:
            raise ConfigError(
                f"{parameter.value} sweeps need {parameter.protocol.value}, got {self.base.protocol.kind.value}"
            )
        if self.point_hashes and len(self.point_hashes) != len(self.grid):
            raise ConfigError("one config hash per grid point is required")

    def point(self, grid_index: int) -> ExperimentConfig:
        config = self.base.with_parameter(self.parameter, self.grid[grid_index])
        if self.point_hashes:
            config = replace(config, config_hash=self.point_hashes[grid_index])
        return config


@dataclass
class ResultRecord:
    """Outcome of one (grid point, Hamiltonian) job."""
    parameter: float
    seed: int
    ham_index: int
    grid_index: int = 0
    per_degree: Tuple[float, ...] = (math.nan,) * 6
    nrmse: Dict[str, float] = field(default_factory=dict)
    runtime_s: float = 0.0
    config_hash: str = ""
    ipc_report: Optional[IpcReport] = None

    @property
    def ipc_linear(self) -> float:
        return self.per_degree[0]

    @property
    def ipc_nonlinear(self) -> float:
        return float(sum(self.per_degree[1:]))

    @property
    def ipc_total(self) -> float:
        return float(sum(self.per_degree))

    @property
    def sort_key(self) -> Tuple[int, int]:
        return (self.grid_index, self.ham_index)

    def to_row(self) -> Dict:
        """Flat CSV row in CSV_COLUMNS order."""
        row = {"parameter": self.parameter, "seed": self.seed, "ham_index": self.ham_index}
        for d, value in enumerate(self.per_degree, start=1):
            row[f"ipc_{d}"] = value
        row.update({
            "ipc_linear": self.ipc_linear,
            "ipc_nonlinear": self.ipc_nonlinear,
            "ipc_total": self.ipc_total,
        })
        for kind in TaskKind:
            row[f"nrmse_{kind.value.lower()}"] = self.nrmse.get(kind.value, math.nan)
        row.update({"runtime_s": self.runtime_s, "config_hash": self.config_hash, "grid_index": self.grid_index})
        return row

    @classmethod
    def from_row(cls, row: Dict) -> "ResultRecord":
        nrmse = {}
        for kind in TaskKind:
            value = float(row[f"nrmse_{kind.value.lower()}"])
            if not math.isnan(value):
                nrmse[kind.value] = value
        return cls(
            parameter=float(row["parameter"]),
            seed=int(row["seed"]),
            ham_index=int(row["ham_index"]),
            grid_index=int(row.get("grid_index", 0)),
            per_degree=tuple(float(row[f"ipc_{d}"]) for d in range(1, 7)),
            nrmse=nrmse,
            runtime_s=float(row["runtime_s"]),
            config_hash=str(row["config_hash"]),
        )

    def to_dict(self) -> Dict:
        data = self.to_row()
        data["per_degree"] = list(self.per_degree)
        data["nrmse"] = dict(self.nrmse)
        data["ipc_report"] = self.ipc_report.to_dict() if self.ipc_report else None
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "ResultRecord":
        report = data.get("ipc_report")
        return cls(
            parameter=float(data["parameter"]),
            seed=int(data["seed"]),
            ham_index=int(data["ham_index"]),
            grid_index=int(data.get("grid_index", 0)),
            per_degree=tuple(float(v) for v in data["per_degree"]),
            nrmse={k: float(v) for k, v in data.get("nrmse", {}).items()},
            runtime_s=float(data["runtime_s"]),
            config_hash=str(data["config_hash"]),
            ipc_report=IpcReport.from_dict(report) if report else None,
        )


@dataclass(frozen=True)
class JobFailure:
    """A job that raised instead of producing a record."""
    grid_index: int
    ham_index: int
    parameter: float
    reason: str


@dataclass
class SweepOutcome:
    """Records and failures of a sweep, both sorted by (grid, Hamiltonian)."""
    records: List[ResultRecord] = field(default_factory=list)
    failures: List[JobFailure] = field(default_factory=list)
