"""
Data models for information processing capacity.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from errors import ConfigError

MAX_SUPPORTED_DEGREE = 6

DEFAULT_DELAY_CAPS = {1: 60, 2: 30, 3: 15, 4: 10, 5: 8, 6: 6}


@dataclass(frozen=True)
class TargetSpec:
    """Product of Legendre polynomials l_k(u_{t-d}) over (degree, delay) terms.

    Terms are ordered by strictly decreasing delay.
    """
    terms: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        terms = tuple((int(k), int(d)) for k, d in self.terms)
        if not terms:
            raise ConfigError("a target needs at least one term")
        for k, d in terms:
            if k < 1 or d < 0:
                raise ConfigError(f"invalid term (degree {k}, delay {d})")
        delays = [d for _, d in terms]
        if any(a <= b for a, b in zip(delays, delays[1:])):
            raise ConfigError(f"delays must be strictly decreasing, got {delays}")
        object.__setattr__(self, "terms", terms)

    @property
    def total_degree(self) -> int:
        return sum(k for k, _ in self.terms)

    @property
    def max_delay(self) -> int:
        return self.terms[0][1]

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def family(self) -> Tuple[int, int]:
        """(total degree, number of terms); cutoffs are shared within a family."""
        return (self.total_degree, self.n_terms)

    @property
    def signature(self) -> str:
        """Sorted degree multiset, e.g. "2" or "1,1"."""
        return ",".join(str(k) for k in sorted((k for k, _ in self.terms), reverse=True))

    def __str__(self) -> str:
        return "*".join(f"l{k}(t-{d})" for k, d in self.terms)


@dataclass(frozen=True)
class IpcBudget:
    """Degree limit, per-degree delay caps and the early-stop window."""
    max_total_degree: int = MAX_SUPPORTED_DEGREE
    max_delay_per_degree: Dict[int, int] = field(default_factory=lambda: dict(DEFAULT_DELAY_CAPS))
    early_stop_window: int = 5

    def __post_init__(self):
        caps = {int(k): int(v) for k, v in self.max_delay_per_degree.items()}
        if not 1 <= self.max_total_degree <= MAX_SUPPORTED_DEGREE:
            raise ConfigError(f"max_total_degree must be in [1, {MAX_SUPPORTED_DEGREE}]")
        for degree in range(1, self.max_total_degree + 1):
            if degree not in caps:
                raise ConfigError(f"no delay cap for degree {degree}")
            if caps[degree] < 0:
                raise ConfigError(f"delay cap for degree {degree} must be >= 0")
        if self.early_stop_window < 1:
            raise ConfigError("early_stop_window must be >= 1")
        object.__setattr__(self, "max_delay_per_degree", caps)

    def delay_cap(self, degree: int) -> int:
        return self.max_delay_per_degree[degree]

    @property
    def max_delay(self) -> int:
        return max(self.delay_cap(d) for d in range(1, self.max_total_degree + 1))

    @classmethod
    def default(cls) -> "IpcBudget":
        return cls()

    @classmethod
    def uniform(cls, max_total_degree: int, max_delay: int, early_stop_window: int = 5) -> "IpcBudget":
        """Same delay cap at every degree."""
        caps = {d: max_delay for d in range(1, max_total_degree + 1)}
        return cls(max_total_degree, caps, early_stop_window)


@dataclass(frozen=True)
class CutoffConfig:
    """Shuffle-cutoff and held-out scoring settings."""
    n_shuffles: int = 100
    quantile: float = 0.999
    null_targets_per_family: int = 10
    held_out_fraction: float = 0.1
    max_workers: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n_shuffles < 20:
            raise ConfigError(f"n_shuffles must be >= 20, got {self.n_shuffles}")
        if not 0.0 < self.quantile <= 1.0:
            raise ConfigError(f"quantile must be in (0, 1], got {self.quantile}")
        if self.null_targets_per_family < 1:
            raise ConfigError("null_targets_per_family must be >= 1")
        if not 0.0 < self.held_out_fraction < 1.0:
            raise ConfigError(f"held_out_fraction must be in (0, 1), got {self.held_out_fraction}")


@dataclass
class FamilyResult:
    """Capacities of one (degree, term count) family."""
    family: Tuple[int, int]
    cutoff: float
    targets: List[TargetSpec] = field(default_factory=list)
    capacities: List[float] = field(default_factory=list)
    margins: List[float] = field(default_factory=list)

    @property
    def n_surviving(self) -> int:
        return sum(1 for c in self.capacities if c > 0.0)


@dataclass
class IpcReport:
    """Degree-resolved capacity sums."""
    per_degree: Tuple[float, ...]
    cutoff_value: float
    n_targets_evaluated: int
    n_targets_surviving: int
    readout_dimension: int = 0
    family_cutoffs: Dict[str, float] = field(default_factory=dict)
    per_family: Dict[str, float] = field(default_factory=dict)

    @property
    def linear(self) -> float:
        return self.per_degree[0]

    @property
    def nonlinear(self) -> float:
        return float(sum(self.per_degree[1:]))

    @property
    def total(self) -> float:
        return float(sum(self.per_degree))

    def to_record(self) -> Dict[str, float]:
        """Flat record consumed by the harness."""
        record = {f"ipc_{d}": float(v) for d, v in enumerate(self.per_degree, start=1)}
        record.update({
            "ipc_linear": self.linear,
            "ipc_nonlinear": self.nonlinear,
            "ipc_total": self.total,
            "ipc_cutoff": self.cutoff_value,
            "n_targets_evaluated": self.n_targets_evaluated,
            "n_targets_surviving": self.n_targets_surviving,
        })
        return record

    def to_dict(self) -> Dict:
        data = self.to_record()
        data["readout_dimension"] = self.readout_dimension
        data["family_cutoffs"] = dict(self.family_cutoffs)
        data["per_family"] = dict(self.per_family)
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "IpcReport":
        per_degree = tuple(float(data[f"ipc_{d}"]) for d in range(1, MAX_SUPPORTED_DEGREE + 1))
        return cls(
            per_degree=per_degree,
            cutoff_value=float(data.get("ipc_cutoff", 0.0)),
            n_targets_evaluated=int(data.get("n_targets_evaluated", 0)),
            n_targets_surviving=int(data.get("n_targets_surviving", 0)),
            readout_dimension=int(data.get("readout_dimension", 0)),
            family_cutoffs=dict(data.get("family_cutoffs", {})),
            per_family=dict(data.get("per_family", {})),
        )
