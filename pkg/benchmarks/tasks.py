"""
One-step prediction tasks built from benchmark series.

Inputs are min-max scaled into [-1, 1] with extrema from the training
segment only; test inputs beyond them are clipped and counted. Targets stay
in original units.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from errors import ConfigError, InputRangeError
from models import TaskKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalingRecord:
    """Affine map [minimum, maximum] -> [-1, 1]."""
    minimum: float
    maximum: float

    def __post_init__(self):
        if not self.maximum > self.minimum:
            raise InputRangeError(f"series is constant on the scaling segment ({self.minimum})")

    def scale(self, x):
        return 2.0 * (np.asarray(x, dtype=float) - self.minimum) / (self.maximum - self.minimum) - 1.0

    def unscale(self, u):
        return (np.asarray(u, dtype=float) + 1.0) * 0.5 * (self.maximum - self.minimum) + self.minimum

    def to_dict(self) -> dict:
        return {"minimum": self.minimum, "maximum": self.maximum}


@dataclass(frozen=True, eq=False)
class TaskDataset:
    """Aligned inputs (scaled) and targets (original units) with a contiguous split."""
    kind: TaskKind
    inputs: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)
    scaling: ScalingRecord
    n_train: int
    n_test: int
    n_clipped: int = 0

    def __post_init__(self):
        if self.inputs.shape != self.targets.shape:
            raise ConfigError("inputs and targets differ in length")
        if self.n_train + self.n_test != self.inputs.size:
            raise ConfigError("split sizes do not cover the dataset")

    @property
    def train_inputs(self) -> np.ndarray:
        return self.inputs[:self.n_train]

    @property
    def test_inputs(self) -> np.ndarray:
        return self.inputs[self.n_train:]

    @property
    def train_targets(self) -> np.ndarray:
        return self.targets[:self.n_train]

    @property
    def test_targets(self) -> np.ndarray:
        return self.targets[self.n_train:]


def _components(series: np.ndarray, kind: TaskKind):
    """Driving component x and the target component for a task kind."""
    if kind == TaskKind.LXZ:
        if series.ndim != 2 or series.shape[1] != 3:
            raise ConfigError("LXZ needs a three-component Lorenz series")
        return series[:, 0], series[:, 2]
    if series.ndim == 2:
        if kind == TaskKind.MG or series.shape[1] != 3:
            raise ConfigError(f"{kind.value} expects a scalar series or a Lorenz series")
        series = series[:, 0]
    return series, series


def make_task(
    series: np.ndarray,
    kind: TaskKind,
    n_train: Optional[int] = None,
    n_test: int = 0,
) -> TaskDataset:
    """Package a series as a one-step task.

    LXX and MG: input x_n, target x_{n+1}. LXZ: input x_n, target z_n.
    The first n_train pairs form the training segment; extrema for scaling
    cover every series value those pairs touch.
    """
    kind = TaskKind(kind)
    series = np.asarray(series, dtype=float)
    driver, target = _components(series, kind)
    if kind == TaskKind.LXZ:
        inputs, targets, reach = driver, target, 0
    else:
        inputs, targets, reach = driver[:-1], target[1:], 1
    available = inputs.size
    if n_train is None:
        n_train = available - n_test
    if n_train < 1 or n_test < 0:
        raise ConfigError(f"invalid split n_train={n_train}, n_test={n_test}")
    if n_train + n_test > available:
        raise InputRangeError(
            f"series of {series.shape[0]} samples is too short for {n_train} + {n_test} {kind.value} pairs"
        )
    total = n_train + n_test
    training_segment = driver[:n_train + reach]
    scaling = ScalingRecord(float(np.min(training_segment)), float(np.max(training_segment)))
    scaled = scaling.scale(inputs[:total])
    outside = np.abs(scaled) > 1.0
    n_clipped = int(np.count_nonzero(outside))
    if n_clipped:
        logger.info(f"{kind.value}: clipped {n_clipped} test input(s) outside the training range")
    scaled = np.clip(scaled, -1.0, 1.0)
    return TaskDataset(
        kind=kind,
        inputs=scaled,
        targets=np.array(targets[:total]),
        scaling=scaling,
        n_train=n_train,
        n_test=n_test,
        n_clipped=n_clipped,
    )
