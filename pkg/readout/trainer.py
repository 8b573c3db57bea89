"""
Linear readout training.

Shot noise is Gaussian with std 1/sqrt(N_meas) (scaled by 1/sin(theta) for
weak measurements). Readouts are fitted by an SVD pseudoinverse with a
relative singular-value cutoff; noise provides the regularization.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg as la

from errors import ConstantTargetError, InputRangeError, ReadoutError, ShapeMismatchError
from reservoir.protocols import ReadoutTrace
from reservoir.rng import NOISE, make_rng

logger = logging.getLogger(__name__)

DEFAULT_RCOND = 1e-12

ArrayOrTrace = Union[ReadoutTrace, np.ndarray]


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement-ensemble size and optional weak-measurement scaling."""
    n_measurements: float = 1e10
    wmp_strength: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if not self.n_measurements >= 1:
            raise InputRangeError(f"n_measurements must be >= 1, got {self.n_measurements}")
        if self.wmp_strength is not None and not 0.0 <= self.wmp_strength <= np.pi / 2:
            raise InputRangeError(f"wmp_strength {self.wmp_strength} outside [0, pi/2]")

    @property
    def base_std(self) -> float:
        if np.isinf(self.n_measurements):
            return 0.0
        return 1.0 / np.sqrt(self.n_measurements)

    @property
    def std(self) -> float:
        """Per-entry standard deviation; raises when theta = 0 is scaled."""
        if self.wmp_strength is None:
            return self.base_std
        sin_theta = np.sin(self.wmp_strength)
        if sin_theta == 0.0:
            raise ReadoutError("weak measurement with theta = 0 has infinite noise variance")
        return self.base_std / sin_theta

    @classmethod
    def noiseless(cls) -> "NoiseSpec":
        return cls(n_measurements=np.inf)


@dataclass(frozen=True, eq=False)
class TrainedReadout:
    """Readout weights and their training-set NRMSE."""
    weights: np.ndarray = field(repr=False)
    training_nrmse: float = 0.0

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float, copy=True)
        if not np.all(np.isfinite(weights)):
            raise ReadoutError("readout weights are not finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "training_nrmse": self.training_nrmse}


def _matrix(X: ArrayOrTrace) -> np.ndarray:
    values = X.values if isinstance(X, ReadoutTrace) else np.asarray(X, dtype=float)
    if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
        raise ShapeMismatchError(f"design matrix must be non-empty 2-D, got shape {values.shape}")
    return values


def add_shot_noise(
    trace: ReadoutTrace,
    spec: NoiseSpec,
    rng: Optional[np.random.Generator] = None,
) -> ReadoutTrace:
    """Replace each entry x by a sample of N(x, std^2)."""
    std = spec.std
    if std == 0.0:
        return trace
    if rng is None:
        rng = make_rng(spec.seed, NOISE)
    noisy = trace.values + rng.normal(0.0, std, size=trace.values.shape)
    return trace.with_values(noisy)


class LeastSquaresSolver:
    """SVD of a design matrix, reused across right-hand sides.

    Singular values below rcond * s_max are discarded. A positive ridge
    replaces 1/s by s / (s^2 + ridge).
    """

    def __init__(self, X: ArrayOrTrace, rcond: float = DEFAULT_RCOND, ridge: float = 0.0):
        if ridge < 0:
            raise ReadoutError(f"ridge must be >= 0, got {ridge}")
        matrix = _matrix(X)
        self.n_rows, self.n_cols = matrix.shape
        if self.n_rows < self.n_cols:
            logger.debug(f"Underdetermined readout: {self.n_rows} rows < {self.n_cols} columns")
        self.U, self.singular_values, self.Vt = la.svd(matrix, full_matrices=False, lapack_driver="gesdd")
        s = self.singular_values
        keep = s > rcond * (s[0] if s.size else 0.0)
        self.rank = int(np.count_nonzero(keep))
        filters = np.zeros_like(s)
        if ridge > 0:
            filters[keep] = s[keep] / (s[keep] ** 2 + ridge)
        else:
            filters[keep] = 1.0 / s[keep]
        self._filters = filters

    def _check_rows(self, F: np.ndarray) -> np.ndarray:
        F = np.asarray(F, dtype=float)
        if F.shape[0] != self.n_rows:
            raise ShapeMismatchError(f"target has {F.shape[0]} rows, design matrix has {self.n_rows}")
        return F

    def solve(self, F: np.ndarray) -> np.ndarray:
        """Weights for a target vector (n,) or a batch of targets (n, k)."""
        F = self._check_rows(F)
        projected = self.U.T @ F
        if F.ndim == 1:
            return self.Vt.T @ (self._filters * projected)
        return self.Vt.T @ (self._filters[:, None] * projected)


def train_readout(X: ArrayOrTrace, f: np.ndarray, ridge: float = 0.0) -> TrainedReadout:
    """Least-squares weights w minimizing ||X w - f||^2."""
    matrix = _matrix(X)
    target = np.asarray(f, dtype=float)
    if target.ndim != 1 or target.shape[0] != matrix.shape[0]:
        raise ShapeMismatchError(f"target shape {target.shape} does not match {matrix.shape[0]} rows")
    weights = LeastSquaresSolver(matrix, ridge=ridge).solve(target)
    return TrainedReadout(weights, nrmse(matrix @ weights, target))


def predict(X: ArrayOrTrace, w: Union[TrainedReadout, np.ndarray]) -> np.ndarray:
    """f_hat = X w."""
    matrix = _matrix(X)
    weights = w.weights if isinstance(w, TrainedReadout) else np.asarray(w, dtype=float)
    if weights.ndim != 1 or weights.shape[0] != matrix.shape[1]:
        raise ShapeMismatchError(f"{weights.shape} weights for {matrix.shape[1]} columns")
    return matrix @ weights


def nrmse(fhat: np.ndarray, f: np.ndarray) -> float:
    """sqrt(MSE / Var(f))."""
    fhat = np.asarray(fhat, dtype=float)
    f = np.asarray(f, dtype=float)
    if fhat.shape != f.shape or f.ndim != 1:
        raise ShapeMismatchError(f"prediction shape {fhat.shape} does not match target {f.shape}")
    if f.size < 2:
        raise ShapeMismatchError("nrmse needs at least two samples")
    variance = float(np.var(f))
    if variance == 0.0:
        raise ConstantTargetError("target has zero variance")
    return float(np.sqrt(np.mean((fhat - f) ** 2) / variance))
