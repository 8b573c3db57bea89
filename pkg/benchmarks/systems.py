"""
Chaotic benchmark systems.

Both generators use fixed-step fourth-order Runge-Kutta in plain float
arithmetic and subsample after discarding a transient.

- Lorenz-63: dx = sigma (y - x), dy = x (rho - z) - y, dz = x y - beta z
- Mackey-Glass: dx = beta x_tau / (1 + x_tau^n) - gamma x, with the delayed
  value x_tau = x(t - tau) read from the stored trajectory; RK4 midpoints
  interpolate the stored points (four-point cubic by default, or linear).
  Cubic stencils that would straddle t = 0 fall back to linear.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from errors import ConfigError, IntegratorError
from reservoir.rng import BENCHMARK, make_rng

logger = logging.getLogger(__name__)


def _steps_between(interval: float, dt: float, what: str) -> int:
    ratio = interval / dt
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, ratio):
        raise ConfigError(f"{what} {interval} is not a whole number of steps dt={dt}")
    return steps


@dataclass(frozen=True)
class LorenzSpec:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.001
    sample_interval: float = 0.1
    transient: float = 100.0
    initial_state: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    initial_jitter: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.transient < 0:
            raise ConfigError("transient must be >= 0")
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        _steps_between(self.sample_interval, self.dt, "sample_interval")
        if self.transient:
            _steps_between(self.transient, self.dt, "transient")

    @property
    def steps_per_sample(self) -> int:
        return _steps_between(self.sample_interval, self.dt, "sample_interval")

    @property
    def transient_steps(self) -> int:
        return _steps_between(self.transient, self.dt, "transient") if self.transient else 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MackeyGlassSpec:
    beta: float = 0.2
    gamma: float = 0.1
    exponent: float = 10.0
    delay: float = 18.0
    dt: float = 0.1
    sample_interval: float = 3.0
    initial_history: float = 1.2
    transient: float = 1000.0
    interpolation: str = "cubic"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.transient < 0:
            raise ConfigError("transient must be >= 0")
        if self.interpolation not in ("linear", "cubic"):
            raise ConfigError(f"interpolation must be linear or cubic, got {self.interpolation!r}")
        if _steps_between(self.delay, self.dt, "delay") < 2:
            raise ConfigError("delay must span at least two steps")
        _steps_between(self.sample_interval, self.dt, "sample_interval")
        if self.transient:
            _steps_between(self.transient, self.dt, "transient")

    @property
    def delay_steps(self) -> int:
        return _steps_between(self.delay, self.dt, "delay")

    @property
    def steps_per_sample(self) -> int:
        return _steps_between(self.sample_interval, self.dt, "sample_interval")

    @property
    def transient_steps(self) -> int:
        return _steps_between(self.transient, self.dt, "transient") if self.transient else 0

    def to_dict(self) -> dict:
        return asdict(self)


def lorenz_derivative(state, spec: LorenzSpec) -> Tuple[float, float, float]:
    x, y, z = state
    return (spec.sigma * (y - x), x * (spec.rho - z) - y, x * y - spec.beta * z)


def integrate_lorenz(spec: LorenzSpec, n_samples: int) -> np.ndarray:
    """(n_samples, 3) array of (x, y, z) sampled every sample_interval."""
    if n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples}")
    h = spec.dt
    x, y, z = spec.initial_state
    if spec.initial_jitter:
        jitter = make_rng(spec.seed, BENCHMARK).standard_normal(3) * spec.initial_jitter
        x, y, z = x + jitter[0], y + jitter[1], z + jitter[2]
    x, y, z = float(x), float(y), float(z)

    def advance(x, y, z, n):
        for _ in range(n):
            k1x, k1y, k1z = lorenz_derivative((x, y, z), spec)
            k2x, k2y, k2z = lorenz_derivative((x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h * k1z), spec)
            k3x, k3y, k3z = lorenz_derivative((x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h * k2z), spec)
            k4x, k4y, k4z = lorenz_derivative((x + h * k3x, y + h * k3y, z + h * k3z), spec)
            x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        return x, y, z

    x, y, z = advance(x, y, z, spec.transient_steps)
    out = np.empty((n_samples, 3))
    stride = spec.steps_per_sample
    for i in range(n_samples):
        if i:
            x, y, z = advance(x, y, z, stride)
        out[i] = (x, y, z)
    if not np.all(np.isfinite(out)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(out), axis=1))[0])
        raise IntegratorError("Lorenz state became non-finite", step_index=bad)
    logger.debug(f"Integrated Lorenz system: {n_samples} samples at dt={h}")
    return out


def integrate_mackey_glass(spec: MackeyGlassSpec, n_samples: int) -> np.ndarray:
    """Scalar series sampled every sample_interval after the transient."""
    if n_samples < 1:
        raise ConfigError(f"n_samples must be >= 1, got {n_samples}")
    beta, gamma, power, h = spec.beta, spec.gamma, spec.exponent, spec.dt
    lag = spec.delay_steps
    stride = spec.steps_per_sample
    n_steps = spec.transient_steps + (n_samples - 1) * stride
    history = float(spec.initial_history)
    cubic = spec.interpolation == "cubic"
    # trajectory[k] = x(k dt); negative indices fall back to the constant history.
    trajectory = [history] * (n_steps + 1)

    def delayed(k: int) -> float:
        return trajectory[k] if k >= 0 else history

    def rhs(x: float, x_tau: float) -> float:
        return beta * x_tau / (1.0 + x_tau ** power) - gamma * x

    x = history
    for k in range(n_steps):
        tau_now = delayed(k - lag)
        tau_next = delayed(k - lag + 1)
        # x' jumps where the trajectory leaves the constant history; no stencil crosses it.
        first = k - lag - 1
        if cubic and (first >= 0 or first + 3 <= 0):
            tau_mid = (9.0 * (tau_now + tau_next) - delayed(k - lag - 1) - delayed(k - lag + 2)) / 16.0
        else:
            tau_mid = 0.5 * (tau_now + tau_next)
        k1 = rhs(x, tau_now)
        k2 = rhs(x + 0.5 * h * k1, tau_mid)
        k3 = rhs(x + 0.5 * h * k2, tau_mid)
        k4 = rhs(x + h * k3, tau_next)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        trajectory[k + 1] = x
    series = np.asarray(trajectory[spec.transient_steps::stride][:n_samples])
    if not np.all(np.isfinite(series)):
        raise IntegratorError("Mackey-Glass state became non-finite", step_index=int(np.argmin(np.isfinite(series))))
    logger.debug(f"Integrated Mackey-Glass system: {n_samples} samples at dt={h}")
    return series
