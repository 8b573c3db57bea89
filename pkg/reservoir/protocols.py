"""
Reservoir protocols.

Each runner drives the reservoir with an input sequence and returns the
noiseless, time-multiplexed sigma_z readout. Rows are input steps after
washout; column m * N_S + i holds <sigma_z^(i)> at tau_{m+1} = (m+1) T / N_V.

- FRP: one forward ensemble pass of the injection map (restarts are
  redundant for density matrices).
- MRP: every step restarts from |0...0> and re-injects the last r inputs.
- WMP: FRP plus element-wise coherence damping M after each cycle.
- DSP: Lindblad dynamics with the affinely mapped input as a
  piecewise-constant drive.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg as la

from errors import ConfigError, DimensionMismatchError, InputRangeError, IntegratorError
from models import ProtocolKind
from .core import (
    SIGMA_MINUS, DensityMatrix, SpectralPropagator, _inject,
    check_density_matrix, pauli_on, z_sign_table,
)
from .hamiltonians import DrivenTfimSpec, driven_tfim_terms

logger = logging.getLogger(__name__)

INTEGRATORS = ("rk4", "expm")
# h * ||L|| is kept at or below this inside the RK4 stability region.
RK4_STABILITY_LIMIT = 2.0
DSP_TRACE_TOL = 1e-8


@dataclass(frozen=True)
class ClockConfig:
    """Clock cycle T and multiplexing count N_V."""
    clock_cycle: float = 50.0
    multiplexing: int = 30

    def __post_init__(self):
        if not self.clock_cycle > 0:
            raise ConfigError(f"clock_cycle must be positive, got {self.clock_cycle}")
        if self.multiplexing < 1:
            raise ConfigError(f"multiplexing must be >= 1, got {self.multiplexing}")

    @property
    def sub_interval(self) -> float:
        return self.clock_cycle / self.multiplexing

    @property
    def measurement_times(self) -> np.ndarray:
        """tau_k = k T / N_V for k = 1..N_V."""
        return self.sub_interval * np.arange(1, self.multiplexing + 1)


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol selection and the fields read by the active kind."""
    kind: ProtocolKind = ProtocolKind.FRP
    reset_length: int = 6
    measurement_strength: float = 0.0
    decay_rate: float = 0.0
    clock: ClockConfig = field(default_factory=ClockConfig)
    washout: int = 1000
    backaction_per_subreadout: bool = False
    integrator: str = "rk4"
    rk4_steps_per_cycle: int = 200
    drive_offset: float = 0.5
    drive_scale: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))
        if self.washout < 0:
            raise ConfigError(f"washout must be >= 0, got {self.washout}")
        if self.kind == ProtocolKind.MRP and self.reset_length < 1:
            raise ConfigError(f"reset_length must be >= 1, got {self.reset_length}")
        if self.kind == ProtocolKind.WMP and not 0.0 <= self.measurement_strength <= np.pi / 2:
            raise InputRangeError(f"measurement_strength {self.measurement_strength} outside [0, pi/2]")
        if self.kind == ProtocolKind.DSP:
            if self.decay_rate < 0:
                raise InputRangeError(f"decay_rate must be >= 0, got {self.decay_rate}")
            if self.integrator not in INTEGRATORS:
                raise ConfigError(f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}")
            if self.rk4_steps_per_cycle < 1:
                raise ConfigError("rk4_steps_per_cycle must be >= 1")
            if self.drive_scale == 0:
                raise ConfigError("drive_scale must be nonzero")

    def drive(self, u: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
        """DSP drive amplitude s = drive_offset + drive_scale * u."""
        return self.drive_offset + self.drive_scale * np.asarray(u, dtype=float)

    @property
    def rotation_angle(self) -> float:
        """Ancilla rotation phi = pi/2 - theta of the weak measurement."""
        return np.pi / 2 - self.measurement_strength

    @classmethod
    def frp(cls, washout: int = 1000) -> "ProtocolConfig":
        return cls(kind=ProtocolKind.FRP, washout=washout)

    @classmethod
    def mrp(cls, reset_length: int, washout: int = 0) -> "ProtocolConfig":
        return cls(kind=ProtocolKind.MRP, reset_length=reset_length, washout=washout)

    @classmethod
    def wmp(cls, measurement_strength: float, washout: int = 1000) -> "ProtocolConfig":
        return cls(kind=ProtocolKind.WMP, measurement_strength=measurement_strength, washout=washout)

    @classmethod
    def dsp(cls, decay_rate: float, washout: int = 1000) -> "ProtocolConfig":
        return cls(kind=ProtocolKind.DSP, decay_rate=decay_rate,
                   clock=ClockConfig(clock_cycle=1.0, multiplexing=10), washout=washout)


@dataclass(frozen=True, eq=False)
class ReadoutTrace:
    """Multiplexed readout matrix X (rows = input steps, cols = virtual nodes)."""
    values: np.ndarray = field(repr=False)
    n_qubits: int = 1
    multiplexing: int = 1

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DimensionMismatchError(f"trace must be 2-D, got shape {values.shape}")
        if values.shape[1] != self.n_qubits * self.multiplexing:
            raise DimensionMismatchError(
                f"trace has {values.shape[1]} columns, expected {self.n_qubits * self.multiplexing}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "ReadoutTrace":
        return ReadoutTrace(values, self.n_qubits, self.multiplexing)


def _prepare_inputs(inputs: Sequence[float], washout: int) -> np.ndarray:
    values = np.asarray(inputs, dtype=float).ravel()
    if values.size == 0:
        raise InputRangeError("input sequence is empty")
    if not np.all(np.isfinite(values)) or np.any(np.abs(values) > 1.0):
        bad = int(np.flatnonzero(~(np.abs(values) <= 1.0))[0])
        raise InputRangeError(f"input {values[bad]!r} at step {bad} outside [-1, 1]")
    if washout >= values.size:
        raise InputRangeError(f"washout {washout} leaves no rows from {values.size} inputs")
    return values


def _initial_matrix(initial_state: Optional[DensityMatrix], n_qubits: int) -> np.ndarray:
    if initial_state is None:
        return DensityMatrix.ground(n_qubits).matrix.copy()
    rho = np.array(initial_state.matrix, dtype=complex)
    if rho.shape != (2 ** n_qubits, 2 ** n_qubits):
        raise DimensionMismatchError(f"initial state shape {rho.shape} does not match {n_qubits} qubits")
    return rho


def _n_qubits_of(H: np.ndarray) -> int:
    dim = H.shape[0]
    n_qubits = int(round(np.log2(dim)))
    if dim != 2 ** n_qubits or H.shape != (dim, dim):
        raise DimensionMismatchError(f"Hamiltonian shape {H.shape} is not a qubit register")
    return n_qubits


def _cycle(
    rho: np.ndarray,
    U_sub: np.ndarray,
    multiplexing: int,
    signs: np.ndarray,
    mask: Optional[np.ndarray] = None,
) -> tuple:
    """Evolve one clock cycle in N_V sub-steps, collecting sigma_z at each."""
    U_dag = U_sub.conj().T
    n_qubits = signs.shape[1]
    row = np.empty(multiplexing * n_qubits)
    for m in range(multiplexing):
        rho = U_sub @ rho @ U_dag
        row[m * n_qubits:(m + 1) * n_qubits] = np.real(np.diag(rho)) @ signs
        if mask is not None:
            rho = mask * rho
    return rho, row


def _finish(rows: list, n_qubits: int, config: ProtocolConfig) -> ReadoutTrace:
    return ReadoutTrace(np.asarray(rows), n_qubits, config.clock.multiplexing)


def run_frp(
    H: np.ndarray,
    config: ProtocolConfig,
    inputs: Sequence[float],
    initial_state: Optional[DensityMatrix] = None,
    validate: bool = False,
) -> ReadoutTrace:
    """Fully restarting protocol as a single forward ensemble pass."""
    return _run_unitary(H, config, inputs, initial_state, validate, mask=None)


def run_wmp(
    H: np.ndarray,
    config: ProtocolConfig,
    inputs: Sequence[float],
    initial_state: Optional[DensityMatrix] = None,
    validate: bool = False,
) -> ReadoutTrace:
    """Weak-measurement protocol: back-action mask M applied each cycle.

    Readouts within a cycle come from undamped states. With
    backaction_per_subreadout the mask is applied after every sub-readout
    instead of once after the full cycle.
    """
    if not 0.0 <= config.measurement_strength <= np.pi / 2:
        raise InputRangeError(f"measurement_strength {config.measurement_strength} outside [0, pi/2]")
    n_qubits = _n_qubits_of(np.asarray(H))
    mask = backaction_matrix(config.measurement_strength, n_qubits)
    return _run_unitary(H, config, inputs, initial_state, validate, mask=mask)


def _run_unitary(H, config, inputs, initial_state, validate, mask) -> ReadoutTrace:
    H = np.asarray(H, dtype=complex)
    n_qubits = _n_qubits_of(H)
    values = _prepare_inputs(inputs, config.washout)
    clock = config.clock
    U_sub = SpectralPropagator(H).unitary(clock.sub_interval)
    signs = z_sign_table(n_qubits)
    per_sub = mask is not None and config.backaction_per_subreadout
    rho = _initial_matrix(initial_state, n_qubits)
    rows = []
    for k, u in enumerate(values):
        rho = _inject(rho, u)
        rho, row = _cycle(rho, U_sub, clock.multiplexing, signs, mask if per_sub else None)
        if mask is not None and not per_sub:
            rho = mask * rho
        if validate:
            check_density_matrix(rho)
        if k >= config.washout:
            rows.append(row)
    logger.debug(f"{config.kind.value} run finished: {len(rows)} rows x {n_qubits * clock.multiplexing} nodes")
    return _finish(rows, n_qubits, config)


def run_mrp(
    H: np.ndarray,
    config: ProtocolConfig,
    inputs: Sequence[float],
    initial_state: Optional[DensityMatrix] = None,
    validate: bool = False,
) -> ReadoutTrace:
    """Memory-restricted protocol.

    Step n restarts from the initial state and injects the window
    u_{n-r+1}..u_n (the available prefix while n < r); only the final
    injection is read out.
    """
    if config.reset_length < 1:
        raise ConfigError(f"reset_length must be >= 1, got {config.reset_length}")
    H = np.asarray(H, dtype=complex)
    n_qubits = _n_qubits_of(H)
    values = _prepare_inputs(inputs, config.washout)
    clock = config.clock
    propagator = SpectralPropagator(H)
    U_sub = propagator.unitary(clock.sub_interval)
    U_full = propagator.unitary(clock.clock_cycle)
    U_full_dag = U_full.conj().T
    signs = z_sign_table(n_qubits)
    start = _initial_matrix(initial_state, n_qubits)
    r = config.reset_length
    rows = []
    for n in range(config.washout, values.size):
        window = values[max(0, n - r + 1):n + 1]
        rho = start
        for u in window[:-1]:
            rho = U_full @ _inject(rho, u) @ U_full_dag
        rho, row = _cycle(_inject(rho, window[-1]), U_sub, clock.multiplexing, signs)
        if validate:
            check_density_matrix(rho)
        rows.append(row)
    return _finish(rows, n_qubits, config)


def backaction_matrix(theta: float, n_qubits: int) -> np.ndarray:
    """Element-wise damping mask M = [[1, cos theta], [cos theta, 1]]^(x)N."""
    if not 0.0 <= theta <= np.pi / 2:
        raise InputRangeError(f"measurement strength {theta} outside [0, pi/2]")
    c = np.cos(theta)
    single = np.array([[1.0, c], [c, 1.0]])
    mask = np.ones((1, 1))
    for _ in range(n_qubits):
        mask = np.kron(mask, single)
    return mask


def _decay_operators(n_qubits: int) -> list:
    return [pauli_on(SIGMA_MINUS, i, n_qubits) for i in range(n_qubits)]


def lindblad_rhs(rho: Union[DensityMatrix, np.ndarray], H: np.ndarray, gamma: float) -> np.ndarray:
    """-i[H, rho] + gamma sum_i (s-_i rho s+_i - 1/2 {s+_i s-_i, rho})."""
    rho = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    n_qubits = _n_qubits_of(H)
    drho = -1j * (H @ rho - rho @ H)
    if gamma:
        for c in _decay_operators(n_qubits):
            cd = c.conj().T
            cdc = cd @ c
            drho = drho + gamma * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return drho


def _commutator_superop(H: np.ndarray) -> np.ndarray:
    eye = np.eye(H.shape[0], dtype=complex)
    return -1j * (np.kron(eye, H) - np.kron(H.T, eye))


def liouvillian(H: np.ndarray, gamma: float) -> np.ndarray:
    """Column-stacked superoperator L with vec(lindblad_rhs(rho)) = L vec(rho)."""
    H = np.asarray(H, dtype=complex)
    n_qubits = _n_qubits_of(H)
    eye = np.eye(H.shape[0], dtype=complex)
    L = _commutator_superop(H)
    if gamma:
        for c in _decay_operators(n_qubits):
            cdc = c.conj().T @ c
            L = L + gamma * (np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye))
    return L


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape(dim, dim, order="F")


def _rk4_step_polynomial(L0: np.ndarray, L1: np.ndarray, h: float) -> list:
    """Coefficients C_j with RK4 step operator P(s) = sum_j s^j C_j for L = L0 + s L1."""
    eye = np.eye(L0.shape[0], dtype=complex)
    A, B = h * L0, h * L1
    power = [eye]
    coefficients = [eye.copy()]
    factorial = 1.0
    for n in range(1, 5):
        factorial *= n
        nxt = [A @ power[0]]
        for j in range(1, n):
            nxt.append(A @ power[j] + B @ power[j - 1])
        nxt.append(B @ power[n - 1])
        power = nxt
        coefficients.append(np.zeros_like(eye))
        for j, term in enumerate(power):
            coefficients[j] = coefficients[j] + term / factorial
    return coefficients


def _evaluate_polynomial(coefficients: list, s: float) -> np.ndarray:
    P = coefficients[-1]
    for C in reversed(coefficients[:-1]):
        P = C + s * P
    return P


def dsp_steps_per_cycle(L0: np.ndarray, L1: np.ndarray, config: ProtocolConfig, max_drive: float = 1.0) -> int:
    """RK4 steps per cycle: at least rk4_steps_per_cycle, stable for |s| <= max_drive, a multiple of N_V."""
    n_v = config.clock.multiplexing
    bound = float(np.linalg.norm(L0, 2)) + abs(max_drive) * float(np.linalg.norm(L1, 2))
    needed = int(np.ceil(config.clock.clock_cycle * bound / RK4_STABILITY_LIMIT))
    steps = max(config.rk4_steps_per_cycle, needed)
    steps = int(np.ceil(steps / n_v)) * n_v
    if steps > config.rk4_steps_per_cycle:
        logger.info(f"DSP RK4 uses {steps} steps per cycle (norm bound {bound:.3g})")
    return steps


def run_dsp(
    spec: DrivenTfimSpec,
    config: ProtocolConfig,
    inputs: Sequence[float],
    initial_state: Optional[DensityMatrix] = None,
    validate: bool = False,
) -> ReadoutTrace:
    """Dissipative protocol: drive s_k = drive_offset + drive_scale * u_k held over cycle k.

    The state is never re-initialized; fading memory comes from the decay
    rate alone. With the rk4 integrator the state takes fixed RK4 steps; the
    step operator is a polynomial in the drive, expanded once per run.
    """
    if config.decay_rate < 0:
        raise InputRangeError(f"decay_rate must be >= 0, got {config.decay_rate}")
    values = _prepare_inputs(inputs, config.washout)
    drives = config.drive(values)
    n_qubits = spec.n_qubits
    dim = 2 ** n_qubits
    clock = config.clock
    H_hop, H_drive = driven_tfim_terms(spec)
    L0 = liouvillian(H_hop, config.decay_rate)
    L1 = _commutator_superop(H_drive)
    signs = z_sign_table(n_qubits)
    if config.integrator == "rk4":
        steps = dsp_steps_per_cycle(L0, L1, config, max_drive=float(np.max(np.abs(drives))))
        steps_per_sub = steps // clock.multiplexing
        coefficients = _rk4_step_polynomial(L0, L1, clock.clock_cycle / steps)
    v = _vec(_initial_matrix(initial_state, n_qubits))
    rows = []
    for k, s in enumerate(drives):
        if config.integrator == "rk4":
            B, repeats = _evaluate_polynomial(coefficients, s), steps_per_sub
        else:
            B, repeats = la.expm((L0 + s * L1) * clock.sub_interval), 1
        row = np.empty(clock.multiplexing * n_qubits)
        for m in range(clock.multiplexing):
            for _ in range(repeats):
                v = B @ v
            populations = np.real(v[::dim + 1])
            row[m * n_qubits:(m + 1) * n_qubits] = populations @ signs
        trace = np.sum(v[::dim + 1])
        if not np.all(np.isfinite(v)) or abs(trace - 1.0) > DSP_TRACE_TOL:
            raise IntegratorError(f"DSP state left tolerance (trace {trace.real:.3e})", step_index=k)
        if validate:
            check_density_matrix(_unvec(v, dim))
        if k >= config.washout:
            rows.append(row)
    return _finish(rows, n_qubits, config)


def run_protocol(
    reservoir: Union[np.ndarray, DrivenTfimSpec],
    config: ProtocolConfig,
    inputs: Sequence[float],
    initial_state: Optional[DensityMatrix] = None,
    validate: bool = False,
) -> ReadoutTrace:
    """Dispatch on config.kind; DSP takes a DrivenTfimSpec, the others a Hamiltonian."""
    if config.kind == ProtocolKind.DSP:
        if not isinstance(reservoir, DrivenTfimSpec):
            raise ConfigError("DSP runs need a DrivenTfimSpec")
        return run_dsp(reservoir, config, inputs, initial_state, validate)
    if isinstance(reservoir, DrivenTfimSpec):
        raise ConfigError(f"{config.kind.value} runs need a static Hamiltonian")
    runner = {ProtocolKind.FRP: run_frp, ProtocolKind.MRP: run_mrp, ProtocolKind.WMP: run_wmp}[config.kind]
    return runner(reservoir, config, inputs, initial_state, validate)
