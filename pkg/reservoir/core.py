"""
Dense linear algebra for multi-qubit density matrices.

Conventions:
- Qubit 0 is the most significant tensor factor, so the input qubit is the
  leading 2-dimensional factor and "trace out the first qubit" contracts it.
- |0> = (1, 0) and sigma_z |0> = +|0>.
- Matrices are complex128 numpy arrays; public operations never mutate
  their arguments.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg as la

from errors import DimensionMismatchError, InputRangeError, InvalidStateError, NonHermitianError

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9
IMAG_TOL = 1e-10

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_minus lowers |1> to |0>; decay under it relaxes towards |0...0>.
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)

ComplexMatrix = np.ndarray


@dataclass(frozen=True)
class QubitLayout:
    """Register size and the index of the qubit receiving inputs."""
    n_qubits: int
    input_qubit_index: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InputRangeError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if not 0 <= self.input_qubit_index < self.n_qubits:
            raise InputRangeError(
                f"input_qubit_index {self.input_qubit_index} outside register of {self.n_qubits}"
            )
        if self.input_qubit_index != 0:
            raise InputRangeError("inputs are encoded into the first qubit only")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated reservoir state. The wrapped array is read-only."""
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex, copy=True)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def ground(cls, n_qubits: int) -> "DensityMatrix":
        """|0...0><0...0| on n_qubits."""
        dim = 2 ** n_qubits
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho)


def _as_array(value: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    return value.matrix if isinstance(value, DensityMatrix) else np.asarray(value, dtype=complex)


def _require_hermitian(matrix: np.ndarray, name: str, tol: float = HERMITIAN_TOL) -> None:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {matrix.shape}")
    defect = float(np.max(np.abs(matrix - matrix.conj().T)))
    if defect > tol:
        raise NonHermitianError(f"{name} is not Hermitian (defect {defect:.3e})")


def check_density_matrix(matrix: Union[DensityMatrix, np.ndarray]) -> DensityMatrix:
    """Validate trace, Hermiticity and positivity; raise InvalidStateError on violation."""
    rho = _as_array(matrix)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got shape {rho.shape}")
    trace = np.trace(rho)
    if abs(trace - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {trace.real:.15f}{trace.imag:+.2e}i deviates from 1")
    defect = float(np.max(np.abs(rho - rho.conj().T)))
    if defect > HERMITIAN_TOL:
        raise InvalidStateError(f"Hermiticity defect {defect:.3e}")
    smallest = float(la.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if smallest < -PSD_TOL:
        raise InvalidStateError(f"smallest eigenvalue {smallest:.3e} below -{PSD_TOL}")
    return matrix if isinstance(matrix, DensityMatrix) else DensityMatrix(rho)


def tensor_product(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product with a as the more significant factor."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def pauli_on(op: ComplexMatrix, site: int, n_qubits: int) -> ComplexMatrix:
    """Embed a single-qubit operator at `site` (0 = most significant)."""
    if not 0 <= site < n_qubits:
        raise DimensionMismatchError(f"site {site} outside register of {n_qubits} qubits")
    result = np.ones((1, 1), dtype=complex)
    for k in range(n_qubits):
        result = np.kron(result, op if k == site else IDENTITY)
    return result


def z_sign_table(n_qubits: int) -> np.ndarray:
    """(2^n, n) table of sigma_z^(i) eigenvalues per basis state.

    <sigma_z^(i)> = diag(rho).real @ table[:, i] since every sigma_z^(i) is diagonal.
    """
    states = np.arange(2 ** n_qubits)[:, None]
    bits = (states >> (n_qubits - 1 - np.arange(n_qubits))[None, :]) & 1
    return 1.0 - 2.0 * bits


def _trace_first(rho: np.ndarray) -> np.ndarray:
    half = rho.shape[0] // 2
    return np.einsum("ijik->jk", rho.reshape(2, half, 2, half))


def _check_register_dim(dim: int) -> None:
    if dim < 4 or dim & (dim - 1):
        raise DimensionMismatchError(f"dimension {dim} is not a power of two >= 4")


def partial_trace_first(rho: DensityMatrix, layout: Optional[QubitLayout] = None) -> DensityMatrix:
    """Trace out the input (leading) qubit."""
    matrix = _as_array(rho)
    _check_register_dim(matrix.shape[0])
    if layout is not None and layout.dim != matrix.shape[0]:
        raise DimensionMismatchError(
            f"state dimension {matrix.shape[0]} does not match layout of {layout.n_qubits} qubits"
        )
    return DensityMatrix(_trace_first(matrix))


def _encode(u: float) -> np.ndarray:
    if not -1.0 <= u <= 1.0:
        raise InputRangeError(f"input {u!r} outside [-1, 1]")
    amplitudes = np.array([np.sqrt((1.0 + u) / 2.0), np.sqrt((1.0 - u) / 2.0)], dtype=complex)
    return np.outer(amplitudes, amplitudes.conj())


def encode_input(u: float) -> DensityMatrix:
    """Pure single-qubit state with <sigma_z> = u."""
    return DensityMatrix(_encode(float(u)))


def _inject(rho: np.ndarray, u: float) -> np.ndarray:
    return np.kron(_encode(u), _trace_first(rho))


def inject_and_evolve(
    rho: DensityMatrix,
    u: float,
    unitary: ComplexMatrix,
    layout: Optional[QubitLayout] = None,
) -> DensityMatrix:
    """U (encode(u) (x) Tr_1[rho]) U^dagger."""
    matrix = _as_array(rho)
    _check_register_dim(matrix.shape[0])
    U = np.asarray(unitary, dtype=complex)
    if U.shape != matrix.shape:
        raise DimensionMismatchError(f"unitary shape {U.shape} does not match state shape {matrix.shape}")
    if layout is not None and layout.dim != matrix.shape[0]:
        raise DimensionMismatchError(f"layout of {layout.n_qubits} qubits does not match state")
    injected = _inject(matrix, float(u))
    return DensityMatrix(U @ injected @ U.conj().T)


def expectation(rho: DensityMatrix, obs: ComplexMatrix) -> float:
    """Tr[rho obs] for a Hermitian observable."""
    matrix = _as_array(rho)
    op = np.asarray(obs, dtype=complex)
    _require_hermitian(op, "observable")
    if op.shape != matrix.shape:
        raise DimensionMismatchError(f"observable shape {op.shape} does not match state {matrix.shape}")
    value = np.sum(matrix * op.T)
    if abs(value.imag) > IMAG_TOL:
        raise InvalidStateError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


class SpectralPropagator:
    """Eigen-decomposition of a Hermitian H, reused for exp(-iHt) at any t."""

    def __init__(self, hamiltonian: ComplexMatrix):
        H = np.asarray(hamiltonian, dtype=complex)
        _require_hermitian(H, "Hamiltonian", tol=1e-12 * max(1.0, float(np.max(np.abs(H)))) + 1e-12)
        self.eigenvalues, self.eigenvectors = la.eigh(0.5 * (H + H.conj().T))

    def unitary(self, t: float) -> ComplexMatrix:
        phases = np.exp(-1j * self.eigenvalues * t)
        return (self.eigenvectors * phases[None, :]) @ self.eigenvectors.conj().T


def unitary_from_hamiltonian(H: ComplexMatrix, t: float) -> ComplexMatrix:
    """exp(-iHt) by Hermitian eigen-decomposition."""
    return SpectralPropagator(H).unitary(float(t))


def sigma_z_expectations(rho: Union[DensityMatrix, np.ndarray], n_qubits: int) -> np.ndarray:
    """<sigma_z^(i)> for every qubit i."""
    return np.real(np.diag(_as_array(rho))) @ z_sign_table(n_qubits)
