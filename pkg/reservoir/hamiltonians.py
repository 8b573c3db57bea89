"""
Reservoir Hamiltonians.

- Static fully connected transverse-field Ising model
      H = 1/2 sum_i h sigma_z^(i) + sum_{i<j} J_ij sigma_x^(i) sigma_x^(j)
  with uniformly sampled couplings and optional spectral-radius normalization.
- Driven hopping model in the rotating frame of the drive
      H(s) = sum_{i<j} J_ij (sigma_+^(i) sigma_-^(j) + sigma_-^(i) sigma_+^(j)) + s sigma_y^(1)
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la

from errors import InputRangeError, NonHermitianError
from .core import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, pauli_on

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TfimSpec:
    """Parameters of the static TFIM and its coupling distribution."""
    n_qubits: int = 4
    field_strength: float = 1.0
    coupling_low: float = 0.0
    coupling_high: float = 1.0
    normalize_spectral_radius: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InputRangeError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.coupling_low > self.coupling_high:
            raise InputRangeError(
                f"coupling_low {self.coupling_low} exceeds coupling_high {self.coupling_high}"
            )

    @classmethod
    def normalized(cls, seed: int = 0) -> "TfimSpec":
        """h = 1, J ~ U([0, 1]), normalized to spectral radius 1."""
        return cls(n_qubits=4, field_strength=1.0, coupling_low=0.0, coupling_high=1.0,
                   normalize_spectral_radius=True, seed=seed)

    @classmethod
    def chaos(cls, field_strength: float, seed: int = 0) -> "TfimSpec":
        """J ~ U([-1, 1]) without normalization, for field-strength sweeps."""
        return cls(n_qubits=4, field_strength=field_strength, coupling_low=-1.0, coupling_high=1.0,
                   normalize_spectral_radius=False, seed=seed)


@dataclass(frozen=True, eq=False)
class DrivenTfimSpec:
    """Couplings of the driven hopping model; the drive acts on qubit 1."""
    n_qubits: int
    couplings: np.ndarray = field(repr=False)
    drive_target_qubit: int = 0

    def __post_init__(self):
        J = np.triu(np.asarray(self.couplings, dtype=float), k=1)
        if J.shape != (self.n_qubits, self.n_qubits):
            raise InputRangeError(f"couplings must be {self.n_qubits}x{self.n_qubits}, got {J.shape}")
        if self.drive_target_qubit != 0:
            raise InputRangeError("the drive acts on the first qubit only")
        J.setflags(write=False)
        object.__setattr__(self, "couplings", J)


def sample_couplings(spec: TfimSpec, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Upper-triangular J with J_ij ~ U([low, high]) i.i.d. for i < j.

    Entries are drawn in row-major order of the upper triangle, so the matrix
    is reproducible from the generator state alone.
    """
    if rng is None:
        from .rng import HAMILTONIAN, make_rng
        rng = make_rng(spec.seed, HAMILTONIAN)
    n = spec.n_qubits
    J = np.zeros((n, n))
    rows, cols = np.triu_indices(n, k=1)
    J[rows, cols] = rng.uniform(spec.coupling_low, spec.coupling_high, size=rows.size)
    return J


def spectral_radius(H: np.ndarray) -> float:
    """max |eigenvalue| of a Hermitian matrix."""
    H = np.asarray(H, dtype=complex)
    if H.shape[0] != H.shape[1] or float(np.max(np.abs(H - H.conj().T), initial=0.0)) > 1e-10:
        raise NonHermitianError("spectral_radius requires a Hermitian matrix")
    eigenvalues = la.eigvalsh(H)
    return float(np.max(np.abs(eigenvalues)))


def build_tfim(spec: TfimSpec, J: np.ndarray) -> np.ndarray:
    """Static TFIM, rescaled to unit spectral radius when requested."""
    n = spec.n_qubits
    J = np.asarray(J, dtype=float)
    dim = 2 ** n
    H = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        H += 0.5 * spec.field_strength * pauli_on(SIGMA_Z, i, n)
    x_ops = [pauli_on(SIGMA_X, i, n) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] != 0.0:
                H += J[i, j] * (x_ops[i] @ x_ops[j])
    H = 0.5 * (H + H.conj().T)
    if spec.normalize_spectral_radius:
        radius = spectral_radius(H)
        if radius > 0.0:
            H = H / radius
        else:
            logger.warning("Hamiltonian has zero spectral radius; normalization skipped")
    return H


def driven_tfim_terms(spec: DrivenTfimSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(H_hop, H_drive) with H(s) = H_hop + s * H_drive."""
    n = spec.n_qubits
    dim = 2 ** n
    plus = [pauli_on(SIGMA_PLUS, i, n) for i in range(n)]
    minus = [pauli_on(SIGMA_MINUS, i, n) for i in range(n)]
    H_hop = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            coupling = spec.couplings[i, j]
            if coupling != 0.0:
                H_hop += coupling * (plus[i] @ minus[j] + minus[i] @ plus[j])
    H_drive = pauli_on(SIGMA_Y, spec.drive_target_qubit, n)
    return H_hop, H_drive


def build_driven_tfim(spec: DrivenTfimSpec, s: float) -> np.ndarray:
    """Driven hopping Hamiltonian at drive amplitude s."""
    H_hop, H_drive = driven_tfim_terms(spec)
    return H_hop + float(s) * H_drive


def sample_driven_spec(
    n_qubits: int,
    rng: np.random.Generator,
    coupling_low: float = 0.0,
    coupling_high: float = 1.0,
) -> DrivenTfimSpec:
    """Driven model with J_ij ~ U([low, high]); the distribution is an assumption."""
    sampling = TfimSpec(n_qubits=n_qubits, coupling_low=coupling_low, coupling_high=coupling_high)
    return DrivenTfimSpec(n_qubits=n_qubits, couplings=sample_couplings(sampling, rng))
