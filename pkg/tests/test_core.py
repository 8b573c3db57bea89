"""
Unit tests for density-matrix algebra.
"""

import numpy as np
import pytest
import scipy.linalg as la

from errors import DimensionMismatchError, InputRangeError, InvalidStateError, NonHermitianError
from reservoir.core import (
    IDENTITY, SIGMA_X, SIGMA_Z, DensityMatrix, QubitLayout, SpectralPropagator,
    check_density_matrix, encode_input, expectation, inject_and_evolve,
    partial_trace_first, pauli_on, sigma_z_expectations, tensor_product,
    unitary_from_hamiltonian, z_sign_table,
)
from reservoir.rng import make_rng


def random_density(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_unitary(dim, rng):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(dim, rng):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return make_rng(1234, 99)


class TestTensorProduct:
    """Tests for tensor_product."""

    def test_identity(self):
        """I2 (x) I2 is I4."""
        assert np.allclose(tensor_product(IDENTITY, IDENTITY), np.eye(4))

    def test_sigma_z_pair(self):
        """sigma_z (x) sigma_z is diag(1, -1, -1, 1)."""
        assert np.allclose(tensor_product(SIGMA_Z, SIGMA_Z), np.diag([1, -1, -1, 1]))

    def test_basis_projector(self):
        """|0><0| (x) |1><1| has a single 1 at (1, 1)."""
        p0 = np.diag([1, 0]).astype(complex)
        p1 = np.diag([0, 1]).astype(complex)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0
        assert np.allclose(tensor_product(p0, p1), expected)

    def test_first_factor_is_most_significant(self):
        """pauli_on(op, 0, n) places op in the leading factor."""
        assert np.allclose(pauli_on(SIGMA_X, 0, 2), np.kron(SIGMA_X, IDENTITY))
        assert np.allclose(pauli_on(SIGMA_X, 1, 2), np.kron(IDENTITY, SIGMA_X))


class TestPartialTrace:
    """Tests for partial_trace_first."""

    def test_product_ground_state(self):
        """Tr_1[|00><00|] is |0><0|."""
        result = partial_trace_first(DensityMatrix.ground(2), QubitLayout(2))
        assert np.allclose(result.matrix, np.diag([1, 0]))

    def test_bell_state(self):
        """Tracing half a Bell pair leaves the maximally mixed state."""
        psi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        result = partial_trace_first(DensityMatrix(np.outer(psi, psi.conj())))
        assert np.allclose(result.matrix, np.eye(2) / 2)

    def test_product_of_random_states(self, rng):
        """Tr_1[rho_A (x) rho_B] equals rho_B by brute-force contraction."""
        rho_a = random_density(2, rng)
        rho_b = random_density(8, rng)
        joint = np.kron(rho_a, rho_b)
        brute = sum(joint[i * 8:(i + 1) * 8, i * 8:(i + 1) * 8] for i in range(2))
        result = partial_trace_first(DensityMatrix(joint))
        assert np.allclose(result.matrix, rho_b, atol=1e-12)
        assert np.allclose(result.matrix, brute, atol=1e-12)

    def test_linearity(self, rng):
        """Tr_1 commutes with convex combinations."""
        rho, sigma = random_density(8, rng), random_density(8, rng)
        combined = DensityMatrix(0.3 * rho + 0.7 * sigma)
        lhs = partial_trace_first(combined).matrix
        rhs = 0.3 * partial_trace_first(DensityMatrix(rho)).matrix + 0.7 * partial_trace_first(DensityMatrix(sigma)).matrix
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_single_qubit_rejected(self):
        """Dimension 2 is not a register that can lose its first qubit."""
        with pytest.raises(DimensionMismatchError):
            partial_trace_first(DensityMatrix.ground(1))

    def test_non_power_of_two_rejected(self):
        """Dimension 6 is rejected."""
        rho = np.eye(6) / 6
        with pytest.raises(DimensionMismatchError):
            partial_trace_first(DensityMatrix(rho))


class TestEncodeInput:
    """Tests for encode_input."""

    def test_boundaries(self):
        """u = 1 gives |0><0| and u = -1 gives |1><1|."""
        assert np.allclose(encode_input(1.0).matrix, np.diag([1, 0]))
        assert np.allclose(encode_input(-1.0).matrix, np.diag([0, 1]))

    def test_zero_is_plus_state(self):
        """u = 0 gives the all-1/2 matrix."""
        assert np.allclose(encode_input(0.0).matrix, np.full((2, 2), 0.5))

    @pytest.mark.parametrize("u", [-0.8, -0.1, 0.37, 0.99])
    def test_sigma_z_equals_input(self, u):
        """<sigma_z> of the encoded state is u."""
        assert expectation(encode_input(u), SIGMA_Z) == pytest.approx(u, abs=1e-12)

    def test_out_of_range(self):
        """|u| > 1 raises InputRangeError."""
        with pytest.raises(InputRangeError):
            encode_input(1.0001)


class TestInjectAndEvolve:
    """Tests for inject_and_evolve."""

    def test_identity_evolution(self, rng):
        """With U = I the result is encode(u) (x) Tr_1[rho]."""
        rho = DensityMatrix(random_density(8, rng))
        result = inject_and_evolve(rho, 0.4, np.eye(8))
        expected = np.kron(encode_input(0.4).matrix, partial_trace_first(rho).matrix)
        assert np.allclose(result.matrix, expected, atol=1e-14)

    def test_ground_state_reinjection(self):
        """u = 1 on the ground state with U = I leaves it unchanged."""
        rho0 = DensityMatrix.ground(3)
        assert np.allclose(inject_and_evolve(rho0, 1.0, np.eye(8)).matrix, rho0.matrix)

    def test_random_unitary_keeps_invariants(self, rng):
        """Random U and rho give a valid density matrix."""
        rho = DensityMatrix(random_density(16, rng))
        result = inject_and_evolve(rho, -0.3, random_unitary(16, rng), QubitLayout(4))
        check_density_matrix(result)
        assert np.min(la.eigvalsh(result.matrix)) >= -1e-9

    @pytest.mark.parametrize("u", [-1.0, -0.5, 0.0, 0.25, 1.0])
    def test_first_qubit_carries_input(self, u, rng):
        """<sigma_z^(1)> after injection with U = I equals u."""
        rho = DensityMatrix(random_density(16, rng))
        result = inject_and_evolve(rho, u, np.eye(16))
        assert expectation(result, pauli_on(SIGMA_Z, 0, 4)) == pytest.approx(u, abs=1e-12)

    def test_unitary_shape_mismatch(self):
        """A unitary of the wrong size is rejected."""
        with pytest.raises(DimensionMismatchError):
            inject_and_evolve(DensityMatrix.ground(2), 0.0, np.eye(8))


class TestExpectation:
    """Tests for expectation."""

    def test_ground_state(self):
        """<0|sigma_z|0> = 1."""
        assert expectation(DensityMatrix.ground(1), SIGMA_Z) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        """Tr[I/2 sigma_z] = 0."""
        assert expectation(DensityMatrix(np.eye(2) / 2), SIGMA_Z) == pytest.approx(0.0)

    def test_non_hermitian_observable(self):
        """A non-Hermitian observable raises."""
        with pytest.raises(NonHermitianError):
            expectation(DensityMatrix.ground(1), np.array([[0, 1], [0, 0]], dtype=complex))

    def test_sign_table_matches_expectations(self, rng):
        """Diagonal readout agrees with Tr[rho sigma_z^(i)] for every qubit."""
        rho = random_density(16, rng)
        fast = sigma_z_expectations(rho, 4)
        slow = [expectation(DensityMatrix(rho), pauli_on(SIGMA_Z, i, 4)) for i in range(4)]
        assert np.allclose(fast, slow, atol=1e-12)

    def test_sign_table_layout(self):
        """Row b holds the sigma_z eigenvalues of basis state b."""
        assert np.array_equal(z_sign_table(2), np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]))


class TestUnitaryFromHamiltonian:
    """Tests for unitary_from_hamiltonian and SpectralPropagator."""

    def test_sigma_z_half_period(self):
        """exp(-i pi sigma_z) = -I."""
        assert np.allclose(unitary_from_hamiltonian(SIGMA_Z, np.pi), -np.eye(2), atol=1e-12)

    def test_zero_time(self, rng):
        """t = 0 gives the identity."""
        assert np.allclose(unitary_from_hamiltonian(random_hermitian(4, rng), 0.0), np.eye(4))

    def test_matches_expm(self, rng):
        """Random 16x16 H at t = 50 agrees with scipy's expm."""
        H = random_hermitian(16, rng)
        U = unitary_from_hamiltonian(H, 50.0)
        assert np.max(np.abs(U - la.expm(-1j * 50.0 * H))) <= 1e-9
        assert np.max(np.abs(U.conj().T @ U - np.eye(16))) <= 1e-9

    def test_group_property(self, rng):
        """U(t1) U(t2) = U(t1 + t2)."""
        propagator = SpectralPropagator(random_hermitian(8, rng))
        assert np.allclose(propagator.unitary(1.3) @ propagator.unitary(2.1), propagator.unitary(3.4), atol=1e-9)

    def test_non_hermitian(self):
        """Non-Hermitian H raises NonHermitianError."""
        with pytest.raises(NonHermitianError):
            unitary_from_hamiltonian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


class TestCheckDensityMatrix:
    """Tests for check_density_matrix."""

    def test_bad_trace(self):
        """Trace 2 is rejected."""
        with pytest.raises(InvalidStateError):
            check_density_matrix(np.eye(2))

    def test_negative_eigenvalue(self):
        """diag(1.5, -0.5) is rejected."""
        with pytest.raises(InvalidStateError):
            check_density_matrix(np.diag([1.5, -0.5]))

    def test_valid_state(self, rng):
        """A random density matrix passes."""
        check_density_matrix(random_density(4, rng))

    def test_density_matrix_is_read_only(self):
        """The wrapped array cannot be mutated."""
        rho = DensityMatrix.ground(1)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 0.0
