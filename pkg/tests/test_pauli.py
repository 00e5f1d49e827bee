import numpy as np
import pytest

from biased_shadows import (
    PauliString,
    Statevector,
    bloch_of,
    density_from_bloch,
    exact_expectation,
    pauli_weight,
    reduced_density,
)

import oracles


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(amps / np.linalg.norm(amps))


PLUS = Statevector(np.array([1, 1]) / np.sqrt(2))


class TestPauliString:
    def test_weight_identity(self):
        assert pauli_weight(PauliString("IIII")) == 0

    def test_weight_by_definition(self):
        assert pauli_weight(PauliString("XYZI")) == 3

    def test_weight_padded_x8(self):
        p = PauliString("X" * 8 + "I" * 4)
        assert p.n == 12
        assert pauli_weight(p) == 8

    def test_invalid_letters(self):
        with pytest.raises(ValueError):
            PauliString("XQ")
        with pytest.raises(ValueError):
            PauliString("")

    def test_from_sites(self):
        p = PauliString.from_sites(5, [3, 0], ["Y", "X"])
        assert p.letters == "XIIYI"
        with pytest.raises(ValueError):
            PauliString.from_sites(5, [0, 0], ["X", "X"])
        with pytest.raises(ValueError):
            PauliString.from_sites(5, [5], ["X"])

    def test_matrix_realization_squares_to_identity(self):
        # Hermitian, and P^2 = coefficient^2 I for coefficient = +-1
        for letters, coeff in [("XY", 1.0), ("ZIY", -1.0), ("YXZ", 1.0)]:
            mat = oracles.pauli_matrix(letters, coeff)
            np.testing.assert_allclose(mat, mat.conj().T, atol=1e-14)
            np.testing.assert_allclose(mat @ mat, coeff**2 * np.eye(mat.shape[0]),
                                       atol=1e-14)


class TestExactExpectation:
    def test_plus_eigenstate(self):
        assert exact_expectation(PLUS, PauliString("X")) == pytest.approx(1.0, abs=1e-12)

    def test_plus_anticommuting(self):
        assert exact_expectation(PLUS, PauliString("Z")) == pytest.approx(0.0, abs=1e-12)

    def test_against_dense_oracle(self):
        state = random_state(3, seed=11)
        for letters in ["XYZ", "ZZI", "IYX", "YYY", "IIZ"]:
            expected = oracles.dense_expectation(state.amplitudes, letters)
            assert exact_expectation(state, PauliString(letters)) == pytest.approx(
                expected, abs=1e-12)

    def test_coefficient_and_bound(self):
        state = random_state(3, seed=5)
        for seed, letters in enumerate(["XIZ", "YZX", "IXI"]):
            p = PauliString(letters, coefficient=-1.0)
            val = exact_expectation(state, p)
            assert val == pytest.approx(
                oracles.dense_expectation(state.amplitudes, letters, -1.0), abs=1e-12)
            assert abs(val) <= abs(p.coefficient) + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            exact_expectation(PLUS, PauliString("XX"))


class TestBloch:
    def test_maximally_mixed(self):
        np.testing.assert_allclose(bloch_of(np.eye(2) / 2), [0, 0, 0], atol=1e-14)

    def test_z_eigenstate(self):
        np.testing.assert_allclose(bloch_of(np.diag([1.0, 0.0])), [0, 0, 1], atol=1e-14)

    def test_direct_trace_oracle(self):
        rho = 0.5 * (oracles.I2 + 0.3 * oracles.X + 0.4 * oracles.Z)
        np.testing.assert_allclose(bloch_of(rho), [0.3, 0.0, 0.4], atol=1e-14)

    def test_roundtrip_on_unit_ball(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            r = rng.normal(size=3)
            r *= rng.uniform() / np.linalg.norm(r)
            np.testing.assert_allclose(bloch_of(density_from_bloch(r)), r, atol=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            bloch_of(np.array([[0.0, 1.0], [0.0, 0.0]]))  # not Hermitian
        with pytest.raises(ValueError):
            bloch_of(np.eye(2))  # trace 2
        with pytest.raises(ValueError):
            density_from_bloch([1.0, 1.0, 1.0])  # outside the ball


class TestReducedDensity:
    def test_product_state(self):
        state = Statevector.computational_basis(2, 0)
        np.testing.assert_allclose(reduced_density(state, [0]),
                                   np.diag([1.0, 0.0]), atol=1e-14)

    def test_bell_state(self):
        bell = Statevector(np.array([1, 0, 0, 1]) / np.sqrt(2))
        for q in (0, 1):
            np.testing.assert_allclose(reduced_density(bell, [q]),
                                       np.eye(2) / 2, atol=1e-14)

    def test_against_index_summation_oracle(self):
        state = random_state(3, seed=7)
        for qubits in ([0], [2], [0, 1], [1, 2], [2, 0], [0, 1, 2]):
            expected = oracles.dense_reduced(state.amplitudes, qubits)
            np.testing.assert_allclose(reduced_density(state, qubits), expected,
                                       atol=1e-12)

    def test_product_state_tensor_factor(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        a /= np.linalg.norm(a)
        b = rng.normal(size=4) + 1j * rng.normal(size=4)
        b /= np.linalg.norm(b)
        state = Statevector(np.kron(b, a))  # qubit 0 holds |a>
        np.testing.assert_allclose(reduced_density(state, [0]),
                                   np.outer(a, a.conj()), atol=1e-14)

    def test_positive_semidefinite_unit_trace(self):
        state = random_state(4, seed=13)
        rho = reduced_density(state, [1, 3])
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho).min() >= -1e-10

    def test_invalid_indices(self):
        state = random_state(3, seed=1)
        with pytest.raises(ValueError):
            reduced_density(state, [0, 0])
        with pytest.raises(ValueError):
            reduced_density(state, [3])
        with pytest.raises(ValueError):
            reduced_density(state, [0, 1, 2, 0])
        with pytest.raises(ValueError):
            reduced_density(state, [])


class TestStatevector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            Statevector(np.array([1.0, 1.0]))

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            Statevector(np.array([1.0, 0.0, 0.0]))

    def test_amplitudes_read_only(self):
        state = Statevector.computational_basis(2, 1)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 1.0
