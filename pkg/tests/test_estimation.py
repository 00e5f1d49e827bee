import numpy as np
import pytest

from biased_shadows import (
    BiasSpec,
    PauliString,
    ShadowCollection,
    Snapshot,
    Statevector,
    alpha_from_epsilon,
    biased_local_channel,
    biased_mse,
    bloch_of,
    collect_shadow,
    epsilon_from_alpha,
    exact_expectation,
    mean_pauli_estimate,
    plugin_alpha_star,
    reduced_density_estimate,
    snapshot_pauli_estimate,
)

import oracles


PLUS = Statevector(np.array([1, 1]) / np.sqrt(2))
ZERO = Statevector.computational_basis(1, 0)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(amps / np.linalg.norm(amps))


def make_collection(bases_rows, outcome_rows, seed=0):
    return ShadowCollection(np.array(bases_rows, np.uint8),
                            np.array(outcome_rows, np.uint8), seed)


def exact_estimate_average(state, p, epsilon, power=1):
    """Brute-force E[estimate^power] over the exact snapshot law."""
    total = 0.0
    for bases, outcomes, prob in oracles.snapshot_distribution(state.amplitudes, state.n):
        snap = Snapshot(np.array(bases, np.uint8), np.array(outcomes, np.uint8))
        total += prob * snapshot_pauli_estimate(snap, p, epsilon) ** power
    return total


class TestBiasedLocalChannel:
    def test_unbiased_inverse_channel(self):
        out = biased_local_channel(np.diag([1.0, 0.0]), 0.0)
        np.testing.assert_allclose(out, np.diag([2.0, -1.0]), atol=1e-14)

    def test_full_shrink(self):
        rng = np.random.default_rng(0)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        out = biased_local_channel(np.outer(v, v.conj()), 1.0)
        np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-14)

    def test_eight_ninths_is_identity_map(self):
        # 3*sqrt(1 - 8/9) = 1: the dilation exactly cancels and the channel
        # returns its input (Bloch z scaled by 3 * 1/3 = 1)
        out = biased_local_channel(np.diag([1.0, 0.0]), 8.0 / 9.0)
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(bloch_of(out), [0, 0, 1.0], atol=1e-14)

    def test_trace_preserved(self):
        rho = oracles.basis_projector(1, 0)
        for eps in (0.0, 0.3, 0.9):
            out = biased_local_channel(rho, eps)
            assert np.trace(out).real == pytest.approx(1.0, abs=1e-15)

    def test_epsilon_range(self):
        with pytest.raises(ValueError):
            biased_local_channel(np.eye(2) / 2, -0.1)
        with pytest.raises(ValueError):
            biased_local_channel(np.eye(2) / 2, 1.1)


class TestSnapshotEstimate:
    def test_compatible_basis(self):
        snap = Snapshot(np.array([0], np.uint8), np.array([0], np.uint8))
        assert snapshot_pauli_estimate(snap, PauliString("X"), 0.0) == 3.0
        # dense check: tr(X (3|+><+| - I)) = 3
        rec = biased_local_channel(oracles.basis_projector(0, 0), 0.0)
        assert np.trace(oracles.X @ rec).real == pytest.approx(3.0, abs=1e-14)

    def test_incompatible_basis(self):
        snap = Snapshot(np.array([2], np.uint8), np.array([0], np.uint8))
        for eps in (0.0, 0.5):
            assert snapshot_pauli_estimate(snap, PauliString("X"), eps) == 0.0

    def test_two_qubit_product(self):
        snap = Snapshot(np.array([0, 0], np.uint8), np.array([0, 1], np.uint8))
        assert snapshot_pauli_estimate(snap, PauliString("XX"), 0.0) == -9.0

    def test_identity_letters_contribute_unit_factor(self):
        snap = Snapshot(np.array([0, 1, 2], np.uint8), np.array([1, 0, 0], np.uint8))
        assert snapshot_pauli_estimate(snap, PauliString("XII"), 0.0) == -3.0

    def test_channel_consistency_dense(self):
        # estimate equals tr(P x_j channel(projector_j)) on the support
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = 3
            letters = "".join(rng.choice(list("IXYZ")) for _ in range(n))
            if letters == "III":
                letters = "XIZ"
            p = PauliString(letters)
            bases = rng.integers(0, 3, size=n).astype(np.uint8)
            outcomes = rng.integers(0, 2, size=n).astype(np.uint8)
            eps = float(rng.uniform())
            snap = Snapshot(bases, outcomes)
            got = snapshot_pauli_estimate(snap, p, eps)
            expected = 1.0
            for q in p.support:
                rec = biased_local_channel(
                    oracles.basis_projector(bases[q], outcomes[q]), eps)
                expected *= np.trace(oracles.PAULI[p.letters[q]] @ rec).real
            assert got == pytest.approx(expected, abs=1e-12)

    def test_dimension_mismatch(self):
        snap = Snapshot(np.array([0], np.uint8), np.array([0], np.uint8))
        with pytest.raises(ValueError):
            snapshot_pauli_estimate(snap, PauliString("XX"), 0.0)


class TestExactDistributionLaws:
    # brute-force enumeration over all 6^n (basis, outcome) pairs, n <= 3

    @pytest.mark.parametrize("letters", ["X", "ZI", "XY", "IZI", "XYZ", "ZIY"])
    def test_unbiased_at_zero_eps(self, letters):
        state = random_state(len(letters), seed=len(letters))
        p = PauliString(letters)
        avg = exact_estimate_average(state, p, 0.0)
        assert avg == pytest.approx(exact_expectation(state, p), abs=1e-12)

    @pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
    def test_biased_contraction(self, eps):
        state = random_state(2, seed=23)
        p = PauliString("XY")
        avg = exact_estimate_average(state, p, eps)
        expected = (1.0 - eps) ** (p.weight / 2) * exact_expectation(state, p)
        assert avg == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("letters", ["Y", "XZ", "XYZ"])
    def test_variance_law(self, letters):
        state = random_state(len(letters), seed=2 + len(letters))
        p = PauliString(letters)
        second = exact_estimate_average(state, p, 0.0, power=2)
        mean = exact_estimate_average(state, p, 0.0)
        expected = 3.0 ** p.weight - exact_expectation(state, p) ** 2
        assert second - mean**2 == pytest.approx(expected, abs=1e-12)


class TestMeanEstimate:
    def test_single_snapshot_report(self):
        c = make_collection([[0]], [[0]])
        report = mean_pauli_estimate(c, PauliString("X"))
        assert report.value == 3.0
        assert report.n_samples == 1
        assert report.empirical_variance == 0.0
        assert not report.variance_defined

    def test_plus_state_mean_and_variance(self):
        n_s = 100_000
        c = collect_shadow(PLUS, n_s, seed=15)
        report = mean_pauli_estimate(c, PauliString("X"))
        se = np.sqrt(2.0 / n_s)  # Var = 3 - 1 = 2
        assert abs(report.value - 1.0) <= 5 * se
        assert report.empirical_variance == pytest.approx(2.0, rel=0.05)
        assert report.variance_defined

    def test_rescale_identity_is_exact(self):
        state = random_state(2, seed=19)
        c = collect_shadow(state, 500, seed=16)
        p = PauliString("XZ")
        base = mean_pauli_estimate(c, p, 0.0).value
        for eps in (0.1, 0.33, 0.875):
            scaled = mean_pauli_estimate(c, p, eps).value
            assert scaled == (1.0 - eps) ** (p.weight / 2) * base

    def test_matches_snapshot_average(self):
        state = random_state(3, seed=29)
        c = collect_shadow(state, 400, seed=17)
        p = PauliString("YIZ", coefficient=-1.0)
        for eps in (0.0, 0.4):
            report = mean_pauli_estimate(c, p, eps)
            values = [snapshot_pauli_estimate(snap, p, eps) for snap in c]
            assert report.value == pytest.approx(np.mean(values), rel=1e-13, abs=1e-13)
            assert report.empirical_variance == pytest.approx(
                np.var(values, ddof=1), rel=1e-12, abs=1e-13)

    def test_report_serialization(self):
        import json
        c = make_collection([[0], [2]], [[0], [1]])
        report = mean_pauli_estimate(c, PauliString("X"), 0.19)
        obj = json.loads(report.to_json())
        assert set(obj) == {"value", "n_samples", "empirical_variance",
                            "epsilon", "alpha"}
        assert obj["epsilon"] == 0.19

    def test_accepts_bias_spec(self):
        c = make_collection([[0], [0]], [[0], [0]])
        spec = BiasSpec.from_alpha(0.5, w=1)
        report = mean_pauli_estimate(c, PauliString("X"), spec)
        assert report.alpha == pytest.approx(0.5, abs=1e-12)
        assert report.value == pytest.approx(1.5, abs=1e-12)


class TestReducedDensityEstimate:
    def test_single_snapshot_one_qubit(self):
        c = make_collection([[2]], [[0]])
        np.testing.assert_allclose(reduced_density_estimate(c, [0], 0.0),
                                   np.diag([2.0, -1.0]), atol=1e-14)

    def test_full_shrink_ignores_data(self):
        state = random_state(2, seed=37)
        c = collect_shadow(state, 50, seed=18)
        np.testing.assert_allclose(reduced_density_estimate(c, [0, 1], 1.0),
                                   np.eye(4) / 4, atol=1e-14)

    def test_matches_direct_tensor_average(self):
        # oracle: average of kron of per-qubit channel reconstructions
        state = random_state(3, seed=43)
        c = collect_shadow(state, 60, seed=19)
        qubits = [2, 0]
        eps = 0.3
        direct = np.zeros((4, 4), dtype=complex)
        for snap in c:
            mat = np.eye(1, dtype=complex)
            for q in reversed(qubits):
                rec = biased_local_channel(
                    oracles.basis_projector(snap.bases[q], snap.outcomes[q]), eps)
                mat = np.kron(mat, rec)
            direct += mat
        direct /= len(c)
        got = reduced_density_estimate(c, qubits, eps)
        np.testing.assert_allclose(got, direct, atol=1e-12)
        np.testing.assert_allclose(got, got.conj().T, atol=1e-12)
        assert np.trace(got).real == pytest.approx(1.0, abs=1e-12)

    def test_zero_state_converges(self):
        n_s = 100_000
        c = collect_shadow(ZERO, n_s, seed=20)
        rho = reduced_density_estimate(c, [0], 0.0)
        r = bloch_of(rho)
        se = 3.0 / np.sqrt(n_s)  # per-component single-shot variance <= 9
        assert abs(r[0]) <= 5 * se and abs(r[1]) <= 5 * se
        assert abs(r[2] - 1.0) <= 5 * se

    def test_invalid_qubits(self):
        c = make_collection([[0, 1]], [[0, 0]])
        with pytest.raises(ValueError):
            reduced_density_estimate(c, [0, 0], 0.0)
        with pytest.raises(ValueError):
            reduced_density_estimate(c, [2], 0.0)


class TestPluginAlphaStar:
    def test_clamped_eigenstate_mean(self):
        # every snapshot compatible with +1 outcome -> m clamps to 1
        n_s = 8
        c = make_collection([[0]] * n_s, [[0]] * n_s)
        got = plugin_alpha_star(c, PauliString("X"))
        assert got == pytest.approx(2.0 / (2.0 + n_s), rel=1e-12)

    def test_zero_mean_full_shrink(self):
        c = make_collection([[0], [0]], [[0], [1]])
        assert plugin_alpha_star(c, PauliString("X")) == 1.0

    def test_two_sample_half(self):
        c = make_collection([[0], [0]], [[0], [0]])
        got = plugin_alpha_star(c, PauliString("X"))
        assert got == pytest.approx(0.5, rel=1e-12)
        # brute-force: alpha minimizing alpha^2 m^2 + (1-alpha)^2 Var/N_s
        grid = np.linspace(0.0, 1.0, 200_001)
        losses = biased_mse(1.0, 2.0, 2, grid)
        assert got == pytest.approx(grid[np.argmin(losses)], abs=1e-5)

    def test_empirical_variance_variant(self):
        c = collect_shadow(PLUS, 5000, seed=21)
        p = PauliString("X")
        theo = plugin_alpha_star(c, p)
        emp = plugin_alpha_star(c, p, use_empirical_variance=True)
        assert 0.0 < emp < 1.0 and 0.0 < theo < 1.0
        assert emp == pytest.approx(theo, rel=0.2)


class TestConversions:
    def test_roundtrip(self):
        for w in (1, 2, 5, 8):
            for alpha in (0.0, 0.25, 0.9, 1.0):
                eps = epsilon_from_alpha(alpha, w)
                assert 0.0 <= eps <= 1.0
                assert alpha_from_epsilon(eps, w) == pytest.approx(alpha, abs=1e-12)

    def test_weight_zero_identity(self):
        assert alpha_from_epsilon(0.7, 0) == 0.0

    def test_epsilon_zero_reproduces_unbiased(self):
        spec = BiasSpec(0.0)
        for w in range(5):
            assert spec.scale(w) == 1.0

    def test_range_validation(self):
        with pytest.raises(ValueError):
            BiasSpec(1.5)
        with pytest.raises(ValueError):
            epsilon_from_alpha(0.5, 0)
