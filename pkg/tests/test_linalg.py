import numpy as np
import pytest

from ottosim.linalg import (
    QuantumState,
    herm_eig,
    hermitize,
    kron,
    partial_trace,
    pure_state,
    sqrtm_psd,
    uhlmann_fidelity,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return hermitize(a)


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(I2, I2), np.eye(4))

    def test_diagonal(self):
        assert np.array_equal(kron(np.diag([1.0, -1.0]).astype(complex), I2),
                              np.diag([1.0, 1.0, -1.0, -1.0]))

    def test_double_bit_flip(self):
        ket00 = np.zeros(4, dtype=complex)
        ket00[0] = 1.0
        flipped = kron(SX, SX) @ ket00
        expected = np.zeros(4, dtype=complex)
        expected[3] = 1.0  # |00> -> |11>, basis index 0 -> 3
        assert np.array_equal(flipped, expected)

    def test_associativity_exact(self):
        # Integer-valued entries keep every product exact in floating point,
        # so associativity can be asserted entrywise exactly.
        rng = np.random.default_rng(7)
        a, b, c = (rng.integers(-3, 4, size=(2, 2)) + 1j * rng.integers(-3, 4, size=(2, 2))
                   for _ in range(3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            kron(np.ones((2, 3)), I2)


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(0)
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 3)
        state = QuantumState(np.kron(rho_a, rho_b), (2, 3))
        assert np.allclose(partial_trace(state, (0,)).matrix, rho_a, atol=1e-14)
        assert np.allclose(partial_trace(state, (1,)).matrix, rho_b, atol=1e-14)

    def test_bell_state_reduction(self):
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        state = pure_state(bell, (2, 2))
        reduced = partial_trace(state, (0,))
        assert np.allclose(reduced.matrix, I2 / 2, atol=1e-15)

    def test_trace_preserved(self):
        rng = np.random.default_rng(1)
        state = QuantumState(random_density(rng, 12), (2, 2, 3))
        for keep in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]:
            out = partial_trace(state, keep)
            assert abs(np.trace(out.matrix) - 1.0) < 1e-13

    def test_composition(self):
        rng = np.random.default_rng(2)
        state = QuantumState(random_density(rng, 8), (2, 2, 2))
        one_shot = partial_trace(state, (0,))
        two_step = partial_trace(partial_trace(state, (0, 1)), (0,))
        assert np.abs(one_shot.matrix - two_step.matrix).max() < 1e-12

    def test_keep_order_and_dims(self):
        rng = np.random.default_rng(3)
        state = QuantumState(random_density(rng, 12), (2, 2, 3))
        out = partial_trace(state, (2, 0))  # unsorted input, kept order is original
        assert out.dims == (2, 3)

    def test_errors(self):
        rng = np.random.default_rng(4)
        state = QuantumState(random_density(rng, 4), (2, 2))
        with pytest.raises(ValueError):
            partial_trace(state, ())
        with pytest.raises(ValueError):
            partial_trace(state, (5,))


class TestHermEig:
    def test_diagonal_sorted(self):
        w, v = herm_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert np.allclose(w, [1.0, 2.0, 3.0])
        # permutation eigenvectors
        assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])

    def test_pauli_x(self):
        w, v = herm_eig(SX)
        assert np.allclose(w, [-1.0, 1.0])
        expected = np.array([1.0, -1.0]) / np.sqrt(2)
        assert abs(abs(v[:, 0] @ expected) - 1.0) < 1e-12

    def test_reconstruction_and_gram(self):
        rng = np.random.default_rng(5)
        for d in (2, 4, 8, 16):
            h = random_hermitian(rng, d)
            w, v = herm_eig(h)
            assert np.abs((v * w) @ v.conj().T - h).max() < 1e-10
            assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-10
            assert np.all(np.diff(w) >= 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="not Hermitian"):
            herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSqrtmPsd:
    def test_identity(self):
        assert np.allclose(sqrtm_psd(np.eye(3)), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        assert np.allclose(sqrtm_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_square_recovers_input(self):
        rng = np.random.default_rng(6)
        for d in (2, 4, 8):
            rho = random_density(rng, d)
            s = sqrtm_psd(rho)
            assert np.abs(s @ s - rho).max() < 1e-9
            assert np.abs(s - s.conj().T).max() < 1e-12

    def test_clamps_tolerable_negative(self):
        m = np.diag([1.0, -5e-9])  # within the positivity tolerance
        s = sqrtm_psd(m)
        assert s[1, 1] == 0.0

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError, match="below"):
            sqrtm_psd(np.diag([1.0, -1e-6]))


class TestUhlmannFidelity:
    def test_identical_states(self):
        rng = np.random.default_rng(7)
        rho = QuantumState(random_density(rng, 4), (2, 2))
        assert uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_pure_states(self):
        zero = pure_state(np.array([1, 0]), (2,))
        one = pure_state(np.array([0, 1]), (2,))
        assert uhlmann_fidelity(zero, one) == pytest.approx(0.0, abs=1e-12)

    def test_pure_state_overlap_oracle(self):
        # For pure states the fidelity must equal |<psi|phi>| directly.
        rng = np.random.default_rng(8)
        for _ in range(20):
            psi = rng.normal(size=4) + 1j * rng.normal(size=4)
            phi = rng.normal(size=4) + 1j * rng.normal(size=4)
            psi /= np.linalg.norm(psi)
            phi /= np.linalg.norm(phi)
            overlap = abs(np.vdot(psi, phi))
            f = uhlmann_fidelity(pure_state(psi, (4,)), pure_state(phi, (4,)))
            assert f == pytest.approx(overlap, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(9)
        rho = QuantumState(random_density(rng, 4), (4,))
        sigma = QuantumState(random_density(rng, 4), (4,))
        assert uhlmann_fidelity(rho, sigma) == pytest.approx(
            uhlmann_fidelity(sigma, rho), abs=1e-9
        )

    def test_range_clamped(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            rho = QuantumState(random_density(rng, 4), (4,))
            sigma = QuantumState(random_density(rng, 4), (4,))
            assert 0.0 <= uhlmann_fidelity(rho, sigma) <= 1.0

    def test_unity_only_for_equal_states(self):
        # F = 1 iff the states coincide, on a corpus of perturbed pairs.
        rng = np.random.default_rng(11)
        rho = random_density(rng, 4)
        for eps in (1e-3, 1e-5):
            bump = random_density(rng, 4)
            sigma = (1 - eps) * rho + eps * bump
            f = uhlmann_fidelity(QuantumState(rho, (4,)), QuantumState(sigma, (4,)))
            assert f < 1.0 - 1e-12
        assert uhlmann_fidelity(QuantumState(rho, (4,)), QuantumState(rho.copy(), (4,))) > 1.0 - 1e-11

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(12)
        rho = QuantumState(random_density(rng, 4), (2, 2))
        sigma = QuantumState(random_density(rng, 4), (4,))
        with pytest.raises(ValueError, match="mismatch"):
            uhlmann_fidelity(rho, sigma)


class TestQuantumState:
    def test_valid_state_passes(self):
        rng = np.random.default_rng(13)
        QuantumState(random_density(rng, 8), (2, 2, 2)).validate()

    def test_dims_must_match_matrix(self):
        with pytest.raises(ValueError, match="dims"):
            QuantumState(np.eye(4) / 4, (2, 3))

    def test_validate_rejects_bad_states(self):
        good = np.eye(2, dtype=complex) / 2
        with pytest.raises(ValueError, match="Hermiticity"):
            QuantumState(good + np.array([[0, 1e-6], [0, 0]]), (2,)).validate()
        with pytest.raises(ValueError, match="trace"):
            QuantumState(good * 1.1, (2,)).validate()
        with pytest.raises(ValueError, match="eigenvalue"):
            QuantumState(np.diag([1.1, -0.1]).astype(complex), (2,)).validate()
