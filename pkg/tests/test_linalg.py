import numpy as np
import pytest

from tsdist import linalg
from tsdist.errors import AsymmetryTooLarge, NotPSD, NotSquare, ShapeMismatch


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


def random_psd(rng, n, rank=None):
    b = rng.normal(size=(n, rank or n))
    return b @ b.T


class TestSymEigen:
    def test_identity(self):
        eig = linalg.sym_eigen(np.eye(3))
        np.testing.assert_array_equal(eig.eigenvalues, [1.0, 1.0, 1.0])
        np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        eig = linalg.sym_eigen(np.diag([4.0, 1.0]))
        np.testing.assert_array_equal(eig.eigenvalues, [4.0, 1.0])
        np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(2))

    def test_two_by_two_against_characteristic_polynomial(self):
        # det([[2-x, 1], [1, 2-x]]) = (2-x)^2 - 1 = 0  ->  x = 3, 1
        eig = linalg.sym_eigen([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(eig.eigenvalues, [3.0, 1.0], atol=1e-14)
        h = 1 / np.sqrt(2)
        np.testing.assert_allclose(eig.eigenvectors[:, 0], [h, h], atol=1e-14)
        np.testing.assert_allclose(eig.eigenvectors[:, 1], [h, -h], atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 48])
    def test_invariants_on_random_symmetric(self, rng, n):
        a = random_symmetric(rng, n)
        eig = linalg.sym_eigen(a)
        v = eig.eigenvectors
        assert np.all(np.diff(eig.eigenvalues) <= 0)
        assert np.max(np.abs(v.T @ v - np.eye(n))) <= 1e-9
        assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-8
        np.testing.assert_allclose(eig.eigenvalues, np.linalg.eigvalsh(a)[::-1], atol=1e-10)

    def test_sign_convention(self, rng):
        eig = linalg.sym_eigen(random_symmetric(rng, 6))
        for col in eig.eigenvectors.T:
            first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
            assert first > 0

    def test_trace_matches_eigenvalue_sum(self, rng):
        for n in (3, 10, 30):
            a = random_symmetric(rng, n)
            total = linalg.sym_eigen(a).eigenvalues.sum()
            assert abs(linalg.trace(a) - total) <= 1e-9 * max(1.0, abs(total))

    def test_near_symmetric_input_is_symmetrized(self):
        a = np.array([[1.0, 0.5 + 1e-10], [0.5, 1.0]])
        eig = linalg.sym_eigen(a)
        np.testing.assert_allclose(eig.eigenvalues, [1.5, 0.5], atol=1e-9)

    def test_rejects_asymmetric(self):
        with pytest.raises(AsymmetryTooLarge):
            linalg.sym_eigen([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(NotSquare):
            linalg.sym_eigen(np.ones((2, 3)))

    def test_repeated_eigenvalues(self):
        a = np.ones((4, 4))
        eig = linalg.sym_eigen(a)
        np.testing.assert_allclose(eig.eigenvalues, [4, 0, 0, 0], atol=1e-13)
        assert np.max(np.abs(eig.reconstruct() - a)) <= 1e-12


class TestPsdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(linalg.psd_sqrt(np.eye(4)), np.eye(4), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(linalg.psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_two_by_two_remultiplies(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        s = linalg.psd_sqrt(a)
        assert np.max(np.abs(s @ s - a)) <= 1e-7
        np.testing.assert_array_equal(s, s.T)

    @pytest.mark.parametrize("n,rank", [(8, None), (48, None), (20, 5)])
    def test_square_reproduces_input(self, rng, n, rank):
        a = random_psd(rng, n, rank)
        s = linalg.psd_sqrt(a)
        spectral = np.linalg.norm(a, 2)
        assert np.max(np.abs(s @ s - a)) <= 1e-7 * spectral
        assert np.linalg.eigvalsh(s).min() >= -1e-10 * spectral

    @pytest.mark.parametrize("c", [0.3, 1.7, 5.0])
    def test_scaling(self, rng, c):
        a = random_psd(rng, 12)
        lhs = linalg.psd_sqrt(c * c * a)
        rhs = c * linalg.psd_sqrt(a)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(rhs))

    def test_small_negative_eigenvalue_is_clamped(self):
        a = np.diag([1.0, -1e-10])
        np.testing.assert_allclose(linalg.psd_sqrt(a), np.diag([1.0, 0.0]))

    def test_negative_definite_part_rejected(self):
        with pytest.raises(NotPSD):
            linalg.psd_sqrt(np.diag([1.0, -1e-3]))

    def test_trace_sqrt(self, rng):
        a = random_psd(rng, 10)
        assert linalg.trace_sqrt(a) == pytest.approx(np.trace(linalg.psd_sqrt(a)), abs=1e-10)


class TestMatmulTrace:
    def test_identity_products(self, rng):
        a = rng.normal(size=(3, 3))
        np.testing.assert_array_equal(linalg.matmul(np.eye(3), a), a)
        np.testing.assert_array_equal(linalg.matmul(a, np.eye(3)), a)

    def test_hand_product(self):
        out = linalg.matmul([[1, 2], [3, 4]], [[0, 1], [1, 0]])
        np.testing.assert_array_equal(out, [[2, 1], [4, 3]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            linalg.matmul(np.ones((2, 3)), np.ones((2, 3)))

    @pytest.mark.parametrize(
        "a,expected",
        [(np.eye(5), 5.0), (np.diag([1.0, 2.0, 3.0]), 6.0), ([[2, 5], [7, 3]], 5.0)],
    )
    def test_trace(self, a, expected):
        assert linalg.trace(a) == expected

    def test_trace_non_square(self):
        with pytest.raises(NotSquare):
            linalg.trace(np.ones((2, 3)))
