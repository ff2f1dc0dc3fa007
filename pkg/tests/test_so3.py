"""Tests for the small linear-algebra core.

Oracles are kept independent of the implementation path: spectral norms are
checked against dense SVD, matrix exponentials against scipy's Pade variant,
eigenvalues against characteristic-polynomial root finding, and the polar
projection against the SVD polar factor.
"""

import numpy as np
import pytest
import scipy.linalg

from gyroless.so3 import (
    cross_matrix,
    eigenvalue_match_distance,
    eigenvalues,
    matrix_exp,
    reorthonormalize,
    rotation_about,
    spectral_norm,
)

RNG = np.random.default_rng(2024)


def random_rotation(rng=RNG):
    axis = rng.standard_normal(3)
    return rotation_about(axis, rng.uniform(0, np.pi))


class TestCrossMatrix:
    def test_standard_basis(self):
        """[e1] maps e2 -> e3 and e3 -> -e2."""
        m = cross_matrix([1.0, 0.0, 0.0])
        np.testing.assert_allclose(m @ [0, 1, 0], [0, 0, 1], atol=0)
        np.testing.assert_allclose(m @ [0, 0, 1], [0, -1, 0], atol=0)

    def test_annihilates_own_axis(self):
        for _ in range(50):
            x = RNG.standard_normal(3)
            np.testing.assert_allclose(cross_matrix(x) @ x, 0.0, atol=1e-15)

    def test_skew_symmetric(self):
        for _ in range(50):
            m = cross_matrix(RNG.standard_normal(3))
            np.testing.assert_array_equal(m.T, -m)

    def test_matches_cross_product(self):
        """[x] y == cross(x, y) componentwise for 1000 random pairs."""
        for _ in range(1000):
            x = RNG.standard_normal(3)
            y = RNG.standard_normal(3)
            np.testing.assert_allclose(cross_matrix(x) @ y, np.cross(x, y), rtol=0, atol=1e-14)


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(9)) == pytest.approx(1.0, rel=1e-12)

    def test_diagonal(self):
        d = np.eye(9)
        d[0, 0] = 3.0
        assert spectral_norm(d) == pytest.approx(3.0, rel=1e-12)

    def test_zero(self):
        assert spectral_norm(np.zeros((9, 9))) == 0.0

    def test_against_svd(self):
        """Matches the top singular value from dense SVD within 1e-8 relative."""
        for _ in range(100):
            m = RNG.standard_normal((9, 9))
            want = np.linalg.svd(m, compute_uv=False)[0]
            assert spectral_norm(m) == pytest.approx(want, rel=1e-8)

    def test_tiny_scale(self):
        """Accurate even for rounding-noise magnitudes."""
        m = RNG.standard_normal((3, 3)) * 1e-16
        want = np.linalg.svd(m, compute_uv=False)[0]
        assert spectral_norm(m) == pytest.approx(want, rel=1e-8)

    def test_rejects_non_finite(self):
        m = np.zeros((3, 3))
        m[0, 0] = np.nan
        with pytest.raises(ValueError):
            spectral_norm(m)


class TestMatrixExp:
    def test_zero_matrix(self):
        np.testing.assert_array_equal(matrix_exp(np.zeros((9, 9))), np.eye(9))

    def test_diagonal(self):
        lam = RNG.uniform(-2, 2, 9)
        got = matrix_exp(np.diag(lam), 1.0)
        np.testing.assert_allclose(got, np.diag(np.exp(lam)), rtol=1e-12, atol=1e-14)

    def test_skew_gives_orthogonal(self):
        """e^S is orthogonal for 9x9 skew-symmetric S."""
        for _ in range(20):
            s = RNG.standard_normal((9, 9))
            s = s - s.T
            e = matrix_exp(s)
            np.testing.assert_allclose(e.T @ e, np.eye(9), atol=1e-9)

    def test_semigroup(self):
        """e^{M(s+t)} == e^{Ms} e^{Mt} for ||M|| <= 5."""
        for _ in range(20):
            m = RNG.standard_normal((9, 9))
            m *= 5.0 / spectral_norm(m)
            s, t = RNG.uniform(0.1, 2.0, 2)
            lhs = matrix_exp(m, s + t)
            rhs = matrix_exp(m, s) @ matrix_exp(m, t)
            assert spectral_norm(lhs - rhs) <= 1e-8 * spectral_norm(lhs)

    def test_against_scipy(self):
        """Within 1e-10 relative of the Pade implementation."""
        for _ in range(30):
            m = RNG.standard_normal((9, 9))
            s = RNG.uniform(0.0, 3.0)
            got = matrix_exp(m, s)
            want = scipy.linalg.expm(m * s)
            assert spectral_norm(got - want) <= 1e-10 * max(1.0, spectral_norm(want))

    def test_rejects_negative_s(self):
        with pytest.raises(ValueError):
            matrix_exp(np.eye(3), -1.0)


def charpoly_roots(m):
    """Eigenvalue oracle: Faddeev-LeVerrier characteristic polynomial, then
    companion-matrix roots. Independent of the direct eigensolve path."""
    n = m.shape[0]
    coeffs = [1.0]
    work = np.zeros_like(m)
    c = 1.0
    for k in range(1, n + 1):
        work = m @ work + c * np.eye(n)
        c = -np.trace(m @ work) / k
        coeffs.append(c)
    return np.roots(coeffs)


class TestEigenvalues:
    def test_diagonal(self):
        got = eigenvalues(np.diag(np.arange(1.0, 10.0)))
        np.testing.assert_allclose(np.sort(got.real), np.arange(1.0, 10.0), atol=1e-10)
        np.testing.assert_allclose(got.imag, 0.0, atol=1e-10)

    def test_embedded_rotation_generator(self):
        """A 2x2 rotation generator block contributes the pair +/- i."""
        m = np.zeros((9, 9))
        m[0, 1], m[1, 0] = -1.0, 1.0
        got = eigenvalues(m)
        assert eigenvalue_match_distance(got, [0] * 7 + [1j, -1j]) <= 1e-8

    def test_trace_and_determinant(self):
        for _ in range(50):
            m = RNG.standard_normal((9, 9))
            w = eigenvalues(m)
            assert abs(w.sum() - np.trace(m)) <= 1e-8 * max(1.0, abs(np.trace(m)))
            det = np.linalg.det(m)
            assert abs(np.prod(w) - det) <= 1e-6 * max(1.0, abs(det))

    def test_against_charpoly_roots(self):
        for _ in range(25):
            m = RNG.standard_normal((9, 9))
            assert eigenvalue_match_distance(eigenvalues(m), charpoly_roots(m)) <= 1e-6


class TestEigenvalueMatching:
    def test_permutation_invariant(self):
        w = RNG.standard_normal(9) + 1j * RNG.standard_normal(9)
        shuffled = w[RNG.permutation(9)]
        assert eigenvalue_match_distance(w, shuffled) == 0.0

    def test_reports_gap(self):
        assert eigenvalue_match_distance([1.0, 2.0], [1.0, 2.5]) == pytest.approx(0.5)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            eigenvalue_match_distance([1.0], [1.0, 2.0])


class TestReorthonormalize:
    def test_fixed_point(self):
        """Exact rotations project to themselves."""
        for _ in range(20):
            r = random_rotation()
            np.testing.assert_allclose(reorthonormalize(r), r, atol=1e-12)

    def test_continuity(self):
        """A 1e-6 perturbation moves the projection by at most 2e-6."""
        for _ in range(20):
            r = random_rotation()
            drifted = r * (1.0 + 1e-6) + 1e-6 * RNG.standard_normal((3, 3))
            fixed = reorthonormalize(drifted)
            assert np.abs(fixed - drifted).max() <= 2e-6 + 2e-6

    def test_output_is_rotation(self):
        for _ in range(50):
            r = random_rotation() + 0.02 * RNG.standard_normal((3, 3))
            fixed = reorthonormalize(r)
            np.testing.assert_allclose(fixed.T @ fixed, np.eye(3), atol=1e-12)
            assert np.linalg.det(fixed) > 0

    def test_matches_svd_polar_factor(self):
        """Agrees with the independent SVD polar decomposition."""
        for _ in range(50):
            r = random_rotation() + 0.02 * RNG.standard_normal((3, 3))
            u, _, vt = np.linalg.svd(r)
            want = u @ vt
            np.testing.assert_allclose(reorthonormalize(r), want, atol=1e-11)

    def test_rejects_far_from_orthogonal(self):
        with pytest.raises(ValueError):
            reorthonormalize(np.eye(3) * 2.0)

    def test_rejects_reflection(self):
        with pytest.raises(ValueError):
            reorthonormalize(np.diag([1.0, 1.0, -1.0]))


class TestRotationAbout:
    def test_known_quarter_turn(self):
        r = rotation_about([0, 0, 1], np.pi / 2)
        np.testing.assert_allclose(r @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_orthogonal(self):
        for _ in range(20):
            r = random_rotation()
            np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-14)
            assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-12)
