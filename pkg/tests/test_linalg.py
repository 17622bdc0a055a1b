"""Kernel tests: Cholesky, symmetric eig, generalized eig, multiplicity.

Oracles are deliberately independent of the implementation path: the symmetric
eigensolver is checked against characteristic-polynomial roots (Newton's
identities + companion-matrix rootfinding) and the generalized solver against
scipy's QZ on the unsymmetric pair.
"""

import numpy as np
import pytest
import scipy.linalg

from geneig import (
    NotPositiveDefinite,
    cholesky,
    gen_eig,
    multiplicity,
    sym_eig,
)


def char_poly_coeffs(X):
    """Monic characteristic polynomial coefficients via Newton's identities.

    Returns [1, c_1, ..., c_n] with p(t) = t^n + c_1 t^{n-1} + ... + c_n,
    computed from power sums tr(X^k) only (no eigendecomposition involved).
    """
    n = X.shape[0]
    power = np.eye(n)
    psums = []
    for _ in range(n):
        power = power @ X
        psums.append(np.trace(power))
    e = [1.0]
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1.0) ** (i - 1) * e[k - i] * psums[i - 1]
        e.append(acc / k)
    return [1.0] + [(-1.0) ** k * e[k] for k in range(1, n + 1)]


def random_spd(rng, n, cond_boost=1.0):
    R = rng.standard_normal((n, n))
    return R @ R.T + cond_boost * n * np.eye(n)


class TestCholesky:
    def test_identity(self):
        for n in (1, 3, 7):
            np.testing.assert_array_equal(cholesky(np.eye(n)), np.eye(n))

    def test_2x2_closed_form(self):
        L = cholesky(np.array([[4.0, 2.0], [2.0, 5.0]]))
        np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, 2.0]], rtol=0, atol=1e-15)

    def test_reconstructs_random_spd(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            Y = random_spd(rng, 6)
            L = cholesky(Y)
            assert np.all(np.diag(L) > 0)
            assert np.all(np.triu(L, 1) == 0)
            resid = np.linalg.norm(L @ L.T - Y) / np.linalg.norm(Y)
            assert resid <= 1e-12

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_rejects_semidefinite(self):
        v = np.array([[1.0], [2.0]])
        with pytest.raises(NotPositiveDefinite):
            cholesky(v @ v.T)


class TestSymEig:
    def test_diagonal_sorted_descending(self):
        w, _ = sym_eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [3.0, 2.0, 1.0])

    def test_2x2_exchange_matrix(self):
        w, U = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-15)
        ref = 1.0 / np.sqrt(2.0)
        # columns defined up to sign
        np.testing.assert_allclose(np.abs(U), [[ref, ref], [ref, ref]], atol=1e-15)
        np.testing.assert_allclose(U[0, 0] * U[1, 0], ref**2, atol=1e-15)
        np.testing.assert_allclose(U[0, 1] * U[1, 1], -(ref**2), atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_matches_char_poly_roots(self, n):
        rng = np.random.default_rng(100 + n)
        for _ in range(25):
            A = rng.standard_normal((n, n))
            X = 0.5 * (A + A.T)
            w, _ = sym_eig(X)
            roots = np.sort(np.roots(char_poly_coeffs(X)).real)[::-1]
            np.testing.assert_allclose(w, roots, rtol=0, atol=1e-8 * max(1, np.abs(w).max()))

    def test_residual_and_orthonormality_n8(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            A = rng.standard_normal((8, 8))
            X = 0.5 * (A + A.T)
            w, U = sym_eig(X)
            scale = np.linalg.norm(X, 2)
            assert np.linalg.norm(X @ U - U * w, axis=0).max() <= 1e-10 * max(1, scale)
            assert np.abs(U.T @ U - np.eye(8)).max() <= 1e-10
            assert np.all(np.diff(w) <= 0)


class TestGenEig:
    def test_identity_pair(self):
        dec = gen_eig(np.eye(4), np.eye(4))
        np.testing.assert_allclose(dec.eigenvalues, np.ones(4))
        np.testing.assert_allclose(dec.eigenvectors.T @ dec.eigenvectors, np.eye(4), atol=1e-12)

    def test_diagonal_pair_closed_form(self):
        dec = gen_eig(np.diag([1.0, 2.0]), np.diag([2.0, 1.0]))
        np.testing.assert_allclose(dec.eigenvalues, [2.0, 0.5], atol=1e-14)
        np.testing.assert_allclose(np.abs(dec.eigenvectors[:, 0]), [0.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(np.abs(dec.eigenvectors[:, 1]), [1 / np.sqrt(2), 0.0], atol=1e-14)

    def test_matches_qz_oracle_n5(self):
        rng = np.random.default_rng(55)
        for _ in range(30):
            A = rng.standard_normal((5, 5))
            X = 0.5 * (A + A.T)
            Y = random_spd(rng, 5)
            dec = gen_eig(X, Y)
            ref = np.sort(scipy.linalg.eig(X, Y, right=False).real)[::-1]
            scale = max(1.0, np.abs(ref).max())
            np.testing.assert_allclose(dec.eigenvalues, ref, rtol=0, atol=1e-8 * scale)

    def test_b_orthonormality_and_residual(self):
        rng = np.random.default_rng(56)
        for _ in range(20):
            A = rng.standard_normal((6, 6))
            X = 0.5 * (A + A.T)
            Y = random_spd(rng, 6)
            dec = gen_eig(X, Y)
            V, w = dec.eigenvectors, dec.eigenvalues
            assert np.abs(V.T @ Y @ V - np.eye(6)).max() <= 1e-8
            resid = X @ V - Y @ V * w
            bound = 1e-8 * (np.linalg.norm(X) + np.linalg.norm(Y) * np.abs(w).max())
            assert np.linalg.norm(resid, axis=0).max() <= bound

    def test_agrees_with_sym_eig_for_identity_y(self):
        rng = np.random.default_rng(57)
        A = rng.standard_normal((7, 7))
        X = 0.5 * (A + A.T)
        dec = gen_eig(X, np.eye(7))
        w, _ = sym_eig(X)
        np.testing.assert_allclose(dec.eigenvalues, w, rtol=1e-12, atol=1e-12)

    def test_joint_and_single_scaling(self):
        rng = np.random.default_rng(58)
        A = rng.standard_normal((5, 5))
        X = 0.5 * (A + A.T)
        Y = random_spd(rng, 5)
        base = gen_eig(X, Y).eigenvalues
        joint = gen_eig(3.0 * X, 3.0 * Y).eigenvalues
        np.testing.assert_allclose(joint, base, rtol=1e-10)
        single = gen_eig(3.0 * X, Y).eigenvalues
        np.testing.assert_allclose(single, 3.0 * base, rtol=1e-10)

    def test_propagates_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            gen_eig(np.eye(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestMultiplicity:
    def test_exact_tie(self):
        assert multiplicity(np.array([5.0, 5.0, 3.0]), 1e-8) == 2

    def test_separated(self):
        assert multiplicity(np.array([5.0, 4.999, 3.0]), 1e-8) == 1

    def test_boundary_inclusive(self):
        assert multiplicity(np.array([5.0, 5.0 - 5e-9, 3.0]), 1e-8) == 2

    def test_default_tolerance_scales_with_lambda1(self):
        assert multiplicity(np.array([1e6, 1e6 - 0.5, 0.0])) == 2
        assert multiplicity(np.array([1.0, 1.0 - 0.5, 0.0])) == 1

    def test_always_at_least_one(self):
        assert multiplicity(np.array([2.0]), 0.0) == 1
