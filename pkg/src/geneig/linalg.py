"""Dense symmetric linear algebra kernel.

Cholesky factorization, symmetric eigendecomposition, and the reduction of the
symmetric-definite generalized eigenproblem X v = lam Y v (Y positive definite)
to a standard one. Everything is dense: problem sizes of interest are n <= a few
hundred, so no sparse or iterative machinery is warranted.

All functions are pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


class NotPositiveDefinite(Exception):
    """The matrix expected to be positive definite is not (within tolerance)."""


class NoConvergence(Exception):
    """The iterative eigenvalue reduction failed to converge."""


@dataclass(frozen=True)
class GenEigDecomposition:
    """Spectrum of a symmetric-definite pair (X, Y).

    Attributes
    ----------
    eigenvalues : (n,) ndarray
        Generalized eigenvalues, sorted descending.
    eigenvectors : (n, n) ndarray
        Column i solves X v_i = eigenvalues[i] * Y v_i, normalized so that
        v_i^T Y v_j = delta_ij.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


def cholesky(Y: np.ndarray) -> np.ndarray:
    """Lower-triangular L with Y = L L^T and strictly positive diagonal.

    Parameters
    ----------
    Y : (n, n) ndarray
        Symmetric positive definite matrix.

    Raises
    ------
    NotPositiveDefinite
        When a pivot falls below n * eps * max(diag(Y)), which signals that Y
        is not positive definite to working precision.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    if Y.shape != (n, n):
        raise ValueError(f"expected square matrix, got shape {Y.shape}")
    diag_max = float(np.max(np.diag(Y))) if n else 0.0
    pivot_floor = n * np.finfo(float).eps * diag_max
    L = np.zeros_like(Y)
    for j in range(n):
        pivot = Y[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= pivot_floor:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at column {j} below floor {pivot_floor:.3e}"
            )
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (Y[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def sym_eig(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues sorted descending.
    U : (n, n) ndarray
        Orthonormal eigenvectors, column i paired with w[i].

    Raises
    ------
    NoConvergence
        If the underlying iterative reduction fails.
    """
    X = np.asarray(X, dtype=float)
    try:
        w, U = np.linalg.eigh(X)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    # eigh returns ascending order; flip to descending
    return w[::-1].copy(), U[:, ::-1].copy()


def gen_eig(X: np.ndarray, Y: np.ndarray) -> GenEigDecomposition:
    """Solve X v = lam Y v for symmetric X and symmetric positive definite Y.

    Reduction: factor Y = L L^T, eigendecompose the congruent symmetric matrix
    W = L^{-1} X L^{-T} (same eigenvalues as the pair), then map eigenvectors
    back through v = L^{-T} u, which makes them Y-orthonormal.

    Raises
    ------
    NotPositiveDefinite
        Propagated from the Cholesky factorization of Y.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {Y.shape}")
    L = cholesky(Y)
    # W = L^{-1} X L^{-T}, symmetrized to kill round-off skew
    W = solve_triangular(L, X, lower=True)
    W = solve_triangular(L, W.T, lower=True).T
    W = 0.5 * (W + W.T)
    w, U = sym_eig(W)
    V = solve_triangular(L, U, lower=True, trans="T")
    return GenEigDecomposition(eigenvalues=w, eigenvectors=V)


def multiplicity(eigenvalues: np.ndarray, gap_tol: float | None = None) -> int:
    """Count eigenvalues within gap_tol of the largest.

    ``eigenvalues`` must be sorted descending. The default tolerance is
    1e-6 * max(1, |lam_1|), a numerical stand-in for exact multiplicity.
    """
    w = np.asarray(eigenvalues, dtype=float)
    if w.size == 0:
        raise ValueError("empty eigenvalue array")
    if gap_tol is None:
        gap_tol = 1e-6 * max(1.0, abs(float(w[0])))
    if gap_tol < 0:
        raise ValueError("gap_tol must be nonnegative")
    return int(np.sum(w[0] - w <= gap_tol))
