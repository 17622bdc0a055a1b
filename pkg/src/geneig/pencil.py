"""Affine symmetric matrix pencils and the largest-eigenvalue objective.

An affine pencil is the pair of maps A(x) = A0 + sum_e x_e A_e and
B(x) = B0 + sum_e x_e B_e with all coefficient matrices symmetric of a common
order n. The objective of interest is lambda_max(A(x), B(x)), the largest
generalized eigenvalue, defined wherever B(x) is positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import GenEigDecomposition, gen_eig, sym_eig


class DimensionMismatch(Exception):
    """Input dimensions disagree with the pencil."""


def _as_sym_stack(mats, n: int, count: int, name: str, tol: float = 1e-12) -> np.ndarray:
    """Validate and symmetrize a stack of matrices (count, n, n)."""
    arr = np.asarray(mats, dtype=float)
    if arr.shape != (count, n, n):
        raise DimensionMismatch(f"{name}: expected shape {(count, n, n)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite entries")
    skew = np.abs(arr - arr.transpose(0, 2, 1)).max(initial=0.0)
    scale = np.abs(arr).max(initial=0.0)
    if skew > tol * max(1.0, scale):
        raise ValueError(f"{name}: asymmetry {skew:.3e} exceeds tolerance")
    return 0.5 * (arr + arr.transpose(0, 2, 1))


@dataclass(frozen=True)
class AffinePencil:
    """Affine symmetric pencil (A(x), B(x)) in m variables of order n.

    ``A`` and ``B`` are stacked coefficient arrays of shape (m, n, n); ``A0``
    and ``B0`` the constant terms. All matrices are symmetrized on
    construction (asymmetry beyond 1e-12 relative is rejected).
    """

    A0: np.ndarray
    A: np.ndarray
    B0: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A0 = np.asarray(self.A0, dtype=float)
        n = A0.shape[0]
        A = np.asarray(self.A, dtype=float)
        m = A.shape[0] if A.ndim == 3 else -1
        object.__setattr__(self, "A0", _as_sym_stack([A0], n, 1, "A0")[0])
        object.__setattr__(self, "A", _as_sym_stack(self.A, n, m, "A"))
        object.__setattr__(self, "B0", _as_sym_stack([self.B0], n, 1, "B0")[0])
        object.__setattr__(self, "B", _as_sym_stack(self.B, n, m, "B"))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A0.shape[0]


@dataclass(frozen=True)
class PointSpectrum:
    """Generalized spectrum of a pencil at a point x."""

    x: np.ndarray
    decomposition: GenEigDecomposition
    lambda_max: float


def evaluate(pencil: AffinePencil, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (A(x), B(x)), the exact affine combinations."""
    x = np.asarray(x, dtype=float)
    if x.shape != (pencil.m,):
        raise DimensionMismatch(f"x: expected shape {(pencil.m,)}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x has non-finite entries")
    Ax = pencil.A0 + np.tensordot(x, pencil.A, axes=1)
    Bx = pencil.B0 + np.tensordot(x, pencil.B, axes=1)
    return Ax, Bx


def spectrum_at(pencil: AffinePencil, x: np.ndarray) -> PointSpectrum:
    """Full generalized spectrum at x; requires B(x) positive definite.

    Raises NotPositiveDefinite (from the Cholesky of B(x)) when x lies outside
    the pencil's validity region.
    """
    Ax, Bx = evaluate(pencil, x)
    dec = gen_eig(Ax, Bx)
    return PointSpectrum(x=np.array(x, dtype=float), decomposition=dec,
                         lambda_max=float(dec.eigenvalues[0]))


def sublevel_gap(pencil: AffinePencil, x: np.ndarray, alpha: float) -> float:
    """Largest eigenvalue of A(x) - alpha * B(x).

    Nonpositive iff lambda_max(A(x), B(x)) <= alpha whenever B(x) is positive
    definite. Uses only a standard symmetric eigensolve, so it stays
    well-defined when B(x) is merely positive semidefinite, which is what the
    bisection feasibility oracle needs at the boundary of the design domain.
    """
    Ax, Bx = evaluate(pencil, x)
    w, _ = sym_eig(Ax - float(alpha) * Bx)
    return float(w[0])


def pencil_to_dict(pencil: AffinePencil) -> dict:
    """JSON-ready dict: {"m", "n", "A0", "A", "B0", "B"} with row-major n x n lists."""
    return {
        "m": pencil.m,
        "n": pencil.n,
        "A0": pencil.A0.tolist(),
        "A": pencil.A.tolist(),
        "B0": pencil.B0.tolist(),
        "B": pencil.B.tolist(),
    }


def pencil_from_dict(data: dict) -> AffinePencil:
    """Inverse of pencil_to_dict; validates shapes and symmetry (1e-12)."""
    try:
        m, n = int(data["m"]), int(data["n"])
        A0 = np.asarray(data["A0"], dtype=float).reshape(n, n)
        B0 = np.asarray(data["B0"], dtype=float).reshape(n, n)
        A = np.asarray(data["A"], dtype=float).reshape(m, n, n)
        B = np.asarray(data["B"], dtype=float).reshape(m, n, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed pencil data: {exc}") from exc
    return AffinePencil(A0=A0, A=A, B0=B0, B=B)
