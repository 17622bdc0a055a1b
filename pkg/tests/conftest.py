"""Shared test fixtures: standard small pencils and seeded random generators."""

import numpy as np
from scipy.optimize import brentq

from geneig.feasible import FeasibleSet
from geneig.pencil import AffinePencil


def sym(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * 0.5 * (A + A.T)


def remark_pencil():
    """A(x) = diag(x1, x2), B(x) = diag(x2, x1); lambda_max = max(x1/x2, x2/x1)."""
    Z = np.zeros((2, 2))
    return AffinePencil(
        A0=Z,
        A=[np.diag([1.0, 0.0]), np.diag([0.0, 1.0])],
        B0=Z,
        B=[np.diag([0.0, 1.0]), np.diag([1.0, 0.0])],
    )


def scalar_pencil():
    """A = (1), B = (x); lambda_max = 1/x on x > 0."""
    return AffinePencil(A0=[[1.0]], A=[[[0.0]]], B0=[[0.0]], B=[[[1.0]]])


def diag_pencil(a0, acoef, b0, bcoef):
    """Diagonal affine pencil from per-entry affine coefficients.

    a0, b0: (n,) constants; acoef, bcoef: (m, n) linear coefficients.
    """
    acoef = np.asarray(acoef, dtype=float)
    m, n = acoef.shape
    return AffinePencil(
        A0=np.diag(np.asarray(a0, dtype=float)),
        A=np.stack([np.diag(acoef[e]) for e in range(m)]),
        B0=np.diag(np.asarray(b0, dtype=float)),
        B=np.stack([np.diag(np.asarray(bcoef, dtype=float)[e]) for e in range(m)]),
    )


def scalar_set():
    """Interval domain [0.5, 2] for the scalar pencil (minimizer at the cap)."""
    return FeasibleSet(l=[1.0], V0=2.0, x_min=0.5)


def fractional_pencil(c, a, b):
    """Separable ratio objective: lambda_max = max_e (c_e + a_e x_e)/(b_e x_e).

    A(x) = diag(c) + diag(a*x), B(x) = diag(b*x). Requires every x_e > 0.
    """
    c = np.asarray(c, dtype=float)
    m = c.size
    A = np.zeros((m, m, m))
    B = np.zeros((m, m, m))
    for e in range(m):
        A[e, e, e] = a[e]
        B[e, e, e] = b[e]
    return AffinePencil(A0=np.diag(c), A=A, B0=np.zeros((m, m)), B=B)


def fractional_optimum(c, a, V0):
    """Closed-form optimum of max_e (c_e/x_e + a_e) under sum(x) = V0.

    Each ratio is strictly decreasing in its own coordinate, so the volume
    cap binds and all ratios equalize at the optimum: t solves
    sum_e c_e/(t - a_e) = V0. Valid when the equalizing x stays above the
    box lower bound (true for the instances used in tests).
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)

    def budget(t):
        return float(np.sum(c / (t - a))) - V0

    lo = float(a.max()) + 1e-9
    hi = float(a.max()) + float(c.sum()) / 1e-9
    t = brentq(budget, lo + 1e-12, hi, xtol=1e-13, rtol=1e-15)
    return t, c / (t - a)


def fractional3():
    """m = 3 instance with an interior equalized optimum on the volume face."""
    c, a, b = (1.0, 2.0, 3.0), (0.5, 0.3, 0.2), (1.0, 1.0, 1.0)
    pencil = fractional_pencil(c, a, b)
    S = FeasibleSet(l=[1.0, 1.0, 1.0], V0=3.0, x_min=0.1)
    f_star, x_star = fractional_optimum(c, a, 3.0)
    return pencil, S, f_star, x_star


def fractional2():
    """m = 2 instance small enough for dense grid cross-checks."""
    c, a, b = (1.0, 2.0), (0.2, 0.1), (1.0, 1.0)
    pencil = fractional_pencil(c, a, b)
    S = FeasibleSet(l=[1.0, 1.0], V0=2.0, x_min=0.1)
    f_star, x_star = fractional_optimum(c, a, 2.0)
    return pencil, S, f_star, x_star


def random_pencil(rng, m, n, b_variation=0.3, a_scale=1.0, b_scale=1.0):
    """Random pencil with B(x) positive definite on the box |x_e| <= 1.

    B0 is SPD with smallest eigenvalue >= b_scale; the linear B terms are
    bounded so their total spectral norm over the box stays below
    b_variation * b_scale, which keeps B(x) uniformly positive definite there.
    """
    R = rng.standard_normal((n, n))
    B0 = b_scale * (R @ R.T / n + np.eye(n))
    B = np.empty((m, n, n))
    for e in range(m):
        Be = sym(rng, n)
        B[e] = Be * (b_variation * b_scale / (m * max(1e-30, np.linalg.norm(Be, 2))))
    A0 = sym(rng, n, a_scale)
    A = np.stack([sym(rng, n, a_scale) for _ in range(m)])
    return AffinePencil(A0=A0, A=A, B0=B0, B=B)
