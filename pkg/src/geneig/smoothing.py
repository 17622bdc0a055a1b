"""Log-sum-exp smoothing of the largest generalized eigenvalue.

For a pencil with eigenvalues lam_1(x) >= ... >= lam_n(x), the smoothed
objective is

    f_mu(x) = mu * log( sum_i exp(lam_i(x) / mu) ),

computed in the shifted form lam_1 + mu * log(sum_i exp((lam_i - lam_1)/mu))
so the exponentials never overflow. It sandwiches the true objective:
lam_1 <= f_mu <= lam_1 + mu * log(n).

Where the smoothed objective is differentiable everywhere, the underlying
lam_1 is not; this module also produces elements of its Clarke subdifferential
at points of eigenvalue multiplicity, and a quantitative convexity-like bound
(pseudoconvexity_gap) that the solvers' convergence rests on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import gen_eig, multiplicity, sym_eig
from .pencil import AffinePencil, evaluate, spectrum_at


class InvalidL(Exception):
    """Truncation length l outside [1, n]."""


class SpectraplexViolation(Exception):
    """Supplied U is not positive semidefinite with unit trace."""


class OrderViolation(Exception):
    """pseudoconvexity_gap requires lambda_max(x) > lambda_max(y)."""


@dataclass(frozen=True)
class SmoothEval:
    """Value, gradient and softmax weights of the smoothed objective at x.

    ``weights`` always has length n and sums to 1; with a truncated gradient
    (l < n) the trailing entries are zero and the leading l are renormalized.
    ``lambda_max`` and ``eigenvalues`` expose the exact spectrum used.
    """

    x: np.ndarray
    mu: float
    value: float
    gradient: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    lambda_max: float


@dataclass(frozen=True)
class ClarkeElement:
    """One element of the Clarke subdifferential of lambda_max at x.

    ``V`` holds the top-t B-orthonormal eigenvectors (t = multiplicity of the
    largest eigenvalue), ``U`` the chosen t x t weight matrix (positive
    semidefinite, unit trace), and g_e = <U, V^T (A_e - lam_1 B_e) V>.
    """

    x: np.ndarray
    t: int
    V: np.ndarray
    U: np.ndarray
    g: np.ndarray


def _softmax_weights(eigenvalues: np.ndarray, mu: float, l: int) -> np.ndarray:
    """Length-n weights: shifted softmax over the top l eigenvalues, zeros after."""
    shifted = (eigenvalues[:l] - eigenvalues[0]) / mu
    w = np.exp(shifted)
    out = np.zeros_like(eigenvalues)
    out[:l] = w / w.sum()
    return out


def smooth_eval(pencil: AffinePencil, x: np.ndarray, mu: float,
                l: int | None = None) -> SmoothEval:
    """Evaluate the smoothed objective and its (possibly truncated) gradient.

    The gradient is sum_i theta_i * [v_i^T (A_e - lam_i B_e) v_i]_e over the
    top l eigenpairs, with theta the softmax weights renormalized over those l
    terms; l = n (the default) gives the exact gradient of f_mu.
    """
    mu = float(mu)
    if mu <= 0:
        raise ValueError("mu must be positive")
    n = pencil.n
    if l is None:
        l = n
    if not 1 <= l <= n:
        raise InvalidL(f"l = {l} outside [1, {n}]")
    spec = spectrum_at(pencil, x)
    w = spec.decomposition.eigenvalues
    V = spec.decomposition.eigenvectors
    # value always uses the full spectrum (the truncation applies to the
    # gradient only); shifted form keeps every exponent <= 0
    value = float(w[0] + mu * np.log(np.sum(np.exp((w - w[0]) / mu))))
    theta = _softmax_weights(w, mu, l)
    Vl = V[:, :l]
    tl = theta[:l]
    # g_e = <A_e, P> - <B_e, Q> with P = V diag(theta) V^T, Q = V diag(theta*lam) V^T
    P = (Vl * tl) @ Vl.T
    Q = (Vl * (tl * w[:l])) @ Vl.T
    m = pencil.m
    grad = pencil.A.reshape(m, -1) @ P.ravel() - pencil.B.reshape(m, -1) @ Q.ravel()
    return SmoothEval(x=np.array(x, dtype=float), mu=mu, value=value,
                      gradient=grad, weights=theta, eigenvalues=w,
                      lambda_max=float(w[0]))


def smooth_value(pencil: AffinePencil, x: np.ndarray, mu: float) -> float:
    """f_mu(x) in the overflow-safe shifted form."""
    return smooth_eval(pencil, x, mu).value


def smooth_gradient(pencil: AffinePencil, x: np.ndarray, mu: float) -> np.ndarray:
    """Exact gradient of f_mu at x (all n softmax terms)."""
    return smooth_eval(pencil, x, mu).gradient


def inexact_gradient(pencil: AffinePencil, x: np.ndarray, mu: float, l: int) -> np.ndarray:
    """Gradient truncated to the top l eigenpairs, softmax renormalized.

    l = n reproduces smooth_gradient bit for bit; l = 1 is the simple
    top-eigenvector direction used by the plain subgradient method.
    """
    return smooth_eval(pencil, x, mu, l=l).gradient


def clarke_element(pencil: AffinePencil, x: np.ndarray, gap_tol: float | None = None,
                   U=None) -> ClarkeElement:
    """One Clarke subgradient of lambda_max at x.

    The multiplicity t of the largest eigenvalue is detected with ``gap_tol``
    (default: the linalg module's relative default). ``U`` selects the
    element: a t x t positive semidefinite matrix with unit trace, or
    "uniform"/None for I/t. At t = 1 every valid U gives the same gradient.
    """
    spec = spectrum_at(pencil, x)
    w = spec.decomposition.eigenvalues
    V = spec.decomposition.eigenvectors
    t = multiplicity(w, gap_tol)
    if U is None or (isinstance(U, str) and U == "uniform"):
        U = np.eye(t) / t
    else:
        U = np.asarray(U, dtype=float)
        if U.shape != (t, t):
            raise SpectraplexViolation(f"U has shape {U.shape}, expected {(t, t)}")
        if np.abs(U - U.T).max() > 1e-10:
            raise SpectraplexViolation("U is not symmetric")
        if abs(np.trace(U) - 1.0) > 1e-10:
            raise SpectraplexViolation("trace(U) != 1")
        if sym_eig(U)[0][-1] < -1e-10:
            raise SpectraplexViolation("U has a negative eigenvalue")
    Vt = V[:, :t]
    lam1 = float(w[0])
    P = Vt @ U @ Vt.T
    m = pencil.m
    g = (pencil.A.reshape(m, -1) - lam1 * pencil.B.reshape(m, -1)) @ P.ravel()
    return ClarkeElement(x=np.array(x, dtype=float), t=t, V=Vt, U=U, g=g)


def pseudoconvexity_gap(pencil: AffinePencil, x: np.ndarray, y: np.ndarray,
                        mu: float, l: int | None = None) -> float:
    """Slack of the descent inequality relating the smoothed gradient to lambda_max.

    For lambda_max(x) > lambda_max(y) the gradient of f_mu at x satisfies

        <grad f_mu(x), y - x> <= c1 * (lam_1(y) - lam_1(x)) + c2 * (l-1) * mu / e

    where c1 and c2 are the smallest and largest generalized eigenvalues of
    the pair (B(y), B(x)) - the relative curvature of the denominator map
    between the two points - and l is the number of gradient terms (n for the
    exact gradient). When B(x) = I the constants reduce to the extreme
    eigenvalues of B(y), and for constant B to c1 = 1, c2 = 1 (the convex
    case). Returns RHS - LHS, which is nonnegative up to round-off.

    Raises OrderViolation when lambda_max(x) <= lambda_max(y): the inequality
    is only asserted in that regime.
    """
    ev = smooth_eval(pencil, x, mu, l=l)
    n = pencil.n
    count = n if l is None else l
    _, Bx = evaluate(pencil, x)
    Ay, By = evaluate(pencil, y)
    lam1_y = float(gen_eig(Ay, By).eigenvalues[0])
    if ev.lambda_max <= lam1_y:
        raise OrderViolation(
            f"lambda_max(x) = {ev.lambda_max:.6g} <= lambda_max(y) = {lam1_y:.6g}"
        )
    pair = gen_eig(By, Bx).eigenvalues
    c1 = float(pair[-1])
    c2 = float(pair[0]) * (count - 1) / np.e
    lhs = float(ev.gradient @ (np.asarray(y, dtype=float) - np.asarray(x, dtype=float)))
    return c1 * (lam1_y - ev.lambda_max) + c2 * mu - lhs
