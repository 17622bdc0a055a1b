"""Volume-capped box feasible set and Euclidean projection onto it.

S = {x in R^m : l^T x <= V0, x_e >= x_min} with positive weights l. In the
truss application l holds member lengths, so l^T x is the structure's volume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InfeasibleSet(Exception):
    """The set is empty: x_min * sum(l) exceeds V0."""


@dataclass(frozen=True)
class FeasibleSet:
    """Feasible set {x : l^T x <= V0, x >= x_min}.

    Parameters
    ----------
    l : (m,) ndarray
        Positive per-coordinate weights (member lengths).
    V0 : float
        Weighted-sum cap (volume bound), positive.
    x_min : float
        Common lower bound, nonnegative.
    """

    l: np.ndarray
    V0: float
    x_min: float

    def __post_init__(self):
        l = np.asarray(self.l, dtype=float)
        if l.ndim != 1 or l.size == 0:
            raise ValueError("l must be a nonempty 1-D array")
        if not np.all(l > 0):
            raise ValueError("all weights l_e must be positive")
        if not np.isfinite(self.V0) or self.V0 <= 0:
            raise ValueError("V0 must be positive and finite")
        if self.x_min < 0:
            raise ValueError("x_min must be nonnegative")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "V0", float(self.V0))
        object.__setattr__(self, "x_min", float(self.x_min))

    @property
    def m(self) -> int:
        return self.l.size

    def _require_nonempty(self):
        if self.x_min * self.l.sum() > self.V0:
            raise InfeasibleSet(
                f"x_min * sum(l) = {self.x_min * self.l.sum():.6g} > V0 = {self.V0:.6g}"
            )


def contains(S: FeasibleSet, x: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff l^T x <= V0 + tol and every x_e >= x_min - tol."""
    x = np.asarray(x, dtype=float)
    if x.shape != (S.m,):
        raise ValueError(f"x: expected shape {(S.m,)}, got {x.shape}")
    return bool(S.l @ x <= S.V0 + tol and np.all(x >= S.x_min - tol))


def project(S: FeasibleSet, y: np.ndarray) -> np.ndarray:
    """Euclidean projection of y onto S.

    KKT structure: the projection is x_e = max(x_min, y_e - tau * l_e) for a
    single multiplier tau >= 0; tau = 0 when clamping alone satisfies the
    volume cap, otherwise tau is the root of the piecewise-linear decreasing
    map phi(tau) = sum_e l_e * max(x_min, y_e - tau * l_e) - V0. Bisection on
    tau is unconditionally safe; 100 halvings resolve tau to full precision.
    """
    S._require_nonempty()
    y = np.asarray(y, dtype=float)
    if y.shape != (S.m,):
        raise ValueError(f"y: expected shape {(S.m,)}, got {y.shape}")
    clamped = np.maximum(y, S.x_min)
    if S.l @ clamped <= S.V0:
        return clamped
    lo, hi = 0.0, float(np.max((y - S.x_min) / S.l))

    def phi(tau):
        return S.l @ np.maximum(S.x_min, y - tau * S.l) - S.V0

    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    # hi end has phi <= 0, so the volume cap holds exactly to round-off
    return np.maximum(S.x_min, y - hi * S.l)


def diameter_sq(S: FeasibleSet) -> float:
    """Certified upper bound on max_{x,y in S} ||x - y||^2.

    Uses the per-coordinate maxima u_e = (V0 - x_min*(sum(l) - l_e)) / l_e:
    S fits in the box [x_min, u], so sum_e (u_e - x_min)^2 bounds the squared
    diameter. This is an upper bound, not the exact diameter (exact vertex
    enumeration would be exponential and is unnecessary for stepsize
    heuristics); it is tight for simplex-like cases.
    """
    S._require_nonempty()
    total = S.l.sum()
    u = (S.V0 - S.x_min * (total - S.l)) / S.l
    return float(np.sum((u - S.x_min) ** 2))


def feasible_to_dict(S: FeasibleSet) -> dict:
    """JSON fragment {"l", "V0", "xmin"}."""
    return {"l": S.l.tolist(), "V0": S.V0, "xmin": S.x_min}


def feasible_from_dict(data: dict) -> FeasibleSet:
    try:
        return FeasibleSet(l=np.asarray(data["l"], dtype=float),
                           V0=float(data["V0"]), x_min=float(data["xmin"]))
    except KeyError as exc:
        raise ValueError(f"missing feasible-set field: {exc}") from exc
