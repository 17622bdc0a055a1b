"""First-order solvers for the largest-generalized-eigenvalue objective.

Four methods over a common trace format:

* ``spg``     smoothing projected gradient, mu_k = mu0/(k+1)^{1/2},
              alpha_k = alpha0/(k+1)^{1/2}
* ``sapg``    smoothing accelerated projected gradient (momentum variant with
              mu_k = mu0/(k+1), alpha_k = alpha0/(k+1)); fast in practice,
              carries no convergence guarantee
* ``subgrad`` normalized top-eigenvector subgradient steps with projection
* ``spg-zc``  projected gradient with Armijo linesearch and a residual-
              triggered shrinking smoothing parameter

plus ``bisect``, a global certifier that halves an objective-value interval
using a convex inner feasibility solve, and ``estimate_alpha0``, the sampled
inverse-gradient-bound stepsize heuristic.

Every solver keeps all iterates feasible and is deterministic given its
configuration (wall-clock timing columns aside).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .feasible import FeasibleSet, project
from .linalg import NotPositiveDefinite
from .pencil import AffinePencil, spectrum_at
from .smoothing import smooth_eval

_ALGORITHMS = ("spg", "sapg", "subgrad", "spg-zc", "bisect")


class ZeroSubgradient(Exception):
    """Subgradient norm below 1e-14: the iterate is stationary.

    The subgradient solver does not raise this; it terminates early and marks
    the trace (``extras["zero_subgradient"]``). The class documents the
    condition for callers that want to detect it.
    """


class BracketInvalid(Exception):
    """Bisection starting interval fails the feasible/infeasible ordering."""


class InnerInconclusive(Exception):
    """Inner feasibility solve certified neither side within budget.

    Reported through ``BisectResult.inconclusive`` (the interval is not
    shrunk on that side) rather than raised mid-run.
    """


def normalize_algorithm(tag: str) -> str:
    t = tag.strip().lower().replace("_", "-")
    if t not in _ALGORITHMS:
        raise ValueError(f"unknown algorithm {tag!r}; expected one of {_ALGORITHMS}")
    return t


@dataclass(frozen=True)
class SolverConfig:
    """Configuration shared by all solvers.

    ``alpha0 = None`` asks the solver to call estimate_alpha0 (seeded, hence
    deterministic). ``inexact_l = None`` means the full gradient; an integer
    truncates the softmax to that many leading eigenpairs. gamma/sigma drive
    the shrinking-mu rule of spg-zc. The bisect_* and inner_* fields apply to
    the bisection certifier only. ``target_value`` stops a solve early once
    the best true objective reaches it (used by bisection's inner solves).
    """

    algorithm: str = "sapg"
    alpha0: float | None = None
    mu0: float = 10.0
    max_iters: int = 3000
    inexact_l: int | None = None
    gamma: float = 1.0
    sigma: float = 0.5
    bisect_interval: tuple[float, float] | None = None
    bisect_tol: float | None = None
    feas_tol_scale: float = 1e-7
    inner_algorithm: str = "sapg"
    inner_max_iters: int = 5000
    x0: np.ndarray | None = None
    seed: int = 42
    early_stop: bool = False
    target_value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithm", normalize_algorithm(self.algorithm))
        if self.alpha0 is not None and not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.bisect_interval is not None:
            lo, hi = self.bisect_interval
            if not lo < hi:
                raise ValueError("bisect_interval must satisfy lower < upper")
        if self.bisect_tol is not None and not self.bisect_tol > 0:
            raise ValueError("bisect_tol must be positive")


@dataclass
class IterationTrace:
    """Per-iteration history of one solve.

    ``x[k]`` is the iterate the k-th row describes, ``f`` the true largest
    eigenvalue there, ``ftilde`` the smoothed value at the row's mu (equal to
    ``f`` for the subgradient method, whose mu column is 0), ``step_norm``
    the distance to the next iterate, and ``best_f`` the running minimum of
    ``f``. ``extras`` carries algorithm specifics (sapg: y/z histories;
    spg-zc: the shrink-trigger index set; subgrad: zero_subgradient flag).
    """

    k: np.ndarray
    x: np.ndarray
    f: np.ndarray
    ftilde: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray
    step_norm: np.ndarray
    time_ms: np.ndarray
    best_f: np.ndarray
    final_x: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.k.size

    @property
    def best_objective(self) -> float:
        return float(self.best_f[-1])

    @property
    def best_x(self) -> np.ndarray:
        return self.x[int(np.argmin(self.f))]


class _Recorder:
    """Accumulates per-iteration rows and assembles the trace."""

    def __init__(self):
        self.rows = {name: [] for name in
                     ("k", "f", "ftilde", "mu", "alpha", "step_norm", "time_ms")}
        self.xs = []
        self._t_prev = time.perf_counter()

    def add(self, k, x, f, ftilde, mu, alpha, step_norm):
        now = time.perf_counter()
        self.rows["k"].append(k)
        self.xs.append(np.array(x))
        self.rows["f"].append(f)
        self.rows["ftilde"].append(ftilde)
        self.rows["mu"].append(mu)
        self.rows["alpha"].append(alpha)
        self.rows["step_norm"].append(step_norm)
        self.rows["time_ms"].append((now - self._t_prev) * 1e3)
        self._t_prev = now

    def finish(self, final_x, extras=None) -> IterationTrace:
        f = np.array(self.rows["f"])
        return IterationTrace(
            k=np.array(self.rows["k"], dtype=int),
            x=np.array(self.xs),
            f=f,
            ftilde=np.array(self.rows["ftilde"]),
            mu=np.array(self.rows["mu"]),
            alpha=np.array(self.rows["alpha"]),
            step_norm=np.array(self.rows["step_norm"]),
            time_ms=np.array(self.rows["time_ms"]),
            best_f=np.minimum.accumulate(f),
            final_x=np.array(final_x),
            extras=extras or {},
        )


def default_x0(S: FeasibleSet) -> np.ndarray:
    """Uniform volume distribution c*1 with c = V0/sum(l), projected into S."""
    return project(S, np.full(S.m, S.V0 / S.l.sum()))


def estimate_alpha0(pencil: AffinePencil, S: FeasibleSet, mu: float,
                    samples: int = 1000, seed: int = 42) -> float:
    """Suggested stepsize 1/M_hat, M_hat = max sampled gradient norm on S.

    Samples uniform points of the bounding box [x_min, u_e] (u_e the
    per-coordinate maximum over S) projected into S. The gradient bound is
    mu-independent, so any reasonable mu gives the same estimate.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    total = S.l.sum()
    u = (S.V0 - S.x_min * (total - S.l)) / S.l
    m_hat = 0.0
    for _ in range(samples):
        x = project(S, rng.uniform(S.x_min, np.maximum(u, S.x_min)))
        g = smooth_eval(pencil, x, mu).gradient
        m_hat = max(m_hat, float(np.linalg.norm(g)))
    return 1.0 / max(m_hat, 1e-300)


def _resolve_start(pencil, S, config):
    x0 = config.x0 if config.x0 is not None else default_x0(S)
    x0 = np.asarray(x0, dtype=float)
    alpha0 = config.alpha0
    if alpha0 is None:
        alpha0 = estimate_alpha0(pencil, S, config.mu0, samples=256, seed=config.seed)
    return x0, alpha0


def _stalled(best_hist, window=500, tol=1e-12):
    if len(best_hist) <= window:
        return False
    return best_hist[-window - 1] - best_hist[-1] < tol


def _hit_target(config, best):
    return config.target_value is not None and best <= config.target_value


def _eval_at(pencil, x, mu, l, k):
    """smooth_eval with the iteration index attached to definiteness errors."""
    try:
        return smooth_eval(pencil, x, mu, l=l)
    except NotPositiveDefinite as exc:
        if not hasattr(exc, "iteration"):
            exc.iteration = k
        raise


def solve_spg(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> IterationTrace:
    """Projected gradient on the smoothed objective with 1/sqrt(k+1) schedules.

    x^{k+1} = P_S(x^k - alpha_k grad f_mu_k(x^k)) with mu_k = mu0/(k+1)^{1/2}
    and alpha_k = alpha0/(k+1)^{1/2}. The recorded best objective decays like
    O(1/sqrt(k)) on problems with attained minima.
    """
    x, alpha0 = _resolve_start(pencil, S, config)
    rec = _Recorder()
    best_hist = []
    for k in range(config.max_iters):
        mu_k = config.mu0 / np.sqrt(k + 1.0)
        alpha_k = alpha0 / np.sqrt(k + 1.0)
        ev = _eval_at(pencil, x, mu_k, config.inexact_l, k)
        x_next = project(S, x - alpha_k * ev.gradient)
        rec.add(k, x, ev.lambda_max, ev.value, mu_k, alpha_k,
                float(np.linalg.norm(x_next - x)))
        x = x_next
        best_hist.append(min(best_hist[-1], ev.lambda_max) if best_hist else ev.lambda_max)
        if _hit_target(config, best_hist[-1]):
            break
        if config.early_stop and _stalled(best_hist):
            break
    return rec.finish(x)


def _sapg_momentum_next(a: float) -> float:
    return 0.5 * (1.0 + np.sqrt(4.0 * a * a + 1.0))


def solve_sapg(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> IterationTrace:
    """Accelerated variant: momentum sequence a_k, mu_k and alpha_k ~ 1/(k+1).

    y^k = (1-1/a_k) x^k + (1/a_k) z^k
    z^{k+1} = P_S(z^k - a_k alpha_k grad f_mu_k(y^k))
    x^{k+1} = (1-1/a_k) x^k + (1/a_k) z^{k+1}
    a_{k+1} = (1 + sqrt(4 a_k^2 + 1))/2, a_0 = 1.

    All three sequences stay feasible (z by projection, x and y as convex
    combinations). Heuristic: converges fast in practice, no rate guarantee.
    """
    x, alpha0 = _resolve_start(pencil, S, config)
    z = x.copy()
    a = 1.0
    rec = _Recorder()
    ys, zs, a_hist = [], [], []
    best_hist = []
    for k in range(config.max_iters):
        mu_k = config.mu0 / (k + 1.0)
        alpha_k = alpha0 / (k + 1.0)
        y = (1.0 - 1.0 / a) * x + (1.0 / a) * z
        ev_y = _eval_at(pencil, y, mu_k, config.inexact_l, k)
        z_next = project(S, z - a * alpha_k * ev_y.gradient)
        x_next = (1.0 - 1.0 / a) * x + (1.0 / a) * z_next
        ev_x = _eval_at(pencil, x, mu_k, config.inexact_l, k)
        rec.add(k, x, ev_x.lambda_max, ev_x.value, mu_k, alpha_k,
                float(np.linalg.norm(x_next - x)))
        ys.append(y)
        zs.append(z)
        a_hist.append(a)
        x, z, a = x_next, z_next, _sapg_momentum_next(a)
        best_hist.append(min(best_hist[-1], ev_x.lambda_max) if best_hist else ev_x.lambda_max)
        if _hit_target(config, best_hist[-1]):
            break
        if config.early_stop and _stalled(best_hist):
            break
    a_hist.append(a)
    return rec.finish(x, extras={"y": np.array(ys), "z": np.array(zs),
                                 "a": np.array(a_hist)})


def solve_subgrad(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> IterationTrace:
    """Normalized subgradient steps from the top eigenvector, then projection.

    g^k is the one-term (simple-eigenvalue) direction; the step is
    x^{k+1} = P_S(x^k - alpha_k g^k/||g^k||) with alpha_k = alpha0/(k+1)^{1/2}.
    The projection is not part of the classical update but is required to keep
    the objective defined (B(x) must stay positive definite on the path).
    Terminates early, marking the trace, if ||g^k|| < 1e-14 (stationarity).
    """
    x, alpha0 = _resolve_start(pencil, S, config)
    rec = _Recorder()
    zero_hit = False
    best_hist = []
    for k in range(config.max_iters):
        alpha_k = alpha0 / np.sqrt(k + 1.0)
        ev = _eval_at(pencil, x, 1.0, 1, k)  # single-term softmax: mu is inert
        gnorm = float(np.linalg.norm(ev.gradient))
        if gnorm < 1e-14:
            rec.add(k, x, ev.lambda_max, ev.lambda_max, 0.0, alpha_k, 0.0)
            zero_hit = True
            break
        x_next = project(S, x - alpha_k * ev.gradient / gnorm)
        rec.add(k, x, ev.lambda_max, ev.lambda_max, 0.0, alpha_k,
                float(np.linalg.norm(x_next - x)))
        x = x_next
        best_hist.append(min(best_hist[-1], ev.lambda_max) if best_hist else ev.lambda_max)
        if _hit_target(config, best_hist[-1]):
            break
        if config.early_stop and _stalled(best_hist):
            break
    return rec.finish(x, extras={"zero_subgradient": zero_hit})


def solve_spg_zc(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> IterationTrace:
    """Armijo projected gradient with a residual-triggered shrinking mu.

    Each iteration backtracks from a unit trial step (factor 0.5, sufficient
    decrease 1e-4) on the smoothed objective at the current mu; mu shrinks by
    sigma whenever the scaled residual ||(x^{k+1}-x^k)/alpha_k|| drops below
    gamma*mu. The trace's extras carry the shrink-trigger iterations K'.
    """
    x, _ = _resolve_start(pencil, S, config)
    mu = config.mu0
    rec = _Recorder()
    kprime = []
    best_hist = []
    for k in range(config.max_iters):
        ev = _eval_at(pencil, x, mu, config.inexact_l, k)
        alpha = 1.0
        x_next = None
        for _ in range(60):
            trial = project(S, x - alpha * ev.gradient)
            trial_val = _eval_at(pencil, trial, mu, config.inexact_l, k).value
            if trial_val <= ev.value + 1e-4 * float(ev.gradient @ (trial - x)):
                x_next = trial
                break
            alpha *= 0.5
        if x_next is None:
            x_next = trial  # step is numerically zero; the mu rule takes over
        step = float(np.linalg.norm(x_next - x))
        rec.add(k, x, ev.lambda_max, ev.value, mu, alpha, step)
        if step / alpha < config.gamma * mu:
            kprime.append(k)
            mu = config.sigma * mu
        x = x_next
        best_hist.append(min(best_hist[-1], ev.lambda_max) if best_hist else ev.lambda_max)
        if _hit_target(config, best_hist[-1]):
            break
        if config.early_stop and _stalled(best_hist):
            break
    return rec.finish(x, extras={"kprime": np.array(kprime, dtype=int)})


_SOLVERS = {
    "spg": solve_spg,
    "sapg": solve_sapg,
    "subgrad": solve_subgrad,
    "spg-zc": solve_spg_zc,
}


def solve(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> IterationTrace:
    """Dispatch to the solver named by config.algorithm (bisect excluded)."""
    return _SOLVERS[normalize_algorithm(config.algorithm)](pencil, S, config)


# ---------------------------------------------------------------------------
# bisection global certifier
# ---------------------------------------------------------------------------

FEASIBLE, INFEASIBLE, INCONCLUSIVE = "feasible", "infeasible", "inconclusive"


@dataclass
class BisectResult:
    """Certified objective interval with a feasible witness.

    ``interval = (lo, hi)``: every value >= hi is achievable (the witness x
    satisfies the hi-sublevel test within feas_tol) and the inner solver
    certified no design passes the lo-sublevel test. ``trace`` records one
    row per oracle call; ``inconclusive`` flags an early stop on an
    uncertifiable midpoint.
    """

    interval: tuple[float, float]
    witness: np.ndarray
    trace: list
    inconclusive: bool = False

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.interval[0] + self.interval[1])


def _shifted_pencil(pencil: AffinePencil, lam: float) -> AffinePencil:
    """Pencil whose standard max eigenvalue is lambda_max(A(x) - lam*B(x))."""
    n = pencil.n
    return AffinePencil(
        A0=pencil.A0 - lam * pencil.B0,
        A=pencil.A - lam * pencil.B,
        B0=np.eye(n),
        B=np.zeros_like(pencil.A),
    )


def _certified_bound(inner: AffinePencil, S: FeasibleSet, x: np.ndarray):
    """Value and a certified global lower bound of the inner objective.

    h(y) = lambda_max(C0 + sum y_e C_e) admits the dual family of linear
    under-estimators y -> <U, C(y)> for any U >= 0 with unit trace, so
    min_S h >= max_U min_{y in S} <U, C(y)>. Restricting U to mixtures of
    leading eigenvectors observed at x makes the max-min a small LP (the
    y-minimum over the volume-capped box is closed-form in the mixture),
    solved exactly here. Near eigenvalue coalescence this recovers the
    balanced multiplier that single-eigenvector linearizations miss.
    """
    spec = spectrum_at(inner, x)
    eigs = spec.decomposition.eigenvalues
    h = float(eigs[0])
    t = int(np.sum(eigs >= eigs[0] - 1e-2 * max(1.0, abs(h))))
    t = min(inner.n, max(3, t), 12)
    Vt = spec.decomposition.eigenvectors[:, :t]
    q = np.einsum("ji,jk,ki->i", Vt, inner.A0, Vt)
    M = np.einsum("ji,ejk,ki->ei", Vt, inner.A, Vt)
    R = S.V0 - S.x_min * float(S.l.sum())
    # variables (w, s): maximize q.w + x_min 1'Mw + R s
    # s.t. s <= (Mw)_e/l_e for all e, s <= 0, w in the simplex
    c_lp = -np.concatenate([q + S.x_min * M.sum(axis=0), [R]])
    A_ub = np.hstack([-(M / S.l[:, None]), np.ones((inner.m, 1))])
    A_eq = np.concatenate([np.ones(t), [0.0]])[None, :]
    res = linprog(c_lp, A_ub=A_ub, b_ub=np.zeros(inner.m), A_eq=A_eq,
                  b_eq=[1.0], bounds=[(0.0, None)] * t + [(None, 0.0)],
                  method="highs")
    lb = -float(res.fun) if res.status == 0 else -np.inf
    return h, lb


def _polish_probe(inner: AffinePencil, S: FeasibleSet, x: np.ndarray, rounds: int = 40):
    """Projected descent on the exact inner objective with backtracking steps.

    On badly scaled pencils the schedule-driven solvers converge in value
    long before the active-constraint geometry settles, which leaves the
    dual certificate loose. A handful of exact-objective steps with an
    adaptive stepsize moves at the problem's own scale and tightens it.
    Only strictly decreasing steps are accepted, so the returned value
    never exceeds the input's.
    """
    spec = spectrum_at(inner, x)
    h = float(spec.decomposition.eigenvalues[0])
    alpha = 1.0
    for _ in range(rounds):
        v = spec.decomposition.eigenvectors[:, 0]
        g = np.einsum("i,eij,j->e", v, inner.A, v)
        accepted = False
        for _ in range(80):
            x_new = project(S, x - alpha * g)
            step = x_new - x
            if not np.any(step):
                break
            spec_new = spectrum_at(inner, x_new)
            h_new = float(spec_new.decomposition.eigenvalues[0])
            if h_new <= h - 1e-4 * float(step @ step) / alpha:
                x, h, spec = x_new, h_new, spec_new
                accepted = True
                alpha *= 4.0
                break
            alpha *= 0.5
        if not accepted:
            break
    return x, h


def _inner_feasibility(pencil, S, lam, config, warm_start, budget):
    """Minimize lambda_max(A(x) - lam B(x)) over S; classify the sign.

    Returns (verdict, best_value, best_x, iterations). The objective is a
    standard (convex) max-eigenvalue of an affine map, so the smoothing
    solvers apply directly. Classification, in order of strength:
    feasible as soon as any iterate's true value reaches feas_tol;
    infeasible when a subgradient linearization certifies the minimum stays
    above it (checked at the warm start and along the trajectory); after the
    budget, a plateaued positive best is ruled infeasible heuristically and
    a still-improving one is inconclusive.
    """
    inner = _shifted_pencil(pencil, lam)
    feas_tol = config.feas_tol_scale * (1.0 + abs(lam))

    h0, lb0 = _certified_bound(inner, S, warm_start)
    if h0 <= feas_tol:
        return FEASIBLE, h0, warm_start, 0
    if lb0 > feas_tol:
        return INFEASIBLE, h0, warm_start, 0

    spec0 = spectrum_at(inner, warm_start)
    spread = float(spec0.decomposition.eigenvalues[0] - spec0.decomposition.eigenvalues[-1])
    mu0 = max(1e-9, 1e-3 * max(spread, feas_tol))
    alpha0 = estimate_alpha0(inner, S, mu0, samples=64, seed=config.seed)
    sub = SolverConfig(
        algorithm=config.inner_algorithm,
        alpha0=alpha0,
        mu0=mu0,
        max_iters=budget,
        x0=warm_start,
        seed=config.seed,
        target_value=feas_tol,
    )
    trace = solve(inner, S, sub)
    best = trace.best_objective
    best_x = trace.best_x
    if best <= feas_tol:
        return FEASIBLE, best, best_x, trace.iterations

    stride = max(1, trace.iterations // 40)
    probes = list(trace.x[::stride]) + [best_x]
    lb = lb0
    for xp in probes:
        _, lb_p = _certified_bound(inner, S, xp)
        lb = max(lb, lb_p)
        if lb > feas_tol:
            return INFEASIBLE, best, best_x, trace.iterations

    # None of the raw iterates certifies either way; polish the best one
    # with exact-objective steps and classify again.
    x_pol, h_pol = _polish_probe(inner, S, best_x)
    if h_pol < best:
        best, best_x = h_pol, x_pol
    if best <= feas_tol:
        return FEASIBLE, best, best_x, trace.iterations
    _, lb_pol = _certified_bound(inner, S, x_pol)
    lb = max(lb, lb_pol)
    if lb > feas_tol:
        return INFEASIBLE, best, best_x, trace.iterations

    # Plateau heuristic, gated on a certified strictly positive minimum:
    # without lb > 0 a stalled solve is no evidence of infeasibility.
    half = trace.best_f[trace.iterations // 2]
    improvement = float(half - best)
    if (trace.iterations >= 50 and lb > 0.0
            and improvement <= 0.05 * (best - feas_tol)):
        return INFEASIBLE, best, best_x, trace.iterations
    return INCONCLUSIVE, best, best_x, trace.iterations


def bisect(pencil: AffinePencil, S: FeasibleSet, config: SolverConfig) -> BisectResult:
    """Certify the global minimum of lambda_max(A(x), B(x)) over S by bisection.

    The sublevel test "exists x in S with A(x) - lam B(x) <= 0" is monotone
    in lam, so interval halving applies: each midpoint is classified by an
    inner convex minimization of lambda_max(A(x) - lam B(x)) (nonpositive
    minimum = feasible). The default bracket is [f0 - 10*max(1,|f0|), f0]
    with f0 the objective at the uniform-volume design; both ends are
    verified before the loop (BracketInvalid otherwise). An inconclusive
    midpoint gets one doubled-budget retry, then stops the loop with the
    current interval and the inconclusive flag set.
    """
    x_f = config.x0 if config.x0 is not None else default_x0(S)
    x_f = np.asarray(x_f, dtype=float)
    f0 = spectrum_at(pencil, x_f).lambda_max
    if config.bisect_interval is not None:
        lo, hi = map(float, config.bisect_interval)
    else:
        lo, hi = f0 - 10.0 * max(1.0, abs(f0)), f0

    def width_target(lo_, hi_):
        # default: 1e-4 relative to the certified value, floor 1e-4 absolute
        if config.bisect_tol is not None:
            return config.bisect_tol
        return 1e-4 * max(1.0, min(abs(lo_), abs(hi_)))

    trace = []

    verdict, best, x_hi, iters = _inner_feasibility(
        pencil, S, hi, config, x_f, config.inner_max_iters)
    trace.append(("pre-hi", lo, hi, hi, verdict, best, iters))
    if verdict != FEASIBLE:
        raise BracketInvalid(f"upper end {hi:.6g} not certifiably feasible (best {best:.3e})")
    witness = x_hi
    verdict, best, _, iters = _inner_feasibility(
        pencil, S, lo, config, witness, config.inner_max_iters)
    trace.append(("pre-lo", lo, hi, lo, verdict, best, iters))
    if verdict != INFEASIBLE:
        raise BracketInvalid(f"lower end {lo:.6g} not certifiably infeasible ({verdict})")

    inconclusive = False
    k = 0
    while hi - lo > width_target(lo, hi):
        mid = 0.5 * (lo + hi)
        verdict, best, x_mid, iters = _inner_feasibility(
            pencil, S, mid, config, witness, config.inner_max_iters)
        if verdict == INCONCLUSIVE:
            verdict, best, x_mid, iters = _inner_feasibility(
                pencil, S, mid, config, witness, 2 * config.inner_max_iters)
        trace.append((k, lo, hi, mid, verdict, best, iters))
        if verdict == FEASIBLE:
            hi, witness = mid, x_mid
        elif verdict == INFEASIBLE:
            lo = mid
        else:
            inconclusive = True
            break
        k += 1
    return BisectResult(interval=(lo, hi), witness=witness, trace=trace,
                        inconclusive=inconclusive)


# ---------------------------------------------------------------------------
# trace serialization
# ---------------------------------------------------------------------------

TRACE_HEADER = "k,f,ftilde,mu,alpha,step_norm,time_ms"


def write_trace_csv(trace: IterationTrace, path) -> None:
    """Write the per-iteration trace; floats carry 17 significant digits."""
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for i in range(trace.iterations):
            vals = (trace.f[i], trace.ftilde[i], trace.mu[i], trace.alpha[i],
                    trace.step_norm[i], trace.time_ms[i])
            fh.write(str(int(trace.k[i])) + "," + ",".join(f"{v:.17g}" for v in vals) + "\n")
