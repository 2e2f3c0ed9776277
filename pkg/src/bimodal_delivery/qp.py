"""Convex QP solver (primal-dual interior point) and verification helpers.

Problems have the form

    minimize    f'Qf + a'f + constant
    subject to  G f <= h,  A f = b

with Q symmetric positive semidefinite. `solve` runs an infeasible-start
Mehrotra predictor-corrector method; `grid_oracle` brute-forces tiny
instances and `check_kkt` certifies a candidate point.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.optimize import linprog

from .objective import QPProblem, evaluate

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"


@dataclass
class SolverConfig:
    kkt_tolerance: float = 1e-6
    max_iterations: int = 200
    # relative accuracy targeted on the internally scaled problem
    inner_tolerance: float = 1e-11
    regularization: float = 1e-10
    step_fraction: float = 0.99
    phase1: bool = True
    # phase-1 violation (scaled units) above which the problem is declared infeasible
    feasibility_tolerance: float = 1e-7

    def __post_init__(self):
        if not self.kkt_tolerance > 0:
            raise ValueError(f"kkt_tolerance must be > 0, got {self.kkt_tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal_feasibility: float
    complementarity: float
    dual_feasibility: float

    def max(self) -> float:
        return max(self.stationarity, self.primal_feasibility, self.complementarity, self.dual_feasibility)

    def within(self, tol: float) -> bool:
        return self.max() <= tol


@dataclass
class Solution:
    f: np.ndarray
    objective: float
    status: str
    kkt: Optional[KKTResiduals]
    iterations: int = 0
    duals: np.ndarray = None
    eq_duals: np.ndarray = None
    merit_history: list = field(default_factory=list)
    phase1_violation: Optional[float] = None

    @property
    def optimal(self):
        return self.status == OPTIMAL


@dataclass
class OracleSolution:
    f: Optional[np.ndarray]
    objective: float
    status: str
    gap_bound: float
    evaluated: int


def check_kkt(problem: QPProblem, f, duals, eq_duals=None) -> KKTResiduals:
    """Max-norm KKT residuals of ``f`` with inequality multipliers ``duals``."""
    f = np.asarray(f, dtype=float)
    lam = np.asarray(duals, dtype=float).ravel() if duals is not None else np.zeros(problem.h.size)
    nu = np.zeros(problem.b.size) if eq_duals is None else np.asarray(eq_duals, dtype=float).ravel()
    grad = 2.0 * problem.Q @ f + problem.a + problem.G.T @ lam + problem.A.T @ nu
    slack = problem.G @ f - problem.h
    primal = np.concatenate([np.maximum(slack, 0.0), np.abs(problem.A @ f - problem.b)])
    return KKTResiduals(
        stationarity=_maxabs(grad),
        primal_feasibility=_maxabs(primal),
        complementarity=_maxabs(lam * slack),
        dual_feasibility=max(0.0, -float(lam.min())) if lam.size else 0.0,
    )


def _maxabs(v):
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


class _ScaledProblem:
    """Objective scaled to unit magnitude, constraint rows (with rhs) to unit max-norm."""

    def __init__(self, problem: QPProblem):
        P = 2.0 * problem.Q
        q = problem.a
        mag = max(_maxabs(P), _maxabs(q))
        self.sigma = 1.0 / mag if mag > 0 else 1.0
        self.P = self.sigma * P
        self.q = self.sigma * q
        self.g_scale = _row_scale(problem.G, problem.h)
        self.a_scale = _row_scale(problem.A, problem.b)
        self.G = problem.G / self.g_scale[:, None]
        self.h = problem.h / self.g_scale
        self.A = problem.A / self.a_scale[:, None]
        self.b = problem.b / self.a_scale

    def unscale_duals(self, z, y):
        return z / (self.sigma * self.g_scale), y / (self.sigma * self.a_scale)


def _row_scale(M, rhs):
    # rows normalised by their largest entry, right-hand side included, so a
    # loose row with a huge bound does not swamp the residuals
    if M.shape[0] == 0:
        return np.ones(0)
    s = np.maximum(np.max(np.abs(M), axis=1), np.abs(rhs))
    return np.where(s > 0, s, 1.0)


def _interior_point(P, q, G, h, A, b, config, stop=None, max_iter=None):
    """Core Mehrotra iteration on ``min 1/2 x'Px + q'x, Gx <= h, Ax = b``.

    Returns (x, s, z, y, iterations, merit_history). ``stop(x, z, y)`` may
    veto termination until an external certificate also holds.
    """
    n, m, p = q.size, h.size, b.size
    reg = config.regularization
    max_iter = max_iter or config.max_iterations

    def factor(W):
        """Solver for the reduced KKT system with matrix ``[[H, A'], [A, 0]]``."""
        H = P + (G.T * W) @ G
        K = np.block([[H, A.T], [A, np.zeros((p, p))]])
        delta = reg
        while True:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LinAlgWarning)
                lu = lu_factor(K + delta * np.diag(np.r_[np.ones(n), -np.ones(p)]), check_finite=False)
            # exact cancellation near the boundary can leave a zero pivot;
            # retry with a regulariser scaled to the matrix
            if np.all(np.diag(lu[0]) != 0) or delta > 1e-6 * (1.0 + _maxabs(H)):
                break
            delta = max(10.0 * delta, reg * (1.0 + _maxabs(H)))

        def solve_kkt(rhs):
            sol = lu_solve(lu, rhs, check_finite=False)
            # iterative refinement removes the bias of the regulariser
            for _ in range(3):
                sol = sol + lu_solve(lu, rhs - K @ sol, check_finite=False)
            return sol

        return solve_kkt

    # initial point: regularised least squares on the constraints
    rhs = np.concatenate([-q + G.T @ h, b])
    sol = factor(np.ones(m))(rhs)
    x, y = sol[:n], sol[n:]
    s = h - G @ x
    z = np.ones(m)
    if m:
        s = s + max(0.0, -1.5 * s.min())
        s = np.maximum(s, 1e-8)
        s = s + 0.5 * (s @ z) / z.sum()
        z = z + 0.5 * (s @ z) / s.sum()

    h_norm = 1.0 + max(_maxabs(h), _maxabs(b))
    q_norm = 1.0 + _maxabs(q)

    def residuals(x, s, z, y):
        rd = P @ x + q + G.T @ z + A.T @ y
        rp = G @ x + s - h
        re = A @ x - b
        mu = (s @ z) / m if m else 0.0
        return rd, rp, re, mu

    # residuals this small count as zero; without the floor round-off noise
    # would block the steps that only reduce mu
    floor = 0.5 * config.inner_tolerance * min(q_norm, h_norm)

    def merit_of(rd, rp, re):
        # the Newton step shrinks every linear residual by (1 - alpha), so this
        # merit is non-increasing for any accepted step; mu is left out since
        # centring steps may legitimately raise it
        return max(_maxabs(rd) + _maxabs(rp) + _maxabs(re), floor)

    def backtrack(x, s, z, y, dx, ds, dz, dy, alpha, merit):
        # guards against round-off in the linear solve undoing the decrease
        for _ in range(30):
            cand = (x + alpha * dx, s + alpha * ds, z + alpha * dz, y + alpha * dy)
            rd, rp, re, _ = residuals(*cand)
            if merit_of(rd, rp, re) <= merit:
                return alpha, cand
            alpha *= 0.5
        return 0.0, None

    history = []
    stalled = 0
    it = 0
    for it in range(1, max_iter + 1):
        rd, rp, re, mu = residuals(x, s, z, y)
        merit = merit_of(rd, rp, re)
        history.append(merit)
        obj = 0.5 * x @ P @ x + q @ x
        converged = (
            _maxabs(rd) <= config.inner_tolerance * q_norm
            and max(_maxabs(rp), _maxabs(re)) <= config.inner_tolerance * h_norm
            and mu <= config.inner_tolerance * (1.0 + abs(obj))
        )
        if converged or stalled >= 5:
            if stop is None or stop(x, z, y) or stalled >= 5:
                break

        W = z / s if m else np.zeros(0)
        solve_kkt = factor(W)

        def direction(rc):
            rhs1 = -rd - G.T @ (-rc / s + W * rp) if m else -rd
            sol = solve_kkt(np.concatenate([rhs1, -re]))
            dx, dy = sol[:n], sol[n:]
            Gdx = G @ dx
            dz = -rc / s + W * (rp + Gdx)
            ds = -rp - Gdx
            return dx, ds, dz, dy

        if m:
            dx, ds, dz, dy = direction(s * z)
            alpha_aff = min(1.0, _max_step(s, ds), _max_step(z, dz))
            mu_aff = ((s + alpha_aff * ds) @ (z + alpha_aff * dz)) / m
            centering = (mu_aff / mu) ** 3 if mu > 0 else 0.0
            dx, ds, dz, dy = direction(s * z + ds * dz - centering * mu)
            alpha = min(1.0, config.step_fraction * min(_max_step(s, ds), _max_step(z, dz)))
        else:
            dx, ds, dz, dy = direction(np.zeros(0))
            alpha = 1.0

        # keep the merit function non-increasing
        alpha, cand = backtrack(x, s, z, y, dx, ds, dz, dy, alpha, merit)
        if alpha < 1e-12:
            stalled += 1
            continue
        stalled = stalled + 1 if alpha < 1e-6 else 0
        x, s, z, y = cand

    return x, s, z, y, it, history


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def phase1(problem: QPProblem, config: Optional[SolverConfig] = None) -> float:
    """Smallest achievable max constraint violation, in row-scaled units.

    Solves ``min t  s.t.  G f - t <= h,  A f = b,  t >= -1``; a positive
    optimum means no feasible point exists.
    """
    config = config or SolverConfig()
    sp = _ScaledProblem(problem)
    n, m = problem.n, problem.h.size
    if m == 0 and problem.b.size == 0:
        return -1.0
    G1 = np.zeros((m + 1, n + 1))
    G1[:m, :n] = sp.G
    G1[:m, n] = -1.0
    G1[m, n] = -1.0
    h1 = np.concatenate([sp.h, [1.0]])
    A1 = np.hstack([sp.A, np.zeros((sp.A.shape[0], 1))])
    q1 = np.zeros(n + 1)
    q1[n] = 1.0
    x, s, z, y, _, _ = _interior_point(np.zeros((n + 1, n + 1)), q1, G1, h1, A1, sp.b, config)
    violation = max(float(x[n]), _maxabs(A1 @ x - sp.b))
    return violation


def solve(problem: QPProblem, config: Optional[SolverConfig] = None) -> Solution:
    config = config or SolverConfig()
    tol = config.kkt_tolerance

    violation = None
    if config.phase1:
        violation = phase1(problem, config)
        if violation > config.feasibility_tolerance:
            log.info("phase-1 violation %.3g: problem infeasible", violation)
            return Solution(np.zeros(problem.n), float("nan"), INFEASIBLE, None, phase1_violation=violation)

    sp = _ScaledProblem(problem)

    def certified(x, z, y):
        lam, nu = sp.unscale_duals(z, y)
        return check_kkt(problem, x, lam, nu).within(tol)

    x, s, z, y, it, history = _interior_point(sp.P, sp.q, sp.G, sp.h, sp.A, sp.b, config, stop=certified)
    lam, nu = sp.unscale_duals(z, y)
    kkt = check_kkt(problem, x, lam, nu)
    status = OPTIMAL if kkt.within(tol) else MAX_ITER
    if status != OPTIMAL:
        log.warning("solver stopped after %d iterations with KKT residual %.3g", it, kkt.max())
    log.debug("solved n=%d in %d iterations, kkt=%.3g", problem.n, it, kkt.max())
    return Solution(
        f=x,
        objective=evaluate(problem, x),
        status=status,
        kkt=kkt,
        iterations=it,
        duals=lam,
        eq_duals=nu,
        merit_history=history,
        phase1_violation=violation,
    )


def variable_bounds(problem: QPProblem) -> Optional[np.ndarray]:
    """(n, 2) box enclosing the feasible set, or None if it is empty.

    Raises ValueError when some variable is unbounded.
    """
    n = problem.n
    A_eq = problem.A if problem.b.size else None
    b_eq = problem.b if problem.b.size else None
    box = np.zeros((n, 2))
    for i in range(n):
        for k, sign in enumerate((1.0, -1.0)):
            c = np.zeros(n)
            c[i] = sign
            res = linprog(c, A_ub=problem.G, b_ub=problem.h, A_eq=A_eq, b_eq=b_eq,
                          bounds=[(None, None)] * n, method="highs")
            if res.status == 2:
                return None
            if res.status == 3:
                raise ValueError(f"variable {i} is unbounded on the feasible set")
            box[i, k] = sign * res.fun
    return box


def grid_oracle(problem: QPProblem, resolution: int, chunk: int = 200_000) -> OracleSolution:
    """Minimum of the objective over a regular grid of the feasible bounding box.

    Grid points are feasible when they satisfy ``G f <= h`` (and ``A f = b`` to
    within half a grid cell). The grid is swept one line at a time along the
    last axis: on each line the feasible points form a contiguous index range
    and the objective is a parabola, so its grid minimum is at an end of the
    range or next to the clamped vertex. Only those candidates are evaluated;
    the result equals an exhaustive scan. ``gap_bound`` is a bound on the
    gradient over the box times the cell diameter.
    """
    n = problem.n
    if n > 4:
        raise ValueError(f"grid oracle handles at most 4 variables, got {n}")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    box = variable_bounds(problem)
    if box is None:
        return OracleSolution(None, float("nan"), INFEASIBLE, float("nan"), 0)
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    cell = (box[:, 1] - box[:, 0]) / (resolution - 1)
    diameter = float(np.linalg.norm(cell))
    eq_tol = 0.5 * diameter * np.abs(problem.A).sum(axis=1) + 1e-12
    slack = 1e-12 * (1.0 + np.abs(problem.h))

    # every constraint as lower <= C f <= upper
    C = np.vstack([problem.G, problem.A])
    upper = np.concatenate([problem.h + slack, problem.b + eq_tol])
    lower = np.concatenate([np.full(problem.h.size, -np.inf), problem.b - eq_tol])
    last = axes[-1]
    t0, step = box[-1, 0], cell[-1]
    Q, a = problem.Q, problem.a

    def feasible(pts):
        v = pts @ C.T
        return np.all((v <= upper) & (v >= lower), axis=1)

    def value(pts):
        return np.einsum("ij,jk,ik->i", pts, Q, pts) + pts @ a + problem.constant

    best_val, best_f, count = np.inf, None, 0
    n_lines = resolution ** (n - 1)
    for start in range(0, n_lines, chunk):
        if n > 1:
            idx = np.unravel_index(np.arange(start, min(start + chunk, n_lines)), (resolution,) * (n - 1))
            prefix = np.stack([axes[i][idx[i]] for i in range(n - 1)], axis=1)
        else:
            prefix = np.zeros((1, 0))
        k = len(prefix)
        rest = prefix @ C[:, :-1].T
        coef = C[:, -1]
        lo_t = np.full(k, -np.inf)
        hi_t = np.full(k, np.inf)
        ok = np.ones(k, dtype=bool)
        for i, c in enumerate(coef):
            u, l = upper[i] - rest[:, i], lower[i] - rest[:, i]
            if c > 0:
                hi_t = np.minimum(hi_t, u / c)
                lo_t = np.maximum(lo_t, l / c)
            elif c < 0:
                hi_t = np.minimum(hi_t, l / c)
                lo_t = np.maximum(lo_t, u / c)
            else:
                ok &= (l <= 0) & (u >= 0)
        i_lo = np.clip(np.ceil((lo_t - t0) / step - 1e-9), 0, resolution - 1)
        i_hi = np.clip(np.floor((hi_t - t0) / step + 1e-9), 0, resolution - 1)
        ok &= i_lo <= i_hi
        # parabola q t^2 + r t along the line; vertex at -r / 2q
        qq = Q[-1, -1]
        rr = 2.0 * prefix @ Q[:-1, -1] + a[-1]
        vertex = (-rr / (2.0 * qq) - t0) / step if qq > 0 else np.zeros(k)
        iv = np.clip(vertex, i_lo, i_hi)
        cands = [i_lo, i_lo + 1, i_hi - 1, i_hi, np.floor(iv), np.ceil(iv)]
        rows = np.flatnonzero(ok)
        if not rows.size:
            continue
        count += int((i_hi[rows] - i_lo[rows] + 1).sum())
        for ci in cands:
            j = np.clip(ci[rows], 0, resolution - 1).astype(int)
            pts = np.column_stack([prefix[rows], last[j]])
            good = feasible(pts)
            if not np.any(good):
                continue
            vals = np.where(good, value(pts), np.inf)
            m = int(np.argmin(vals))
            if vals[m] < best_val:
                best_val, best_f = float(vals[m]), pts[m].copy()

    if best_f is None:
        return OracleSolution(None, float("nan"), INFEASIBLE, float("nan"), 0)
    # gradient 2Qf + a bounded over the box corners
    corner_max = max(
        np.linalg.norm(2.0 * problem.Q @ np.array(c) + problem.a)
        for c in itertools.product(*box)
    )
    return OracleSolution(best_f, best_val, OPTIMAL, corner_max * diameter, count)
