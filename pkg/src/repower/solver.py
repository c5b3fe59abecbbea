"""Optimal Bonferroni weights maximizing disjunctive power.

Three routes to the optimum:

* ``solve_fixed_point`` -- the stationarity system derived from the
  Lagrangian of the constrained problem: w_j = ccdf(theta_j/2 +
  (log c - sum_{i != j} log cdf(q_i - theta_i)) / theta_j) / alpha with
  q_i the upper-tail quantile of w_i * alpha, and c > 0 tuned so the
  weights sum to 1.  Rather than iterating that map directly (which
  diverges for small c once the set grows), the system is reparametrized
  by the shared constant K = log c - sum_i log cdf(q_i - theta_i): each
  quantile then solves a scalar convex equation independently, and the
  weight sum is strictly decreasing in K, so a single bracket-and-bisect
  search on K realizes the sum constraint robustly.
* ``solve_grid`` -- exhaustive enumeration of simplex compositions at a
  fixed step, restricted to the alternative-set coordinates.
* ``solve_multistart`` -- projected-gradient ascent from one uniform
  start per nonempty subset of the alternative set; a cross-check, not
  the production path.

Stationary points are not guaranteed global, so the fixed-point result is
safeguarded against the uniform-on-set and single-corner candidates and
the best is returned.

All comparisons between candidate weight vectors use log(1 - power)
rather than power itself, which keeps full resolution when the power is
within rounding of 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special

from . import gauss
from .mtp import ProblemSpec
from .power import AlternativeSet, log_nonrejection


class NonPositiveMean(ValueError):
    """Alternative-set mean <= 0; the stationarity map divides by it."""


class TooManyDimensions(ValueError):
    """Grid enumeration refused beyond 4 active coordinates."""


class NoConvergence(RuntimeError):
    """Fixed-point search exhausted its budget; carries the best report."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    weight_tol: float = 1e-10
    sum_tol: float = 1e-10
    max_inner: int = 500
    max_outer: int = 200
    damping: float = 0.5
    grid_step: float = 0.005

    def __post_init__(self):
        for name in ("weight_tol", "sum_tol", "max_inner", "max_outer",
                     "grid_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")
        n = round(1.0 / self.grid_step)
        if abs(n * self.grid_step - 1.0) > 1e-9:
            raise ValueError("grid_step must divide 1")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SolveReport:
    weights: np.ndarray          # full length m, zeros off the set
    achieved_power: Optional[float]
    lagrange_c: Optional[float]  # fixed-point method only
    iterations: int
    converged: bool
    method: str                  # fixed_point | grid | multistart_ascent
    residual: Optional[float] = None
    log_complement: Optional[float] = None  # log(1 - achieved_power)


# ---------------------------------------------------------------------------
# batched fixed-point engine (n problem instances with the same set size)
# ---------------------------------------------------------------------------

def _fp_map(W, logc, T, alpha):
    """One application of the stationarity map, elementwise over rows."""
    q = -special.ndtri(np.clip(W * alpha, gauss.P_FLOOR, gauss.P_CEIL))
    lf = special.log_ndtr(q - T)
    lf = np.where(W > 0.0, lf, 0.0)  # zero weight contributes factor 1
    s = lf.sum(axis=1, keepdims=True) - lf
    arg = 0.5 * T + (logc[:, None] - s) / T
    return np.clip(special.ndtr(-arg) / alpha, 0.0, 1.0)


def _branch_g(q, T):
    """g_j(q) = theta_j q - theta_j^2/2 - log cdf(q - theta_j).

    At a stationary point every coordinate satisfies g_j(q_j) = K with the
    same constant K = log c - sum_i log cdf(q_i - theta_i).  g is convex
    (its second derivative is the negated Mills-ratio derivative) and
    increasing to the right of its minimum, which is the branch the
    optimum lives on: large weights go with large means, whose branch
    minimum sits far left of the feasible quantile range.
    """
    return T * q - 0.5 * T * T - special.log_ndtr(q - T)


def _branch_solve(K, T, q_cap, max_iter):
    """Quantiles solving g_j(q) = K on the increasing branch, per row.

    K is (n,), T and the result are (n, k).  Coordinates where even the
    weight cap (w = 1, q = q_cap) satisfies g >= K stay capped.  Newton
    from the linear-asymptote bound q <= (K + theta^2/2)/theta converges
    monotonically down to the root because g is convex and increasing
    there.
    """
    Kb = K[:, None]
    capped = _branch_g(np.full_like(T, q_cap), T) >= Kb
    q = np.maximum((Kb + 0.5 * T * T) / T, q_cap)
    for _ in range(max_iter):
        x = q - T
        gval = T * q - 0.5 * T * T - special.log_ndtr(x)
        # Mills ratio phi/Phi, the derivative of -log cdf
        hazard = np.exp(-0.5 * x * x - _LOG_SQRT_2PI - special.log_ndtr(x))
        gprime = np.maximum(T - hazard, 1e-300)
        step = (gval - Kb) / gprime
        q = np.maximum(q - step, q_cap)
        if np.abs(step).max() < 1e-13:
            break
    return np.where(capped, q_cap, q)


_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _log1m_dpower(W, T, alpha):
    """log(1 - disjunctive power) per row for weights on the active set."""
    q = -special.ndtri(np.clip(W * alpha, gauss.P_FLOOR, gauss.P_CEIL))
    lf = special.log_ndtr(q - T)
    return np.where(W > 0.0, lf, 0.0).sum(axis=1)


def _polish(W, T, alpha, max_iter=100):
    """Projected-gradient refinement of candidate weights, per row.

    Used on rows where the stationarity system can be unreliable (very
    small means put part of the feasible range on the decreasing branch
    of g, and the objective goes nearly flat).  Ascent with a halving
    step line search; never returns anything worse than its input.
    """
    n, k = W.shape
    ln = _log1m_dpower(W, T, alpha)
    steps = 0.5 ** np.arange(24)
    Trep = np.repeat(T, len(steps), axis=0)
    for _ in range(max_iter):
        g = _log_grad(W, T, alpha)
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        d = g / np.maximum(norm, 1e-300)
        cand = project_simplex(
            W[:, None, :] + steps[None, :, None] * d[:, None, :])
        ln_c = _log1m_dpower(cand.reshape(-1, k), Trep, alpha)
        ln_c = ln_c.reshape(n, len(steps))
        best = np.argmin(ln_c, axis=1)
        ln_b = ln_c[np.arange(n), best]
        improved = ln_b < ln - 1e-15
        if not improved.any():
            break
        W = np.where(improved[:, None], cand[np.arange(n), best], W)
        ln = np.where(improved, ln_b, ln)
    return W, ln


def fp_batch(T, alpha, cfg=DEFAULT_CONFIG):
    """Solve the stationarity system for n instances at once.

    T is an (n, k) array of positive means, k >= 1.  Returns
    ``(W, logc, converged, residual, iterations)`` with W already
    safeguarded against the uniform and corner candidates.
    """
    T = np.asarray(T, dtype=float)
    n, k = T.shape
    if np.any(T <= 0.0):
        raise NonPositiveMean("all alternative-set means must be > 0")
    if k == 1:
        W = np.ones((n, 1))
        logc = T[:, 0] * (gauss.inv_ccdf(alpha) - 0.5 * T[:, 0])
        return W, logc, np.ones(n, bool), np.zeros(n), 0

    # The weight sum S(K) = sum_j ccdf(q_j(K)) / alpha is strictly
    # decreasing in the shared stationarity constant K (each quantile is
    # increasing in K on its branch), so a bracket-and-bisect search on K
    # is guaranteed to find the simplex constraint S = 1.
    q_cap = gauss.inv_ccdf(alpha)  # w = 1
    newton_iters = min(cfg.max_inner, 80)
    iters = [0]

    def weight_sum(K):
        iters[0] += n
        q = _branch_solve(K, T, q_cap, newton_iters)
        return special.ndtr(-q).sum(axis=1) / alpha, q

    # start from the uniform-weight guess for K
    q_u = gauss.inv_ccdf(alpha / k)
    K = _branch_g(np.full((n, k), q_u), T).mean(axis=1)
    S, q = weight_sum(K)
    lo = np.where(S >= 1.0, K, np.nan)
    hi = np.where(S <= 1.0, K, np.nan)
    step = np.ones(n)
    for _ in range(cfg.max_outer):
        need_hi = np.isnan(hi)
        need_lo = np.isnan(lo)
        if not (need_hi | need_lo).any():
            break
        K = np.where(need_hi, np.where(np.isnan(lo), K, lo) + step, K)
        K = np.where(need_lo, np.where(np.isnan(hi), K, hi) - step, K)
        step = 2.0 * step
        S, q = weight_sum(K)
        lo = np.where(need_hi & (S >= 1.0), K, lo)
        hi = np.where(need_hi & (S <= 1.0), K, hi)
        lo = np.where(need_lo & (S >= 1.0), K, lo)
        hi = np.where(need_lo & (S <= 1.0), K, hi)
    bracketed = ~(np.isnan(lo) | np.isnan(hi))
    lo = np.where(bracketed, lo, K)
    hi = np.where(bracketed, hi, K)

    done = np.zeros(n, dtype=bool)
    for _ in range(cfg.max_outer):
        K = 0.5 * (lo + hi)
        S, q = weight_sum(K)
        done = np.abs(S - 1.0) <= cfg.sum_tol
        lo = np.where(S > 1.0, K, lo)
        hi = np.where(S <= 1.0, K, hi)
        if done.all() or (hi - lo).max() < 1e-15:
            break

    W = special.ndtr(-q) / alpha
    logc = K + special.log_ndtr(q - T).sum(axis=1)
    residual = np.abs(W - _fp_map(W, logc, T, alpha)).max(axis=1)
    converged = bracketed & (residual <= 1e-8)
    # Exact simplex feasibility; a renormalization this small leaves the
    # stationarity residual within tolerance.
    W = W / W.sum(axis=1, keepdims=True)

    # Safeguard: stationary points are first-order only.  Compare against
    # uniform-on-set and every single-hypothesis corner.
    ln_fp = _log1m_dpower(W, T, alpha)
    best_W, best_ln = W, ln_fp
    cand = np.full((n, k), 1.0 / k)
    ln_c = _log1m_dpower(cand, T, alpha)
    better = ln_c < best_ln
    best_W = np.where(better[:, None], cand, best_W)
    best_ln = np.where(better, ln_c, best_ln)
    for j in range(k):
        corner = np.zeros((n, k))
        corner[:, j] = 1.0
        ln_c = _log1m_dpower(corner, T, alpha)
        better = ln_c < best_ln
        best_W = np.where(better[:, None], corner, best_W)
        best_ln = np.where(better, ln_c, best_ln)
    # A safeguard replacement means the stationary point was not the
    # optimum found; flag those rows as unconverged.
    replaced = np.abs(best_W - W).max(axis=1) > 1e-12
    converged = converged & ~replaced

    # Refine rows where stationarity alone is not trustworthy: safeguard
    # replacements, and instances with means small enough that part of
    # the feasible range sits on the decreasing branch of g.  The
    # reported residual refers to the stationary solution, before this
    # local refinement.
    need = replaced | (T.min(axis=1) < 1.0)
    if need.any():
        Wp, lnp = _polish(best_W[need], T[need], alpha)
        improved = lnp < best_ln[need] - 1e-15
        sub = best_W[need]
        sub[improved] = Wp[improved]
        best_W[need] = sub
    return best_W, logc, converged, residual, iters[0]


def _embed(w_sub, alt, m):
    w = np.zeros(m)
    w[alt.indices] = w_sub
    return w


def _check_alt(alt, require_positive=True):
    if len(alt) == 0:
        raise ValueError("alternative set must be nonempty")
    if require_positive and np.any(alt.means <= 0.0):
        raise NonPositiveMean("all alternative-set means must be > 0")


def solve_fixed_point(alt: AlternativeSet, spec: ProblemSpec,
                      cfg: SolverConfig = DEFAULT_CONFIG) -> SolveReport:
    """Solve the stationarity system for one instance.

    Raises NoConvergence (carrying the best-so-far report) if the search
    for c exhausts its budget without meeting the tolerances.
    """
    _check_alt(alt)
    T = alt.means[None, :]
    W, logc, conv, resid, iters = fp_batch(T, spec.alpha, cfg)
    w = _embed(W[0], alt, spec.m)
    ln = log_nonrejection(alt, w, spec.alpha)
    report = SolveReport(
        weights=w,
        achieved_power=float(-np.expm1(ln)),
        lagrange_c=float(np.exp(logc[0])),
        iterations=iters,
        converged=bool(conv[0]),
        method="fixed_point",
        residual=float(resid[0]),
        log_complement=ln,
    )
    if not report.converged:
        raise NoConvergence("fixed-point search did not converge", report)
    return report


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _compositions(total: int, k: int) -> np.ndarray:
    """All k-part compositions of ``total`` in lexicographic order."""
    if k == 1:
        return np.array([[total]], dtype=np.int32)
    blocks = []
    for first in range(total + 1):
        rest = _compositions(total - first, k - 1)
        block = np.empty((len(rest), k), dtype=np.int32)
        block[:, 0] = first
        block[:, 1:] = rest
        blocks.append(block)
    return np.concatenate(blocks, axis=0)


def _grid_log_tables(T, alpha, step):
    """Per-coordinate log cdf(q_g - theta) lookup tables over the grid.

    T is (n, k); returns (n, k, G) with the zero-weight column set to 0.
    """
    npts = round(1.0 / step) + 1
    wgrid = step * np.arange(npts)
    q = gauss.inv_ccdf_clamped(np.clip(wgrid[1:] * alpha, None, gauss.P_CEIL))
    tables = np.zeros(T.shape + (npts,))
    tables[..., 1:] = special.log_ndtr(q[None, None, :] - T[..., None])
    return tables


def grid_batch(T, alpha, step):
    """Exhaustive grid optimum for n instances with the same set size.

    Returns (W, log_complement).  Intended for small k (the Monte Carlo
    engine uses it for pairs); memory grows with C(1/step + k - 1, k - 1).
    """
    T = np.asarray(T, dtype=float)
    n, k = T.shape
    npts_total = round(1.0 / step)
    comps = _compositions(npts_total, k)
    tables = _grid_log_tables(T, alpha, step)
    total = np.zeros((n, len(comps)))
    for i in range(k):
        total += tables[:, i, :][:, comps[:, i]]
    best = np.argmin(total, axis=1)  # first occurrence: lexicographic min
    W = comps[best].astype(float) * step
    return W, total[np.arange(n), best]


def solve_grid(alt: AlternativeSet, spec: ProblemSpec,
               cfg: SolverConfig = DEFAULT_CONFIG) -> SolveReport:
    """Enumerate simplex compositions over the set coordinates.

    Mass off the set is wasted (those factors do not enter the objective),
    so the restricted optimum equals the full-simplex optimum.
    """
    _check_alt(alt, require_positive=False)
    k = len(alt)
    if k > 4:
        raise TooManyDimensions(f"grid search limited to 4 coordinates, got {k}")
    W, ln = grid_batch(alt.means[None, :], spec.alpha, cfg.grid_step)
    w = _embed(W[0], alt, spec.m)
    return SolveReport(
        weights=w,
        achieved_power=float(-np.expm1(ln[0])),
        lagrange_c=None,
        iterations=len(_compositions(round(1.0 / cfg.grid_step), k)),
        converged=True,
        method="grid",
        log_complement=float(ln[0]),
    )


# ---------------------------------------------------------------------------
# multi-start projected ascent (cross-check method)
# ---------------------------------------------------------------------------

def project_simplex(v):
    """Euclidean projection onto the probability simplex, last axis."""
    v = np.asarray(v, dtype=float)
    k = v.shape[-1]
    u = np.sort(v, axis=-1)[..., ::-1]
    css = np.cumsum(u, axis=-1) - 1.0
    ind = np.arange(1, k + 1)
    cond = u - css / ind > 0
    rho = cond.sum(axis=-1)
    theta = np.take_along_axis(css, rho[..., None] - 1, axis=-1) / rho[..., None]
    return np.maximum(v - theta, 0.0)


def _log_grad(W, T, alpha):
    """Gradient of the objective in log space, clipped before exp."""
    q = -special.ndtri(np.clip(W * alpha, gauss.P_FLOOR, gauss.P_CEIL))
    lf = special.log_ndtr(q - T)
    s = lf.sum(axis=-1, keepdims=True) - lf
    logg = np.log(alpha) + s + T * q - 0.5 * T * T
    return np.exp(np.clip(logg, -745.0, 300.0))


def solve_multistart(alt: AlternativeSet, spec: ProblemSpec,
                     cfg: SolverConfig = DEFAULT_CONFIG,
                     max_iter: int = 200) -> SolveReport:
    """Projected-gradient ascent from every nonempty-subset uniform start."""
    _check_alt(alt)
    T = alt.means
    k = len(alt)
    starts = []
    for mask in range(1, 2 ** k):
        sel = np.array([(mask >> j) & 1 for j in range(k)], dtype=float)
        starts.append(sel / sel.sum())
    W = np.array(starts)
    ns = len(W)
    Tb = np.broadcast_to(T, (ns, k))
    ln = _log1m_dpower(W, Tb, spec.alpha)
    steps = 0.5 ** np.arange(24)
    stalled = np.zeros(ns, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        g = _log_grad(W, Tb, spec.alpha)
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        d = g / np.maximum(norm, 1e-300)
        cand = project_simplex(W[:, None, :] + steps[None, :, None] * d[:, None, :])
        ln_c = _log1m_dpower(
            cand.reshape(-1, k), np.broadcast_to(T, (ns * len(steps), k)),
            spec.alpha).reshape(ns, len(steps))
        best = np.argmin(ln_c, axis=1)
        ln_b = ln_c[np.arange(ns), best]
        improved = ln_b < ln - 1e-15
        W = np.where(improved[:, None], cand[np.arange(ns), best], W)
        ln = np.where(improved, ln_b, ln)
        stalled = ~improved
        if stalled.all():
            break
    win = int(np.argmin(ln))
    w = _embed(W[win], alt, spec.m)
    return SolveReport(
        weights=w,
        achieved_power=float(-np.expm1(ln[win])),
        lagrange_c=None,
        iterations=it,
        converged=bool(stalled[win]),
        method="multistart_ascent",
        log_complement=float(ln[win]),
    )


# ---------------------------------------------------------------------------
# method selection
# ---------------------------------------------------------------------------

def uniform_report(spec: ProblemSpec) -> SolveReport:
    """Fallback when nothing was rejected: equal weights, no objective."""
    return SolveReport(
        weights=np.full(spec.m, 1.0 / spec.m),
        achieved_power=None,
        lagrange_c=None,
        iterations=0,
        converged=True,
        method="fixed_point",
    )


def optimal_weights(alt: AlternativeSet, spec: ProblemSpec,
                    cfg: SolverConfig = DEFAULT_CONFIG) -> SolveReport:
    """Route to the best method for the set size.

    Empty set: uniform weights.  Up to 3 active coordinates: grid search,
    replaced by the fixed-point result when that is strictly better.
    Beyond 3: fixed point only (grid enumeration is impractical).
    """
    if len(alt) == 0:
        return uniform_report(spec)
    if len(alt) <= 3:
        grid = solve_grid(alt, spec, cfg)
        try:
            fp = solve_fixed_point(alt, spec, cfg)
        except NoConvergence as err:
            fp = err.report
        if fp.log_complement < grid.log_complement:
            return fp
        return grid
    return solve_fixed_point(alt, spec, cfg)
