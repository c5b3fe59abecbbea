"""Seeded Monte Carlo engine for two-trial probability-of-success studies.

Each replicate draws trial-1 and trial-2 statistics, runs the replication
pipeline with data-dependent weights (re-solved every replicate, never
cached), runs the all-uniform pipeline alongside it, and the engine
aggregates rejection counts.

All random draws for a scenario come from a single counter-based
generator (Philox) keyed by the scenario seed and are materialized up
front in a fixed order, so results are bit-identical for a given
(seed, reps) regardless of how many worker threads process the
replicates.  Replicates are handled in vectorized chunks: rejection
patterns with one active hypothesis are corners, pairs go through the
exhaustive grid, and larger patterns go through the batched fixed-point
solver (the power difference between the two routes is below the grid
resolution).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import gauss
from .solver import SolverConfig, fp_batch, grid_batch

# Looser than the library default: Monte Carlo noise dwarfs weight error
# at this scale and the engine solves the system up to 1e5 times per cell.
SIM_SOLVER_CONFIG = SolverConfig(weight_tol=1e-8, sum_tol=1e-8,
                                 max_inner=200, max_outer=120)

_CHUNK = 20_000
METHODS = ("weighted", "unweighted")


@dataclass(frozen=True)
class ScenarioSpec:
    theta1: tuple
    alpha: float
    reps: int
    seed: int
    theta2: Optional[tuple] = None  # defaults to theta1
    methods: tuple = METHODS

    def __post_init__(self):
        object.__setattr__(self, "theta1", tuple(float(t) for t in self.theta1))
        if self.theta2 is not None:
            t2 = tuple(float(t) for t in self.theta2)
            if len(t2) != len(self.theta1):
                raise ValueError("theta1 and theta2 must have equal length")
            object.__setattr__(self, "theta2", t2)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")

    @property
    def m(self):
        return len(self.theta1)

    @property
    def resolved_theta2(self):
        return self.theta2 if self.theta2 is not None else self.theta1


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float


@dataclass(frozen=True)
class SimSummary:
    reps: int
    # per-method estimates; dpos is None when trial-2 truth has no non-null
    dpos: Optional[dict]
    mpos: dict
    # per-method {"trial1": Estimate|None, "trial2": Estimate|None}
    fwer: dict
    # (m, 2, 2) counts: [hypothesis, unweighted, weighted], 0 = reject
    cross_tables: np.ndarray
    mean_weights: np.ndarray
    weight_hist: np.ndarray
    weight_hist_edges: np.ndarray
    n_unconverged: int


def _binom(count, n):
    p = count / n
    return Estimate(value=p, se=float(np.sqrt(p * (1.0 - p) / n)))


def n_threads() -> int:
    raw = os.environ.get("REPOWER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _solve_weights_chunk(Z1, alpha, cfg):
    """Pipeline weights for a chunk of trial-1 outcomes.

    Returns (W, r1, n_unconverged): the (n, m) weight matrix, the trial-1
    rejection matrix, and the count of fixed-point non-convergences (for
    which the safeguarded best-so-far weights are used, never dropped).
    """
    n, m = Z1.shape
    thresh = gauss.inv_ccdf(alpha / m)
    r1 = Z1 > thresh
    k = r1.sum(axis=1)
    W = np.zeros((n, m))
    W[k == 0] = 1.0 / m
    one = k == 1
    W[one] = r1[one].astype(float)
    bad = 0
    for kk in range(2, m + 1):
        rows = np.flatnonzero(k == kk)
        if rows.size == 0:
            continue
        cols = np.nonzero(r1[rows])[1].reshape(rows.size, kk)
        T = Z1[rows[:, None], cols]
        if kk == 2:
            Wsub, _ = grid_batch(T, alpha, cfg.grid_step)
        else:
            Wsub, _, conv, _, _ = fp_batch(T, alpha, cfg)
            bad += int((~conv).sum())
        W[rows[:, None], cols] = Wsub
    return W, r1, bad


def _process_chunk(Z1, Z2, Theta1, Theta2, alpha, cfg, hist_index, hist_edges):
    n, m = Z1.shape
    W, r1, bad = _solve_weights_chunk(Z1, alpha, cfg)
    thresh = gauss.inv_ccdf(alpha / m)
    qw = gauss.inv_ccdf_clamped(W * alpha)
    r2w = (Z2 > qw) & (W > 0.0)
    r2u = Z2 > thresh
    ow = r1 & r2w
    ou = r1 & r2u

    null1 = Theta1 <= 0.0
    null2 = Theta2 <= 0.0
    nonnull2 = ~null2
    acc = {
        "overall": {"weighted": ow.sum(axis=0), "unweighted": ou.sum(axis=0)},
        "dpos": {
            "weighted": int((ow & nonnull2).any(axis=1).sum()),
            "unweighted": int((ou & nonnull2).any(axis=1).sum()),
        },
        "has_nonnull2": int(nonnull2.any(axis=1).sum()),
        "has_null1": int(null1.any(axis=1).sum()),
        "has_null2": int(null2.any(axis=1).sum()),
        "fwer1": int((r1 & null1).any(axis=1).sum()),
        "fwer2": {
            "weighted": int((r2w & null2).any(axis=1).sum()),
            "unweighted": int((r2u & null2).any(axis=1).sum()),
        },
        "weight_sum": W.sum(axis=0),
        "hist": np.histogram(W[:, hist_index], bins=hist_edges)[0],
        "unconverged": bad,
    }
    cross = np.empty((m, 2, 2), dtype=np.int64)
    cross[:, 0, 0] = (ou & ow).sum(axis=0)
    cross[:, 0, 1] = (ou & ~ow).sum(axis=0)
    cross[:, 1, 0] = (~ou & ow).sum(axis=0)
    cross[:, 1, 1] = (~ou & ~ow).sum(axis=0)
    acc["cross"] = cross
    return acc


def _merge(accs):
    out = accs[0]
    for a in accs[1:]:
        out["overall"] = {k: out["overall"][k] + a["overall"][k] for k in METHODS}
        out["dpos"] = {k: out["dpos"][k] + a["dpos"][k] for k in METHODS}
        out["fwer2"] = {k: out["fwer2"][k] + a["fwer2"][k] for k in METHODS}
        for key in ("has_nonnull2", "has_null1", "has_null2", "fwer1",
                    "unconverged"):
            out[key] += a[key]
        out["weight_sum"] = out["weight_sum"] + a["weight_sum"]
        out["hist"] = out["hist"] + a["hist"]
        out["cross"] = out["cross"] + a["cross"]
    return out


def _summarize(acc, reps, methods, hist_edges) -> SimSummary:
    if acc["has_nonnull2"] > 0:
        dpos = {k: _binom(acc["dpos"][k], reps) for k in methods}
    else:
        dpos = None
    mpos = {k: [_binom(c, reps) for c in acc["overall"][k]] for k in methods}
    fwer = {}
    for k in methods:
        fwer[k] = {
            "trial1": _binom(acc["fwer1"], reps) if acc["has_null1"] else None,
            "trial2": _binom(acc["fwer2"][k], reps) if acc["has_null2"] else None,
        }
    return SimSummary(
        reps=reps,
        dpos=dpos,
        mpos=mpos,
        fwer=fwer,
        cross_tables=acc["cross"],
        mean_weights=acc["weight_sum"] / reps,
        weight_hist=acc["hist"],
        weight_hist_edges=hist_edges,
        n_unconverged=acc["unconverged"],
    )


def _run_matrices(Z1, Z2, Theta1, Theta2, alpha, cfg, methods,
                  hist_index, hist_edges) -> SimSummary:
    reps = Z1.shape[0]
    spans = [(lo, min(lo + _CHUNK, reps)) for lo in range(0, reps, _CHUNK)]

    def work(span):
        lo, hi = span
        return _process_chunk(Z1[lo:hi], Z2[lo:hi], Theta1[lo:hi],
                              Theta2[lo:hi], alpha, cfg, hist_index,
                              hist_edges)

    threads = n_threads()
    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            accs = list(pool.map(work, spans))
    else:
        accs = [work(s) for s in spans]
    return _summarize(_merge(accs), reps, methods, hist_edges)


def _rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def run_scenario(s: ScenarioSpec, cfg: Optional[SolverConfig] = None,
                 hist_index: int = 0, hist_bins: int = 40) -> SimSummary:
    """Monte Carlo estimates for one fixed-truth scenario."""
    cfg = cfg or SIM_SOLVER_CONFIG
    rng = _rng_for(s.seed)
    m = s.m
    t1 = np.asarray(s.theta1)
    t2 = np.asarray(s.resolved_theta2)
    Z1 = rng.standard_normal((s.reps, m)) + t1
    Z2 = rng.standard_normal((s.reps, m)) + t2
    Theta1 = np.broadcast_to(t1, (s.reps, m))
    Theta2 = np.broadcast_to(t2, (s.reps, m))
    edges = np.linspace(0.0, 1.0, hist_bins + 1)
    return _run_matrices(Z1, Z2, Theta1, Theta2, s.alpha, cfg, s.methods,
                         hist_index, edges)


# ---------------------------------------------------------------------------
# scenario families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Family:
    """Mean-vector family parametrized by a scalar effect size."""

    name: str
    m: int
    fn: Optional[Callable[[float], tuple]] = None
    random_uniform_head: int = 0  # leading means drawn U[0, theta] per rep

    def fixed_vector(self, theta: float):
        if self.fn is None:
            raise ValueError(f"family {self.name!r} is randomized per replicate")
        return np.asarray(self.fn(theta), dtype=float)


FAMILIES = {
    f.name: f
    for f in [
        Family("zero-theta", 2, lambda t: (0.0, t)),
        Family("half-theta", 2, lambda t: (t / 2.0, t)),
        Family("equal", 2, lambda t: (t, t)),
        Family("swapped", 2, lambda t: (t, t / 2.0)),
        Family("two-zeros", 3, lambda t: (0.0, 0.0, t)),
        Family("geometric", 3, lambda t: (t / 2.0, t, 2.0 * t)),
        Family("four-zeros", 5, lambda t: (0.0, 0.0, 0.0, 0.0, t)),
        Family("two-zeros-three", 5, lambda t: (0.0, 0.0, t, t, t)),
        Family("uniform-random", 5, None, random_uniform_head=4),
    ]
}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None


def _point_seed(seed: int, *key) -> int:
    """Independent stream per grid point, derived from the base seed."""
    ss = np.random.SeedSequence([int(seed) & (2**63 - 1), *key])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_family_scenario(family: Family, theta: float, family2: Optional[Family],
                        theta2: Optional[float], alpha: float, reps: int,
                        seed: int, cfg: Optional[SolverConfig] = None,
                        redraw_per_rep: bool = True,
                        hist_index: int = 0, hist_bins: int = 40) -> SimSummary:
    """Run one scenario where truth comes from named families.

    family2/theta2 default to the trial-1 family and effect (consistent
    treatment effects).  For the randomized family the leading means are
    redrawn each replicate unless redraw_per_rep is False.
    """
    cfg = cfg or SIM_SOLVER_CONFIG
    if family2 is None:
        family2, theta2 = family, theta
    if family2.m != family.m:
        raise ValueError("families must have matching dimension")
    m = family.m
    rng = _rng_for(seed)

    def truth(fam, th):
        if fam.random_uniform_head:
            h = fam.random_uniform_head
            shape = (reps, h) if redraw_per_rep else (1, h)
            head = rng.uniform(0.0, th, size=shape)
            tail = np.full((head.shape[0], m - h), th)
            return np.broadcast_to(np.hstack([head, tail]), (reps, m)).copy()
        return np.broadcast_to(fam.fixed_vector(th), (reps, m))

    Theta1 = truth(family, theta)
    Theta2 = Theta1 if family2 is family and theta2 == theta else truth(family2, theta2)
    Z1 = rng.standard_normal((reps, m)) + Theta1
    Z2 = rng.standard_normal((reps, m)) + Theta2
    edges = np.linspace(0.0, 1.0, hist_bins + 1)
    return _run_matrices(Z1, Z2, Theta1, Theta2, alpha, cfg, METHODS,
                         hist_index, edges)


def sweep_curve(family_name: str, theta_grid, base: ScenarioSpec,
                cfg: Optional[SolverConfig] = None):
    """One SimSummary per effect-size grid point, independent streams."""
    theta_grid = list(theta_grid)
    if not theta_grid:
        raise ValueError("theta grid must be nonempty")
    fam = get_family(family_name)
    out = []
    for i, th in enumerate(theta_grid):
        summary = run_family_scenario(
            fam, float(th), None, None, base.alpha, base.reps,
            _point_seed(base.seed, i), cfg)
        out.append((float(th), summary))
    return out


def sweep_heatmap(family1_name: str, family2_name: str, grid1, grid2,
                  base: ScenarioSpec, cfg: Optional[SolverConfig] = None):
    """Robustness grid: trial-1 truth from family1, trial-2 from family2."""
    grid1, grid2 = list(grid1), list(grid2)
    if not grid1 or not grid2:
        raise ValueError("grids must be nonempty")
    f1, f2 = get_family(family1_name), get_family(family2_name)
    rows = []
    for i, th in enumerate(grid1):
        row = []
        for j, th2 in enumerate(grid2):
            summary = run_family_scenario(
                f1, float(th), f2, float(th2), base.alpha, base.reps,
                _point_seed(base.seed, i, j), cfg)
            row.append((float(th), float(th2), summary))
        rows.append(row)
    return rows


def fwer_check(s: ScenarioSpec, cfg: Optional[SolverConfig] = None):
    """Per-trial FWER estimates; requires at least one true null."""
    t1 = np.asarray(s.theta1)
    t2 = np.asarray(s.resolved_theta2)
    if not (np.any(t1 <= 0.0) or np.any(t2 <= 0.0)):
        raise ValueError("fwer_check requires at least one true null")
    return run_scenario(s, cfg).fwer
