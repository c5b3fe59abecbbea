"""Multiple testing procedures: unweighted and weighted Bonferroni.

Rejections use strict inequalities (p < w * alpha); boundary ties never
reject. Weight vectors live on the probability simplex: nonnegative,
summing to 1 within WEIGHT_SUM_TOL.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gauss

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ProblemSpec:
    """Number of hypotheses and the overall one-sided level."""

    m: int
    alpha: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


def validate_weights(w, m=None):
    """Check simplex membership; returns the weights as a float array."""
    w = np.asarray(w, dtype=float)
    if m is not None and len(w) != m:
        raise ValueError(f"expected {m} weights, got {len(w)}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def z_to_p(z):
    """One-sided p-values from standardized statistics: p_i = ccdf(z_i)."""
    return np.atleast_1d(gauss.ccdf(z))


def bonferroni(p, spec: ProblemSpec):
    """Unweighted Bonferroni: reject H_i iff p_i < alpha / m."""
    p = np.asarray(p, dtype=float)
    if len(p) != spec.m:
        raise ValueError(f"expected {spec.m} p-values, got {len(p)}")
    return p < spec.alpha / spec.m


def weighted_bonferroni(p, w, spec: ProblemSpec):
    """Weighted Bonferroni: reject H_i iff p_i < w_i * alpha.

    Zero-weight hypotheses can never be rejected.
    """
    p = np.asarray(p, dtype=float)
    w = validate_weights(w, m=spec.m)
    if len(p) != spec.m:
        raise ValueError(f"expected {spec.m} p-values, got {len(p)}")
    return p < w * spec.alpha


def adjusted_p(p, w):
    """Weighted-Bonferroni adjusted p-values: min(1, p_i / w_i).

    Zero weight gives adjusted p = 1, even at p = 0.  Rejection at level
    alpha is equivalent to adjusted_p < alpha.
    """
    p = np.asarray(p, dtype=float)
    w = validate_weights(w)
    if len(p) != len(w):
        raise ValueError("p and w must have equal length")
    adj = np.ones_like(p)
    pos = w > 0
    with np.errstate(over="ignore"):  # p / tiny w saturates to the cap of 1
        adj[pos] = np.minimum(1.0, p[pos] / w[pos])
    return adj
