"""Closed-form rejection probabilities under independent test statistics.

The disjunctive objective is evaluated in log space: the product of
per-hypothesis non-rejection probabilities is accumulated as a sum of
log-cdf terms, so factors arbitrarily close to 0 or 1 lose no precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gauss


@dataclass(frozen=True)
class AlternativeSet:
    """Hypotheses treated as non-null, with their assumed effect sizes.

    ``indices`` are strictly increasing 0-based positions into the full
    m-vector; ``means`` are the matching standardized effects.
    """

    indices: np.ndarray
    means: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        means = np.asarray(self.means, dtype=float)
        if idx.ndim != 1 or means.ndim != 1 or len(idx) != len(means):
            raise ValueError("indices and means must be 1-d and equal length")
        if len(idx) > 1 and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(idx < 0):
            raise ValueError("indices must be nonnegative")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "means", means)

    def __len__(self):
        return len(self.indices)


def marginal_power(theta_i: float, w_i: float, alpha: float) -> float:
    """Probability that the weighted test rejects a single hypothesis."""
    if not 0.0 <= w_i <= 1.0:
        raise ValueError(f"weight must be in [0, 1], got {w_i}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if w_i == 0.0:
        return 0.0
    return gauss.ccdf(gauss.inv_ccdf_clamped(w_i * alpha) - theta_i)


def log_nonrejection(alt: AlternativeSet, w, alpha: float) -> float:
    """log P(no rejection over the alternative set), i.e. log(1 - power)."""
    w = np.asarray(w, dtype=float)
    sub = w[alt.indices]
    pos = sub > 0.0
    if not np.any(pos):
        return 0.0
    q = gauss.inv_ccdf_clamped(sub[pos] * alpha)
    return float(np.sum(gauss.log_cdf(q - alt.means[pos])))


def disjunctive_power(alt: AlternativeSet, w, alpha: float) -> float:
    """Probability of rejecting at least one hypothesis in the set.

    ``w`` is the full m-length weight vector; entries off the set do not
    enter the objective.  Raises on an empty set (callers special-case it).
    """
    if len(alt) == 0:
        raise ValueError("disjunctive power is undefined for an empty set")
    return float(-np.expm1(log_nonrejection(alt, w, alpha)))
