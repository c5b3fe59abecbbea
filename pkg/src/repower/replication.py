"""Two-trial pipeline: estimate the alternative set from trial 1, weight
trial 2, and combine decisions.

Trial 1 is always tested with the unweighted Bonferroni procedure; the
set of hypotheses it rejects becomes the alternative set, with the raw
trial-1 z-statistics (the MLE, no shrinkage) as the assumed effect sizes.
Trial 2 is tested with the weighted procedure at the solved weights, and a
hypothesis succeeds overall only if both trials reject it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gauss, mtp
from .mtp import ProblemSpec
from .power import AlternativeSet
from .solver import DEFAULT_CONFIG, SolveReport, SolverConfig, optimal_weights


@dataclass(frozen=True)
class ReplicationResult:
    alt_set: AlternativeSet
    weights: np.ndarray
    trial1_rejections: np.ndarray
    trial2_rejections: np.ndarray
    overall_rejections: np.ndarray
    trial2_adjusted_p: np.ndarray
    solve: SolveReport


def estimate_alt_set(trial1_z, spec: ProblemSpec,
                     rule: str = "rejected_set") -> AlternativeSet:
    """Alternative set from trial-1 statistics.

    ``rejected_set``: indices rejected by unweighted Bonferroni (means are
    then all above the rejection threshold, hence positive for any usable
    alpha).  ``positive_estimate``: indices with a positive estimate.
    """
    z = np.asarray(trial1_z, dtype=float)
    if len(z) != spec.m:
        raise ValueError(f"expected {spec.m} statistics, got {len(z)}")
    if rule == "rejected_set":
        mask = mtp.bonferroni(mtp.z_to_p(z), spec)
    elif rule == "positive_estimate":
        mask = z > 0.0
    else:
        raise ValueError(f"unknown rule {rule!r}")
    idx = np.flatnonzero(mask)
    return AlternativeSet(indices=idx, means=z[idx])


def run_replication(trial1_z, trial2_z, spec: ProblemSpec,
                    cfg: SolverConfig = DEFAULT_CONFIG) -> ReplicationResult:
    """Full pipeline on a pair of trial outcomes."""
    z1 = np.asarray(trial1_z, dtype=float)
    z2 = np.asarray(trial2_z, dtype=float)
    if len(z1) != len(z2) or len(z1) != spec.m:
        raise ValueError("trial statistic vectors must both have length m")
    p1 = mtp.z_to_p(z1)
    r1 = mtp.bonferroni(p1, spec)
    alt = estimate_alt_set(z1, spec)
    report = optimal_weights(alt, spec, cfg)
    p2 = mtp.z_to_p(z2)
    r2 = mtp.weighted_bonferroni(p2, report.weights, spec)
    return ReplicationResult(
        alt_set=alt,
        weights=report.weights,
        trial1_rejections=r1,
        trial2_rejections=r2,
        overall_rejections=r1 & r2,
        trial2_adjusted_p=mtp.adjusted_p(p2, report.weights),
        solve=report,
    )


def unweighted_pos_closed_form(theta, theta2, spec: ProblemSpec):
    """Probability-of-success under two unweighted Bonferroni trials.

    Per-hypothesis rejections are independent across hypotheses and
    trials, so the marginal PoS is the product of the per-trial powers and
    the disjunctive PoS is one minus the product of marginal failures over
    the hypotheses that are truly non-null in trial 2.  Returns
    (mpos vector, dpos or None when there is no non-null hypothesis).
    """
    t1 = np.asarray(theta, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    if len(t1) != spec.m or len(t2) != spec.m:
        raise ValueError("mean vectors must have length m")
    thresh = gauss.inv_ccdf(spec.alpha / spec.m)
    mpos = gauss.ccdf(thresh - t1) * gauss.ccdf(thresh - t2)
    nonnull = t2 > 0.0
    dpos: Optional[float]
    if nonnull.any():
        dpos = float(-np.expm1(np.sum(np.log1p(-mpos[nonnull]))))
    else:
        dpos = None
    return mpos, dpos
