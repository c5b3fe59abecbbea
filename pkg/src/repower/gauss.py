"""Standard-normal kernel: pdf, cdf, complementary cdf, quantile, log-cdf.

All probability arithmetic in the package routes through these functions.
The cdf/ccdf are erfc-based (via scipy.special.ndtr) so tail values retain
full relative precision; the objective code multiplies factors that approach
1, which would lose precision with a naive ``1 - cdf``.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Clamp bounds for probabilities handed to the quantile: callers treat
# weight 0 specially, anything else must stay inside the open unit interval.
P_FLOOR = 1e-300
P_CEIL = 1.0 - 1e-16


def phi(z):
    """Standard normal density."""
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / _SQRT_2PI
    return out if out.ndim else float(out)


def cdf(z):
    """Standard normal cdf."""
    out = special.ndtr(np.asarray(z, dtype=float))
    return out if out.ndim else float(out)


def ccdf(z):
    """Upper-tail probability, computed without cancellation."""
    out = special.ndtr(-np.asarray(z, dtype=float))
    return out if out.ndim else float(out)


def log_cdf(z):
    """log of the standard normal cdf, accurate in both tails."""
    out = special.log_ndtr(np.asarray(z, dtype=float))
    return out if out.ndim else float(out)


def inv_ccdf(p):
    """Upper-tail quantile: the z with ccdf(z) == p.

    Raises ValueError outside the open interval (0, 1); weighted-test
    callers short-circuit weight 0 before getting here.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("inv_ccdf requires 0 < p < 1")
    out = -special.ndtri(p)
    return out if out.ndim else float(out)


def inv_ccdf_clamped(p):
    """inv_ccdf with the argument clamped into (0, 1).

    Used where p = w * alpha may round to 0 or 1 in floating point.
    """
    p = np.clip(np.asarray(p, dtype=float), P_FLOOR, P_CEIL)
    out = -special.ndtri(p)
    return out if out.ndim else float(out)
