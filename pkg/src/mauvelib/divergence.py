"""Discrete probability vectors: mixtures and KL/JS divergences.

A distribution here is simply a 1-D float64 array of non-negative
entries summing to one (within ``SUM_TOL``).  :func:`as_distribution`
validates and never renormalizes; callers with unnormalized counts
should divide by the total themselves before entering this module.

All divergences are returned in nats.  ``kl(p, r)`` is ``+inf`` when
``p`` puts mass where ``r`` has none; it is never NaN.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from .errors import DimensionError, ParameterError

#: Absolute tolerance on ``sum(p) == 1`` for a valid probability vector.
SUM_TOL = 1e-9

DiscreteDistribution = npt.NDArray[np.float64]


def as_distribution(values: npt.ArrayLike) -> DiscreteDistribution:
    """Validate ``values`` as a probability vector and return it as float64.

    Raises
    ------
    ParameterError
        If the vector is empty, not 1-D, has negative or non-finite
        entries, or does not sum to 1 within ``SUM_TOL``.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ParameterError("a distribution must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ParameterError("distribution entries must be finite")
    if np.any(arr < 0.0):
        raise ParameterError("distribution entries must be non-negative")
    total = float(arr.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ParameterError(
            f"distribution sums to {total!r}; expected 1 within {SUM_TOL}"
        )
    return arr


def check_weight(lam: float) -> float:
    """Validate a mixture weight, which must lie in the closed unit interval."""
    lam = float(lam)
    if math.isnan(lam) or not 0.0 <= lam <= 1.0:
        raise ParameterError(f"mixture weight must be in [0, 1], got {lam!r}")
    return lam


def _common_support(p: npt.ArrayLike, q: npt.ArrayLike) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    p = as_distribution(p)
    q = as_distribution(q)
    if p.shape != q.shape:
        raise DimensionError(
            f"distributions have mismatched support sizes {p.size} and {q.size}"
        )
    return p, q


def mixture(p: npt.ArrayLike, q: npt.ArrayLike, lam: float) -> DiscreteDistribution:
    """Return the convex combination ``lam * p + (1 - lam) * q``.

    Both inputs must be valid distributions over the same support; the
    result is again a valid distribution (exactly, up to float rounding).
    """
    p, q = _common_support(p, q)
    lam = check_weight(lam)
    return lam * p + (1.0 - lam) * q


def kl(p: npt.ArrayLike, r: npt.ArrayLike) -> float:
    """Kullback-Leibler divergence ``KL(p || r)`` in nats.

    Terms with ``p[i] == 0`` contribute nothing regardless of ``r[i]``.
    If ``p`` has mass on a point where ``r`` is zero the divergence is
    ``+inf`` (an exact float, never NaN).  The result is clamped to be
    non-negative against rounding noise when ``p == r``.
    """
    p, r = _common_support(p, r)
    support = p > 0.0
    if np.any(r[support] == 0.0):
        return math.inf
    ps = p[support]
    value = float(np.sum(ps * (np.log(ps) - np.log(r[support]))))
    return max(value, 0.0)


def js(p: npt.ArrayLike, q: npt.ArrayLike) -> float:
    """Jensen-Shannon divergence in nats: the mean KL to the midpoint mixture.

    Always finite, symmetric, and bounded by ``ln 2`` (attained when the
    supports are disjoint).
    """
    p, q = _common_support(p, q)
    mid = 0.5 * p + 0.5 * q
    return 0.5 * kl(p, mid) + 0.5 * kl(q, mid)
