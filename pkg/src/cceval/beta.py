"""Method-of-moments Beta fits and the per-event uncertainty derived from them."""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from . import _kernels

from .core import Event, InvalidInput, as_scores

__all__ = [
    "MAX_UNCERTAINTY",
    "MomentStats",
    "BetaFit",
    "moments",
    "fit_beta",
    "event_uncertainty",
    "uncertainty_from_moments",
]

MAX_UNCERTAINTY = 0.25


@dataclass(frozen=True)
class MomentStats:
    mean: float
    m2: float
    count: int


@dataclass(frozen=True)
class BetaFit:
    """Fitted shapes, or ``None`` for both when moment matching is impossible.

    ``uncertainty`` is defined either way; ``fallback`` tells the two cases
    apart.
    """

    alpha: float | None
    beta: float | None
    uncertainty: float

    @property
    def fallback(self) -> bool:
        return self.alpha is None

    @property
    def fittable(self) -> bool:
        return self.alpha is not None


def moments(segment) -> MomentStats:
    """Mean and population (divide-by-n) second central moment."""
    x = np.asarray(segment, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInput("moments() needs a non-empty 1-d segment")
    mean = float(x.mean())
    d = x - mean
    return MomentStats(mean=mean, m2=float(np.dot(d, d) / x.size), count=int(x.size))


def fit_beta(stats: MomentStats) -> BetaFit:
    """Match a Beta distribution's mean and variance to ``stats``.

    Moment matching needs ``0 < m2 < mean * (1 - mean)``. Outside that
    region there is no Beta with those moments; the uncertainty then falls
    back to the sample variance clamped to 1/4, which is what the fitted
    variance would have been on the fittable side of the boundary.

    >>> f = fit_beta(MomentStats(mean=0.5, m2=0.05, count=4))
    >>> round(f.alpha, 12), round(f.beta, 12), round(f.uncertainty, 12)
    (2.0, 2.0, 0.05)
    """
    mean, m2 = stats.mean, stats.m2
    spread = mean * (1.0 - mean)
    if m2 <= 0.0:
        return BetaFit(None, None, 0.0)
    if m2 >= spread:
        return BetaFit(None, None, min(m2, MAX_UNCERTAINTY))
    common = spread / m2 - 1.0
    if not math.isfinite(common):
        # subnormal m2: shape parameters overflow, the variance is m2 itself
        return BetaFit(None, None, m2)
    a = mean * common
    b = (1.0 - mean) * common
    total = a + b
    # alpha*beta / (total^2 (total+1)), arranged so huge shapes cannot overflow
    u = (a / total) * (b / total) / (total + 1.0)
    return BetaFit(a, b, u)


def uncertainty_from_moments(means, m2):
    """Vectorised ``fit_beta(...).uncertainty`` over arrays of moments.

    Returns ``(uncertainty, fallback_mask)``.
    """
    return _kernels.beta_uncertainty(means, m2)


def event_uncertainty(scores, event: Event) -> float:
    s = as_scores(scores)
    if event.end > s.size:
        raise InvalidInput(f"event [{event.start}, {event.end}) exceeds series length {s.size}")
    return fit_beta(moments(s[event.start:event.end])).uncertainty
