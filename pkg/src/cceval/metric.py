"""Confidence-consistency evaluation (CCE) of an anomaly-score series.

Every event gets a confidence (how far its mean score sits on the correct
side of the threshold) and a consistency ``exp(-U)`` (how stable the scores
are inside it, via the Beta-fit uncertainty ``U``). Their products are
averaged per class into an event-level score; the same product over the
pooled anomaly and pooled normal points gives a global score; CCE is the sum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .beta import fit_beta, moments, uncertainty_from_moments
from .core import (
    Event,
    EventKind,
    EventPartition,
    InvalidInput,
    as_labels,
    as_scores,
    _partition,
    extract_events,
    normalize,
)

__all__ = [
    "Mode",
    "CceConfig",
    "CceBreakdown",
    "anomaly_confidence",
    "normal_confidence",
    "consistency",
    "event_level_score",
    "global_score",
    "cce",
]


class Mode(str, enum.Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


@dataclass(frozen=True)
class CceConfig:
    """CCE hyperparameters.

    ``normalize=False`` skips the min-max step and requires scores already in
    [0, 1]; it exists for perturbation analysis, not for normal use.
    """

    tau: float = 0.5
    anomaly_event_weight: float = 0.5
    global_anomaly_weight: float = 0.5
    mode: Mode = Mode.RELAXED
    normalize: bool = True

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise InvalidInput(f"tau must lie in (0, 1), got {self.tau}")
        for name in ("anomaly_event_weight", "global_anomaly_weight"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise InvalidInput(f"{name} must lie in [0, 1], got {w}")
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def strict(self) -> bool:
        return self.mode is Mode.STRICT


@dataclass(frozen=True)
class CceBreakdown:
    s_event: float
    s_anom_global: float
    s_norm_global: float
    s_global: float
    s_cce: float
    fallback_events: int
    single_class: bool
    partition: EventPartition = field(repr=False)
    confidence: np.ndarray = field(repr=False)
    consistency: np.ndarray = field(repr=False)
    uncertainty: np.ndarray = field(repr=False)
    global_consistency: tuple = field(repr=False, default=(1.0, 1.0))

    @property
    def per_event_scores(self) -> list[tuple[Event, float, float, float]]:
        """``(event, confidence, consistency, product)`` in time order."""
        p = self.partition
        return [
            (
                Event(int(a), int(b), EventKind(int(k))),
                float(c),
                float(w),
                float(c * w),
            )
            for a, b, k, c, w in zip(p.starts, p.ends, p.kinds, self.confidence, self.consistency)
        ]


_POOL_KINDS = np.array([False, True])  # normal pool, then anomaly pool


def _confidence(means, is_anomaly, tau, strict):
    conf = np.where(is_anomaly, means - tau, 1.0 - tau - means)
    if strict:
        conf = np.maximum(conf, 0.0)
    return conf


def _check_event(s, event, kind=None):
    if event.end > s.size:
        raise InvalidInput(f"event [{event.start}, {event.end}) exceeds series length {s.size}")
    if kind is not None and event.kind is not kind:
        raise InvalidInput(f"expected a {kind.name.lower()} event, got {event.kind.name.lower()}")


def anomaly_confidence(scores, event: Event, tau: float = 0.5, mode=Mode.RELAXED) -> float:
    s = as_scores(scores)
    _check_event(s, event, EventKind.ANOMALY)
    conf = float(s[event.start:event.end].mean()) - tau
    return max(conf, 0.0) if Mode(mode) is Mode.STRICT else conf


def normal_confidence(scores, event: Event, tau: float = 0.5, mode=Mode.RELAXED) -> float:
    s = as_scores(scores)
    _check_event(s, event, EventKind.NORMAL)
    conf = 1.0 - tau - float(s[event.start:event.end].mean())
    return max(conf, 0.0) if Mode(mode) is Mode.STRICT else conf


def consistency(scores, event: Event) -> float:
    s = as_scores(scores)
    _check_event(s, event)
    return float(np.exp(-fit_beta(moments(s[event.start:event.end])).uncertainty))


def _weighted(anom, norm, weight, has_anom, has_norm):
    # an absent class hands its weight to the present one
    if has_anom and has_norm:
        return weight * anom + (1.0 - weight) * norm
    if has_anom:
        return anom
    return norm


def _event_terms(s, partition, config):
    means, m2 = _kernels.segment_moments(s, partition.starts, partition.ends)
    u, fallback = uncertainty_from_moments(means, m2)
    is_anom = partition.kinds.astype(bool)
    conf = _confidence(means, is_anom, config.tau, config.strict)
    cons = np.exp(-u)
    return conf, cons, u, is_anom, int(np.count_nonzero(fallback))


def event_level_score(scores, partition: EventPartition, config: CceConfig = CceConfig()):
    """Return ``(s_event, per_event)`` where per_event is ``(confidence, consistency)`` arrays.

    ``scores`` are used as given; normalize them first.
    """
    s = as_scores(scores)
    if partition.starts.size == 0:
        raise InvalidInput("empty event partition")
    if partition.n != s.size:
        raise InvalidInput(f"partition covers {partition.n} points but scores have {s.size}")
    conf, cons, _, is_anom, _ = _event_terms(s, partition, config)
    return _combine_events(conf * cons, is_anom, config), (conf, cons)


def _combine_events(prod, is_anom, config):
    has_anom = bool(is_anom.any())
    has_norm = bool((~is_anom).any())
    anom = float(prod[is_anom].mean()) if has_anom else 0.0
    norm = float(prod[~is_anom].mean()) if has_norm else 0.0
    return _weighted(anom, norm, config.anomaly_event_weight, has_anom, has_norm)


def _global_terms(s, y, config):
    means, m2, counts = _kernels.class_moments(s, y)
    u, _ = uncertainty_from_moments(means, m2)
    cons = np.exp(-u)
    conf = _confidence(means, np.array([False, True]), config.tau, config.strict)
    has_norm, has_anom = bool(counts[0]), bool(counts[1])
    anom = float(conf[1] * cons[1]) if has_anom else 0.0
    norm = float(conf[0] * cons[0]) if has_norm else 0.0
    anom_cons = float(cons[1]) if has_anom else 1.0
    norm_cons = float(cons[0]) if has_norm else 1.0
    return anom, norm, anom_cons, norm_cons, has_anom, has_norm


def global_score(scores, partition: EventPartition, config: CceConfig = CceConfig()):
    """Return ``(s_global, s_anom_global, s_norm_global)``."""
    s = as_scores(scores)
    if partition.n != s.size:
        raise InvalidInput(f"partition covers {partition.n} points but scores have {s.size}")
    anom, norm, _, _, has_anom, has_norm = _global_terms(s, partition.to_labels(), config)
    return _weighted(anom, norm, config.global_anomaly_weight, has_anom, has_norm), anom, norm


def cce(scores, labels, config: CceConfig | None = None) -> CceBreakdown:
    """Score an anomaly-score series against binary labels.

    >>> cce([0.0, 1.0, 1.0, 0.0], [0, 1, 1, 0]).s_cce
    1.0
    """
    config = config or CceConfig()
    raw = as_scores(scores)
    y = as_labels(labels)
    if raw.size != y.size:
        raise InvalidInput(f"length mismatch: {raw.size} scores vs {y.size} labels")
    if config.normalize:
        s = _kernels.minmax_normalize(raw)
    else:
        if raw.min() < 0.0 or raw.max() > 1.0:
            raise InvalidInput("normalize=False requires scores already in [0, 1]")
        s = raw

    partition = _partition(y)
    k = partition.starts.size
    # the k events and the two pooled classes are scored as one batch
    seg_means, seg_m2 = _kernels.segment_moments(s, partition.starts, partition.ends)
    pool_means, pool_m2, counts = _kernels.class_moments(s, y)
    means = np.concatenate((seg_means, pool_means))
    u, fallback = uncertainty_from_moments(means, np.concatenate((seg_m2, pool_m2)))
    is_anom = np.concatenate((partition.kinds.astype(bool), _POOL_KINDS))
    conf_all = _confidence(means, is_anom, config.tau, config.strict)
    cons_all = np.exp(-u)
    prod = conf_all * cons_all

    has_norm, has_anom = bool(counts[0]), bool(counts[1])
    ev_anom = is_anom[:k]
    n_anom_events = int(np.count_nonzero(ev_anom))
    anom_e = float(np.dot(prod[:k], ev_anom)) / n_anom_events if has_anom else 0.0
    norm_e = float(np.dot(prod[:k], ~ev_anom)) / (k - n_anom_events) if has_norm else 0.0
    s_event = float(_weighted(anom_e, norm_e, config.anomaly_event_weight, has_anom, has_norm))
    anom_g = float(prod[k + 1]) if has_anom else 0.0
    norm_g = float(prod[k]) if has_norm else 0.0
    s_global = float(_weighted(anom_g, norm_g, config.global_anomaly_weight, has_anom, has_norm))
    anom_cons = float(cons_all[k + 1]) if has_anom else 1.0
    norm_cons = float(cons_all[k]) if has_norm else 1.0
    conf, cons, u = conf_all[:k], cons_all[:k], u[:k]
    n_fallback = int(np.count_nonzero(fallback[:k]))

    return CceBreakdown(
        s_event=s_event,
        s_anom_global=anom_g,
        s_norm_global=norm_g,
        s_global=s_global,
        s_cce=s_event + s_global,
        fallback_events=n_fallback,
        single_class=not (has_anom and has_norm),
        partition=partition,
        confidence=conf,
        consistency=cons,
        uncertainty=u,
        global_consistency=(anom_cons, norm_cons),
    )
