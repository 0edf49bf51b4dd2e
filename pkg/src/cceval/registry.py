"""Uniform ``(scores, labels, **params) -> MetricValue`` access to every metric.

Built-in entries normalize scores first, so thresholds apply on [0, 1].
External metrics can be added with :func:`register_metric`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import baselines
from .baselines import MetricValue
from .core import InvalidInput, normalize
from .metric import CceConfig, cce

__all__ = [
    "MetricEntry",
    "register_metric",
    "unregister_metric",
    "get_metric",
    "available_metrics",
    "evaluate",
]


@dataclass(frozen=True)
class MetricEntry:
    name: str
    func: Callable[..., MetricValue]
    higher_is_better: bool = True
    defaults: dict | None = None

    def __call__(self, scores, labels, **params) -> MetricValue:
        merged = dict(self.defaults or {})
        merged.update(params)
        out = self.func(scores, labels, **merged)
        if not isinstance(out, MetricValue):
            out = MetricValue(self.name, None if out is None else float(out), merged)
        return out


_REGISTRY: dict[str, MetricEntry] = {}


def register_metric(name, func, higher_is_better=True, defaults=None, replace=False):
    """Add a metric. ``func`` may return a MetricValue or a bare float."""
    if name in _REGISTRY and not replace:
        raise InvalidInput(f"metric {name!r} already registered")
    _REGISTRY[name] = MetricEntry(name, func, higher_is_better, defaults)
    return _REGISTRY[name]


def unregister_metric(name):
    _REGISTRY.pop(name, None)


def get_metric(name) -> MetricEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InvalidInput(
            f"unknown metric {name!r}; registered: {', '.join(available_metrics())}"
        ) from None


def available_metrics() -> list[str]:
    return sorted(_REGISTRY)


def evaluate(name, scores, labels, **params) -> MetricValue:
    return get_metric(name)(scores, labels, **params)


def _cce_entry(scores, labels, tau=0.5, alpha=0.5, eta=0.5, mode="relaxed"):
    config = CceConfig(tau=tau, anomaly_event_weight=alpha, global_anomaly_weight=eta, mode=mode)
    b = cce(scores, labels, config)
    return MetricValue(
        "CCE",
        b.s_cce,
        {"tau": tau, "alpha": alpha, "eta": eta, "mode": config.mode.value},
        {
            "s_event": b.s_event,
            "s_global": b.s_global,
            "s_anom_global": b.s_anom_global,
            "s_norm_global": b.s_norm_global,
            "fallback_events": b.fallback_events,
            "single_class": b.single_class,
        },
    )


def _normalized(func):
    def run(scores, labels, **params):
        return func(normalize(scores), labels, **params)

    run.__name__ = func.__name__
    return run


register_metric("CCE", _cce_entry)
register_metric("AUC-ROC", _normalized(baselines.auc_roc))
register_metric("F1", _normalized(baselines.f1), defaults={"threshold": 0.5})
register_metric("F1-PA", _normalized(baselines.f1_pa), defaults={"threshold": 0.5})
register_metric("Reduced-F1", _normalized(baselines.reduced_f1), defaults={"threshold": 0.5})
