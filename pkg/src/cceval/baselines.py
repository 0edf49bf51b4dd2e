"""Point-wise and event-adjusted comparison metrics.

All thresholded metrics predict ``score >= threshold``. ``threshold`` is a
float, or ``"best"`` to report the maximum over every distinct score value
(the oracle-threshold convention common in TSAD benchmarks).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from . import _kernels
from .core import InvalidInput, as_labels, as_scores

__all__ = [
    "MetricValue",
    "f1",
    "f1_pa",
    "reduced_f1",
    "auc_roc",
    "prf",
]


@dataclass(frozen=True)
class MetricValue:
    """A metric result. ``value`` is ``None`` when the metric is undefined."""

    name: str
    value: float | None
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict, compare=False)

    @property
    def defined(self) -> bool:
        return self.value is not None


def prf(tp, fp, fn):
    """Precision, recall and F1 from counts; every ratio with a zero denominator is 0."""
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return float(precision), float(recall), float(f)


def _pair(scores, labels):
    s = as_scores(scores)
    y = as_labels(labels)
    if s.size != y.size:
        raise InvalidInput(f"length mismatch: {s.size} scores vs {y.size} labels")
    return s, y


def _anomaly_runs(y):
    starts, ends, kinds = _kernels.run_boundaries(y)
    keep = kinds == 1
    return starts[keep], ends[keep]


def _run_peaks(s, starts, ends):
    """Maximum score inside each half-open run ``[start, end)``."""
    if starts.size == 0:
        return np.empty(0)
    padded = np.append(s, -np.inf)  # reduceat indices must stay in range
    bounds = np.column_stack([starts, ends]).ravel()
    return np.maximum.reduceat(padded, bounds)[::2]


def _best_f1(pos_scores, pos_weights, neg_scores):
    """Max F1 over thresholds when each positive unit carries a TP weight.

    Positive units count ``weight`` towards TP when flagged and FN otherwise;
    negative points count one FP each when flagged.
    """
    total_pos = float(pos_weights.sum())
    if total_pos == 0:
        return 0.0, None
    scores = np.concatenate([pos_scores, neg_scores])
    tp_w = np.concatenate([pos_weights, np.zeros(neg_scores.size)])
    fp_w = np.concatenate([np.zeros(pos_scores.size), np.ones(neg_scores.size)])
    order = np.argsort(-scores, kind="stable")
    scores, tp_w, fp_w = scores[order], tp_w[order], fp_w[order]
    tp = np.cumsum(tp_w)
    fp = np.cumsum(fp_w)
    # only the last index of each run of equal scores is a realisable cut
    last = np.r_[scores[1:] != scores[:-1], True]
    tp, fp, cut = tp[last], fp[last], scores[last]
    denom = 2 * tp + fp + (total_pos - tp)
    f = np.where(denom > 0, 2 * tp / np.where(denom > 0, denom, 1), 0.0)
    i = int(np.argmax(f))
    return float(f[i]), float(cut[i])


def f1(scores, labels, threshold=0.5) -> MetricValue:
    """Point-wise F1 of ``scores >= threshold`` against ``labels``."""
    s, y = _pair(scores, labels)
    truth = y.astype(bool)
    if threshold == "best":
        value, cut = _best_f1(s[truth], np.ones(int(truth.sum())), s[~truth])
        return MetricValue("F1", value, {"threshold": "best"}, {"cut": cut})
    pred = s >= threshold
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    p, r, f = prf(tp, fp, fn)
    return MetricValue("F1", f, {"threshold": threshold}, {"precision": p, "recall": r})


def f1_pa(scores, labels, threshold=0.5) -> MetricValue:
    """F1 after point adjustment.

    Any flagged point inside a true anomaly run marks the whole run as
    detected before point-wise counting.
    """
    s, y = _pair(scores, labels)
    truth = y.astype(bool)
    if threshold == "best":
        starts, ends = _anomaly_runs(y)
        peaks = _run_peaks(s, starts, ends)
        value, cut = _best_f1(peaks, (ends - starts).astype(float), s[~truth])
        return MetricValue("F1-PA", value, {"threshold": "best"}, {"cut": cut})
    adjusted, _, _ = _kernels.point_adjust(s >= threshold, y)
    tp = int(np.count_nonzero(adjusted & truth))
    fp = int(np.count_nonzero(adjusted & ~truth))
    fn = int(np.count_nonzero(~adjusted & truth))
    p, r, f = prf(tp, fp, fn)
    return MetricValue("F1-PA", f, {"threshold": threshold}, {"precision": p, "recall": r})


def reduced_f1(scores, labels, threshold=0.5) -> MetricValue:
    """F1 with each true anomaly run counted once.

    A detected run is one TP, a missed run one FN; false positives are still
    counted per normal point.
    """
    s, y = _pair(scores, labels)
    truth = y.astype(bool)
    if threshold == "best":
        starts, ends = _anomaly_runs(y)
        peaks = _run_peaks(s, starts, ends)
        value, cut = _best_f1(peaks, np.ones(peaks.size), s[~truth])
        return MetricValue("Reduced-F1", value, {"threshold": "best"}, {"cut": cut})
    pred = s >= threshold
    _, hits, events = _kernels.point_adjust(pred, y)
    fp = int(np.count_nonzero(pred & ~truth))
    p, r, f = prf(hits, fp, events - hits)
    return MetricValue("Reduced-F1", f, {"threshold": threshold}, {"precision": p, "recall": r})


def auc_roc(scores, labels) -> MetricValue:
    """Probability that a random anomaly point outscores a random normal one.

    Ties count one half. Undefined (``value=None``) unless both classes occur.
    """
    s, y = _pair(scores, labels)
    n_pos = int(np.count_nonzero(y))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return MetricValue("AUC-ROC", None, {}, {"reason": "single-class labels"})
    ranks = rankdata(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return MetricValue("AUC-ROC", float(u / (n_pos * n_neg)))
