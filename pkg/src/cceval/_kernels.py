"""Hot inner loops, each with a numba kernel and a pure-numpy twin.

The numba path is used when numba imports cleanly and the environment
variable ``CCEVAL_DISABLE_NUMBA`` is unset (or ``0``). Both paths are always
importable as ``<name>_numba`` / ``<name>_numpy`` so they can be compared
directly; the unsuffixed name is the selected backend.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "run_boundaries",
    "minmax_normalize",
    "segment_moments",
    "class_moments",
    "beta_uncertainty",
    "point_adjust",
]


def _numba_requested():
    flag = os.environ.get("CCEVAL_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    NUMBA_AVAILABLE = False


def _njit(func):
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# ---------------------------------------------------------------------------
# run-length segmentation


def run_boundaries_numpy(labels):
    """Start/end (half-open) and value of every maximal run in ``labels``."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    change = np.flatnonzero(labels[1:] != labels[:-1]) + 1
    starts = np.concatenate(([0], change)).astype(np.int64)
    ends = np.concatenate((change, [n])).astype(np.int64)
    return starts, ends, labels[starts].astype(np.int8)


@_njit
def _run_boundaries_loop(labels):
    n = labels.shape[0]
    count = 1
    for i in range(1, n):
        if labels[i] != labels[i - 1]:
            count += 1
    starts = np.empty(count, dtype=np.int64)
    ends = np.empty(count, dtype=np.int64)
    kinds = np.empty(count, dtype=np.int8)
    j = 0
    starts[0] = 0
    kinds[0] = labels[0]
    for i in range(1, n):
        if labels[i] != labels[i - 1]:
            ends[j] = i
            j += 1
            starts[j] = i
            kinds[j] = labels[i]
    ends[j] = n
    return starts, ends, kinds


def run_boundaries_numba(labels):
    return _run_boundaries_loop(np.ascontiguousarray(labels, dtype=np.int8))


# ---------------------------------------------------------------------------
# min-max rescaling; a constant series maps to 0.5


def minmax_normalize_numpy(scores):
    s = np.asarray(scores, dtype=np.float64)
    lo = s.min()
    hi = s.max()
    if hi == lo:
        return np.full_like(s, 0.5)
    out = (s - lo) / (hi - lo)
    # guard the endpoints against rounding past [0, 1]
    np.clip(out, 0.0, 1.0, out=out)
    return out


@_njit
def _minmax_loop(s):
    n = s.shape[0]
    lo = s[0]
    hi = s[0]
    for i in range(1, n):
        x = s[i]
        if x < lo:
            lo = x
        elif x > hi:
            hi = x
    out = np.empty(n, dtype=np.float64)
    if hi == lo:
        out[:] = 0.5
        return out
    span = hi - lo
    for i in range(n):
        v = (s[i] - lo) / span
        out[i] = 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)
    return out


def minmax_normalize_numba(scores):
    return _minmax_loop(np.ascontiguousarray(scores, dtype=np.float64))


# ---------------------------------------------------------------------------
# per-segment mean and population second central moment


def segment_moments_numpy(scores, starts, ends):
    scores = np.asarray(scores, dtype=np.float64)
    lengths = (ends - starts).astype(np.float64)
    means = np.add.reduceat(scores, starts) / lengths
    # two-pass: deviations from the segment mean, not E[x^2] - E[x]^2
    dev = scores - np.repeat(means, (ends - starts))
    m2 = np.add.reduceat(dev * dev, starts) / lengths
    return means, m2


@_njit
def _segment_moments_loop(scores, starts, ends):
    k = starts.shape[0]
    means = np.empty(k, dtype=np.float64)
    m2 = np.empty(k, dtype=np.float64)
    for e in range(k):
        a = starts[e]
        b = ends[e]
        total = 0.0
        for i in range(a, b):
            total += scores[i]
        mu = total / (b - a)
        acc = 0.0
        for i in range(a, b):
            d = scores[i] - mu
            acc += d * d
        means[e] = mu
        m2[e] = acc / (b - a)
    return means, m2


def segment_moments_numba(scores, starts, ends):
    return _segment_moments_loop(
        np.ascontiguousarray(scores, dtype=np.float64),
        np.ascontiguousarray(starts, dtype=np.int64),
        np.ascontiguousarray(ends, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# pooled mean, second central moment and count per label class (index 0 and 1)


def class_moments_numpy(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    mask = np.asarray(labels) == 1
    counts = np.array([scores.size - np.count_nonzero(mask), np.count_nonzero(mask)], dtype=np.int64)
    means = np.zeros(2)
    m2 = np.zeros(2)
    for c, pool in enumerate((scores[~mask], scores[mask])):
        if pool.size:
            means[c] = pool.mean()
            dev = pool - means[c]
            m2[c] = np.dot(dev, dev) / pool.size
    return means, m2, counts


@_njit
def _class_moments_loop(scores, labels):
    # scalar accumulators keep both passes in registers
    n = scores.shape[0]
    total = 0.0
    s1 = 0.0
    c1 = 0
    for i in range(n):
        x = scores[i]
        total += x
        if labels[i] == 1:
            s1 += x
            c1 += 1
    c0 = n - c1
    mu0 = (total - s1) / c0 if c0 > 0 else 0.0
    mu1 = s1 / c1 if c1 > 0 else 0.0
    acc0 = 0.0
    acc1 = 0.0
    for i in range(n):
        if labels[i] == 1:
            d = scores[i] - mu1
            acc1 += d * d
        else:
            d = scores[i] - mu0
            acc0 += d * d
    means = np.array([mu0, mu1])
    m2 = np.array([acc0 / c0 if c0 > 0 else 0.0, acc1 / c1 if c1 > 0 else 0.0])
    return means, m2, np.array([c0, c1], dtype=np.int64)


def class_moments_numba(scores, labels):
    return _class_moments_loop(
        np.ascontiguousarray(scores, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int8),
    )


# ---------------------------------------------------------------------------
# method-of-moments Beta variance per (mean, m2) pair, with the 1/4-capped
# second moment as fallback where no valid fit exists


def beta_uncertainty_numpy(means, m2):
    means = np.asarray(means, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    spread = means * (1.0 - means)
    ok = (m2 > 0.0) & (m2 < spread)
    with np.errstate(over="ignore", divide="ignore"):
        ok &= np.isfinite(spread / np.where(ok, m2, 1.0))
    u = np.minimum(np.maximum(m2, 0.0), 0.25)
    if np.any(ok):
        mo, so = means[ok], spread[ok]
        common = so / m2[ok] - 1.0
        a = mo * common
        b = (1.0 - mo) * common
        total = a + b
        # alpha*beta / (total^2 (total+1)), arranged so huge shapes cannot overflow
        u[ok] = (a / total) * (b / total) / (total + 1.0)
    return u, ~ok


@_njit
def _beta_uncertainty_loop(means, m2):
    k = means.shape[0]
    u = np.empty(k, dtype=np.float64)
    fallback = np.empty(k, dtype=np.bool_)
    for i in range(k):
        mu = means[i]
        v = m2[i]
        spread = mu * (1.0 - mu)
        common = spread / v - 1.0 if v > 0.0 else np.inf
        if v > 0.0 and v < spread and np.isfinite(common):
            a = mu * common
            b = (1.0 - mu) * common
            total = a + b
            u[i] = (a / total) * (b / total) / (total + 1.0)
            fallback[i] = False
        else:
            u[i] = min(max(v, 0.0), 0.25)
            fallback[i] = True
    return u, fallback


def beta_uncertainty_numba(means, m2):
    return _beta_uncertainty_loop(
        np.ascontiguousarray(means, dtype=np.float64),
        np.ascontiguousarray(m2, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# point adjustment: a hit anywhere inside a true anomaly run flags the run


def point_adjust_numpy(pred, labels):
    pred = np.asarray(pred, dtype=bool)
    labels = np.asarray(labels)
    starts, ends, kinds = run_boundaries_numpy(labels)
    hit = np.logical_or.reduceat(pred, starts) & (kinds == 1)
    adjusted = pred | np.repeat(hit, ends - starts)
    return adjusted, int(hit.sum()), int((kinds == 1).sum())


@_njit
def _point_adjust_loop(pred, labels):
    n = pred.shape[0]
    out = pred.copy()
    hits = 0
    events = 0
    i = 0
    while i < n:
        if labels[i] != 1:
            i += 1
            continue
        j = i
        found = False
        while j < n and labels[j] == 1:
            if pred[j]:
                found = True
            j += 1
        events += 1
        if found:
            hits += 1
            for k in range(i, j):
                out[k] = True
        i = j
    return out, hits, events


def point_adjust_numba(pred, labels):
    return _point_adjust_loop(
        np.ascontiguousarray(pred, dtype=np.bool_),
        np.ascontiguousarray(labels, dtype=np.int8),
    )


if NUMBA_AVAILABLE and _numba_requested():
    BACKEND = "numba"
    run_boundaries = run_boundaries_numba
    minmax_normalize = minmax_normalize_numba
    segment_moments = segment_moments_numba
    class_moments = class_moments_numba
    beta_uncertainty = beta_uncertainty_numba
    point_adjust = point_adjust_numba
else:
    BACKEND = "numpy"
    run_boundaries = run_boundaries_numpy
    minmax_normalize = minmax_normalize_numpy
    segment_moments = segment_moments_numpy
    class_moments = class_moments_numpy
    beta_uncertainty = beta_uncertainty_numpy
    point_adjust = point_adjust_numpy
