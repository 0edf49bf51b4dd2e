"""Score normalization and label-to-event segmentation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "InvalidInput",
    "EventKind",
    "Event",
    "EventPartition",
    "as_scores",
    "as_labels",
    "normalize",
    "extract_events",
]


class InvalidInput(ValueError):
    """Raised for empty, mismatched, or out-of-domain inputs."""


class EventKind(enum.IntEnum):
    NORMAL = 0
    ANOMALY = 1


@dataclass(frozen=True)
class Event:
    """Half-open index interval ``[start, end)`` with a class tag."""

    start: int
    end: int
    kind: EventKind

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise InvalidInput(f"invalid event bounds [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    @property
    def is_anomaly(self):
        return self.kind is EventKind.ANOMALY


@dataclass(frozen=True)
class EventPartition:
    """Run-length segmentation of a label series.

    ``starts``/``ends``/``kinds`` hold every run in time order; ``anomalies``
    and ``normals`` are the per-class views.
    """

    starts: np.ndarray
    ends: np.ndarray
    kinds: np.ndarray
    n: int

    @property
    def anomalies(self) -> list[Event]:
        return self._events(EventKind.ANOMALY)

    @property
    def normals(self) -> list[Event]:
        return self._events(EventKind.NORMAL)

    def _events(self, kind):
        idx = np.flatnonzero(self.kinds == int(kind))
        return [Event(int(self.starts[i]), int(self.ends[i]), kind) for i in idx]

    @property
    def n_anomalies(self) -> int:
        return int(np.count_nonzero(self.kinds))

    @property
    def n_normals(self) -> int:
        return int(self.kinds.size - np.count_nonzero(self.kinds))

    def to_labels(self) -> np.ndarray:
        """Expand back to a 0/1 label array."""
        return np.repeat(self.kinds.astype(np.int8), self.ends - self.starts)


def as_scores(scores) -> np.ndarray:
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInput(f"scores must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput("scores are empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("scores contain NaN or infinite values")
    return arr


def as_labels(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise InvalidInput(f"labels must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput("labels are empty")
    bad = (arr != 0) & (arr != 1)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InvalidInput(f"labels must be 0 or 1; found {arr[i]!r} at index {i}")
    return arr.astype(np.int8)


def normalize(scores) -> np.ndarray:
    """Min-max rescale scores to [0, 1].

    A constant series carries no ranking information and maps to 0.5
    everywhere, which puts both confidence terms exactly at zero for the
    default threshold.

    >>> normalize([0, 5, 10]).tolist()
    [0.0, 0.5, 1.0]
    >>> normalize([3, 3, 3]).tolist()
    [0.5, 0.5, 0.5]
    """
    return _kernels.minmax_normalize(as_scores(scores))


def extract_events(labels) -> EventPartition:
    """Split labels into maximal runs of identical value.

    >>> p = extract_events([0, 0, 1, 1, 0])
    >>> [(e.start, e.end) for e in p.anomalies]
    [(2, 4)]
    """
    return _partition(as_labels(labels))


def _partition(y) -> EventPartition:
    # ``y`` must already be validated int8 labels
    starts, ends, kinds = _kernels.run_boundaries(y)
    return EventPartition(starts=starts, ends=ends, kinds=kinds, n=int(y.size))
