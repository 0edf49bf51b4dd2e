"""RankEval: score evaluation metrics by how well they rank synthetic detectors.

Each task fixes a family of score generators whose quality is known by
construction (larger ``q`` is better, smaller ``p`` is better). A metric is
applied to every model on every dataset, the models are ranked by the
metric, and the ranking is compared with the expected one using Spearman's
rho, Kendall's tau and the mean rank deviation.
"""

from __future__ import annotations

import enum
import gc
import itertools
import os
import platform
import statistics
import sys
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .asgm import AsgmSpec, Family, SynthDatasetSpec, generate_labels, generate_scores
from .core import InvalidInput
from .registry import get_metric

__all__ = [
    "Task",
    "TaskSpec",
    "MetricSpec",
    "DatasetRank",
    "RankReport",
    "LatencyRecord",
    "ACCURACY_GRID",
    "FALSE_POSITIVE_GRID",
    "SIGMA_GRID",
    "default_task",
    "expected_ranking",
    "ranks_from_values",
    "spearman",
    "kendall",
    "mean_rank_deviation",
    "run_task",
    "measure_latency",
    "summarize_latency",
    "machine_metadata",
]

ACCURACY_GRID = tuple(round(0.1 * i, 1) for i in range(1, 11))
FALSE_POSITIVE_GRID = (0.01, 0.05, 0.1, 0.3)
SIGMA_GRID = (0.0, 0.05, 0.1)


class Task(str, enum.Enum):
    ACCQ = "AccQ"
    LOWDISACCQ = "LowDisAccQ"
    PREQNEGP_Q = "PreQNegP_Q"
    PREQNEGP_P = "PreQNegP_P"

    @property
    def family(self) -> Family:
        if self is Task.ACCQ:
            return Family.ACCQ
        if self is Task.LOWDISACCQ:
            return Family.LOWDISACCQ
        return Family.PREQNEGP

    @property
    def ranked_param(self) -> str:
        return "p" if self is Task.PREQNEGP_P else "q"


@dataclass(frozen=True)
class TaskSpec:
    task: Task
    model_grid: tuple[AsgmSpec, ...]
    sigma_grid: tuple[float, ...] = SIGMA_GRID
    dataset_suite: tuple[SynthDatasetSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "model_grid", tuple(self.model_grid))
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))
        object.__setattr__(self, "dataset_suite", tuple(self.dataset_suite))


@dataclass(frozen=True)
class MetricSpec:
    """A registered metric plus the parameters to call it with.

    ``label`` distinguishes several configurations of one metric in a report.
    """

    name: str
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if not self.label:
            object.__setattr__(self, "label", self.name)

    @classmethod
    def coerce(cls, item) -> "MetricSpec":
        if isinstance(item, MetricSpec):
            return item
        if isinstance(item, str):
            return cls(item)
        if isinstance(item, dict) and "name" in item:
            extra = set(item) - {"name", "params", "label"}
            if extra:
                raise InvalidInput(f"unexpected metric keys: {sorted(extra)}")
            return cls(item["name"], dict(item.get("params") or {}), item.get("label", ""))
        raise InvalidInput(f"cannot interpret {item!r} as a metric")


@dataclass(frozen=True)
class DatasetRank:
    dataset: str
    spearman: float | None
    kendall: float | None
    mean_rank_deviation: float | None
    tie: bool
    values: tuple


@dataclass(frozen=True)
class RankReport:
    """Rank agreement of one metric on one task.

    ``sigma`` is ``None`` for the row averaged over the noise grid. Statistics
    are arithmetic means over the datasets where the metric was defined for
    every model; ``None`` when there were none.
    """

    metric_name: str
    task: Task
    sigma: float | None
    spearman: float | None
    kendall: float | None
    mean_rank_deviation: float | None
    n_datasets: int
    ties: int = 0
    per_dataset: tuple[DatasetRank, ...] = ()


@dataclass(frozen=True)
class LatencyRecord:
    metric_name: str
    ts_length: int
    segment_count: int
    wall_time: float  # milliseconds, one timed call
    repetition: int
    repetitions: int
    dataset: str = ""
    task: str = ""


def default_task(task, datasets: Sequence[SynthDatasetSpec], sigma_grid=SIGMA_GRID,
                 fixed: float | None = None, seed: int = 0) -> TaskSpec:
    """Build the standard model grid for ``task``.

    Accuracy-like parameters sweep 0.1..1.0 (ten models); the false-positive
    rate sweeps 0.01, 0.05, 0.1, 0.3. ``fixed`` is the held-constant parameter
    of the PreQNegP tasks (default p=0.05 for the q task, q=0.9 for the p task).
    """
    task = Task(task)
    fam = task.family
    if task is Task.PREQNEGP_P:
        q = 0.9 if fixed is None else fixed
        grid = [AsgmSpec(fam, q=q, p=p, seed=seed) for p in FALSE_POSITIVE_GRID]
    elif task is Task.PREQNEGP_Q:
        p = 0.05 if fixed is None else fixed
        grid = [AsgmSpec(fam, q=q, p=p, seed=seed) for q in ACCURACY_GRID]
    else:
        grid = [AsgmSpec(fam, q=q, seed=seed) for q in ACCURACY_GRID]
    return TaskSpec(task, tuple(grid), tuple(sigma_grid), tuple(datasets))


def expected_ranking(task, model_grid: Sequence[AsgmSpec]) -> list[AsgmSpec]:
    """Models ordered best first.

    >>> grid = [AsgmSpec("AccQ", q) for q in (0.2, 0.8, 0.5)]
    >>> [m.q for m in expected_ranking("AccQ", grid)]
    [0.8, 0.5, 0.2]
    """
    task = Task(task)
    models = list(model_grid)
    if not models:
        raise InvalidInput("empty model grid")
    ranked = task.ranked_param
    other = "q" if ranked == "p" else "p"
    keys = [getattr(m, ranked) for m in models]
    if len(set(keys)) != len(keys):
        raise InvalidInput(f"model grid has tied values of {ranked}: {keys}")
    if len({getattr(m, other) for m in models}) > 1:
        raise InvalidInput(f"{task.value} ranks by {ranked}; {other} must be fixed across the grid")
    if any(m.family is not task.family for m in models):
        raise InvalidInput(f"{task.value} expects {task.family.value} models")
    sign = 1.0 if ranked == "p" else -1.0
    return sorted(models, key=lambda m: sign * getattr(m, ranked))


def _expected_ranks(task, model_grid):
    order = expected_ranking(task, model_grid)
    pos = {id(m): i + 1 for i, m in enumerate(order)}
    return [pos[id(m)] for m in model_grid]


def ranks_from_values(values, higher_is_better=True):
    """Rank (1 = best) of each entry; ties broken by position. Returns ``(ranks, tied)``."""
    vals = [float(v) for v in values]
    sign = -1.0 if higher_is_better else 1.0
    order = sorted(range(len(vals)), key=lambda i: (sign * vals[i], i))
    ranks = [0] * len(vals)
    for pos, i in enumerate(order):
        ranks[i] = pos + 1
    return ranks, len(set(vals)) < len(vals)


def _check_ranks(r_star, r):
    a = np.asarray(r_star)
    b = np.asarray(r)
    if a.shape != b.shape or a.ndim != 1:
        raise InvalidInput(f"rankings differ in length: {a.size} vs {b.size}")
    n = a.size
    if n < 2:
        raise InvalidInput("rank statistics need at least two items")
    perm = np.arange(1, n + 1)
    if not (np.array_equal(np.sort(a), perm) and np.array_equal(np.sort(b), perm)):
        raise InvalidInput("rankings must be permutations of 1..n")
    return a.astype(np.int64), b.astype(np.int64)


def spearman(r_star, r) -> float:
    """``1 - 6 * sum(d^2) / (n (n^2 - 1))`` for two tie-free rankings."""
    a, b = _check_ranks(r_star, r)
    n = a.size
    d = a - b
    return float(1.0 - 6.0 * np.dot(d, d) / (n * (n * n - 1)))


def kendall(r_star, r) -> float:
    """``(C - D) / (C + D)`` over all unordered pairs."""
    a, b = _check_ranks(r_star, r)
    sa = np.sign(a[:, None] - a[None, :])
    sb = np.sign(b[:, None] - b[None, :])
    prod = np.triu(sa * sb, k=1)
    c = int(np.count_nonzero(prod > 0))
    d = int(np.count_nonzero(prod < 0))
    return (c - d) / (c + d)


def mean_rank_deviation(r_star, r) -> float:
    a, b = _check_ranks(r_star, r)
    return float(np.abs(a - b).mean())


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def _aggregate(label, task, sigma, rows: list[DatasetRank]) -> RankReport:
    ok = [r for r in rows if r.spearman is not None]
    return RankReport(
        metric_name=label,
        task=task,
        sigma=sigma,
        spearman=_mean(r.spearman for r in ok),
        kendall=_mean(r.kendall for r in ok),
        mean_rank_deviation=_mean(r.mean_rank_deviation for r in ok),
        n_datasets=len(ok),
        ties=sum(r.tie for r in ok),
        per_dataset=tuple(rows),
    )


def run_task(task_spec: TaskSpec, metrics: Iterable, coupled: bool = True) -> list[RankReport]:
    """Rank every model of ``task_spec`` with every metric.

    Returns one report per (metric, sigma) followed by one sigma-averaged
    report (``sigma=None``) per metric. A metric that fails or is undefined
    on a dataset leaves that dataset out of its aggregate.
    """
    specs = [MetricSpec.coerce(m) for m in metrics]
    if not specs:
        raise InvalidInput("no metrics given")
    entries = [get_metric(m.name) for m in specs]
    if not task_spec.dataset_suite:
        raise InvalidInput("task has an empty dataset suite")
    r_star = _expected_ranks(task_spec.task, task_spec.model_grid)

    rows = {(m.label, s): [] for m in specs for s in task_spec.sigma_grid}
    for ds in task_spec.dataset_suite:
        labels = generate_labels(ds)
        for sigma in task_spec.sigma_grid:
            scores = [
                generate_scores(replace(model, sigma=sigma), labels, ds.name, coupled=coupled)
                for model in task_spec.model_grid
            ]
            for spec, entry in zip(specs, entries):
                values = []
                for s in scores:
                    try:
                        values.append(entry(s, labels, **spec.params).value)
                    except Exception:  # a failing metric marks the cell absent
                        values.append(None)
                if any(v is None or not np.isfinite(v) for v in values):
                    rows[spec.label, sigma].append(DatasetRank(ds.name, None, None, None, False, tuple(values)))
                    continue
                r, tied = ranks_from_values(values, entry.higher_is_better)
                rows[spec.label, sigma].append(
                    DatasetRank(
                        ds.name,
                        spearman(r_star, r),
                        kendall(r_star, r),
                        mean_rank_deviation(r_star, r),
                        tied,
                        tuple(values),
                    )
                )

    reports = []
    for spec in specs:
        per_sigma = [_aggregate(spec.label, task_spec.task, s, rows[spec.label, s]) for s in task_spec.sigma_grid]
        reports.extend(per_sigma)
    for spec in specs:
        per_sigma = [r for r in reports if r.metric_name == spec.label and r.sigma is not None]
        defined = [r for r in per_sigma if r.spearman is not None]
        reports.append(
            RankReport(
                metric_name=spec.label,
                task=task_spec.task,
                sigma=None,
                spearman=_mean(r.spearman for r in defined),
                kendall=_mean(r.kendall for r in defined),
                mean_rank_deviation=_mean(r.mean_rank_deviation for r in defined),
                n_datasets=sum(r.n_datasets for r in per_sigma),
                ties=sum(r.ties for r in per_sigma),
            )
        )
    return reports


def machine_metadata() -> dict:
    try:
        import numba

        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = "absent"
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count() or 1,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "numba": numba_version,
        "kernel_backend": _kernels.BACKEND,
    }


def measure_latency(metric, dataset_suite: Sequence[SynthDatasetSpec], repetitions: int = 5,
                    model: AsgmSpec | None = None, task: str = "") -> list[LatencyRecord]:
    """Time ``metric`` on every dataset, one record per timed repetition.

    Runs sequentially in the calling thread with the garbage collector paused
    during each timed call. One untimed warm-up call per dataset absorbs JIT
    compilation and cache effects.
    """
    if repetitions < 5:
        raise InvalidInput(f"repetitions must be >= 5, got {repetitions}")
    spec = MetricSpec.coerce(metric)
    entry = get_metric(spec.name)
    model = model or AsgmSpec(Family.ACCQ, q=0.5)
    records = []
    for ds in dataset_suite:
        labels = generate_labels(ds)
        scores = generate_scores(model, labels, ds.name)
        entry(scores, labels, **spec.params)
        for i in range(repetitions):
            # as in timeit, a collector pass must not land inside the timed call
            gc_was_on = gc.isenabled()
            gc.disable()
            try:
                t0 = time.perf_counter_ns()
                entry(scores, labels, **spec.params)
                elapsed = time.perf_counter_ns() - t0
            finally:
                if gc_was_on:
                    gc.enable()
            records.append(
                LatencyRecord(
                    metric_name=spec.label,
                    ts_length=ds.ts_length,
                    segment_count=ds.segments,
                    wall_time=max(elapsed, 1) / 1e6,
                    repetition=i,
                    repetitions=repetitions,
                    dataset=ds.name,
                    task=task or model.family.value,
                )
            )
    return records


def summarize_latency(records: Iterable[LatencyRecord]) -> list[dict]:
    """Median and mean wall time per (metric, task, ts_length, segment_count)."""
    key = lambda r: (r.metric_name, r.task, r.ts_length, r.segment_count)  # noqa: E731
    out = []
    for (name, task, n, segs), group in itertools.groupby(sorted(records, key=key), key=key):
        times = [r.wall_time for r in group]
        out.append(
            {
                "metric": name,
                "task": task,
                "ts_length": n,
                "segment_count": segs,
                "median_ms": statistics.median(times),
                "mean_ms": statistics.fmean(times),
                "repetitions": len(times),
            }
        )
    return out
