"""Confidence-consistency evaluation (CCE) for time-series anomaly detection."""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .asgm import AsgmSpec, Family, SynthDatasetSpec, dataset_from_name, generate_labels, generate_scores  # noqa: E402
from .baselines import MetricValue, auc_roc, f1, f1_pa, reduced_f1  # noqa: E402
from .beta import BetaFit, MomentStats, event_uncertainty, fit_beta, moments  # noqa: E402
from .core import Event, EventKind, EventPartition, InvalidInput, extract_events, normalize  # noqa: E402
from .metric import (  # noqa: E402
    CceBreakdown,
    CceConfig,
    Mode,
    anomaly_confidence,
    cce,
    consistency,
    event_level_score,
    global_score,
    normal_confidence,
)
from .rankeval import (  # noqa: E402
    RankReport,
    Task,
    TaskSpec,
    expected_ranking,
    kendall,
    mean_rank_deviation,
    run_task,
    spearman,
)
from .registry import available_metrics, evaluate, register_metric  # noqa: E402

__all__ = [
    "BACKEND",
    "AsgmSpec",
    "Family",
    "SynthDatasetSpec",
    "dataset_from_name",
    "generate_labels",
    "generate_scores",
    "MetricValue",
    "auc_roc",
    "f1",
    "f1_pa",
    "reduced_f1",
    "BetaFit",
    "MomentStats",
    "event_uncertainty",
    "fit_beta",
    "moments",
    "Event",
    "EventKind",
    "EventPartition",
    "InvalidInput",
    "extract_events",
    "normalize",
    "CceBreakdown",
    "CceConfig",
    "Mode",
    "anomaly_confidence",
    "cce",
    "consistency",
    "event_level_score",
    "global_score",
    "normal_confidence",
    "RankReport",
    "Task",
    "TaskSpec",
    "expected_ranking",
    "kendall",
    "mean_rank_deviation",
    "run_task",
    "spearman",
    "available_metrics",
    "evaluate",
    "register_metric",
]
