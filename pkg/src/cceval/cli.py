"""Command-line entry point: ``cceval eval | synth | rankeval | bench``."""

from __future__ import annotations

import json
import math
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .asgm import AsgmSpec, Family, SynthDatasetSpec, dataset_from_name, generate_labels, generate_scores
from .core import InvalidInput
from .io import SCHEMA_VERSION, AtomicOutput, ParseError, dumps_json, format_csv, format_series, read_labels, read_scores, sha256_text
from .metric import CceConfig, cce
from .rankeval import (
    MetricSpec,
    Task,
    default_task,
    machine_metadata,
    measure_latency,
    run_task,
    summarize_latency,
)
from .registry import available_metrics, evaluate, get_metric

DEFAULT_METRICS = ["CCE", "AUC-ROC", "F1", "F1-PA", "Reduced-F1"]
THRESHOLDED = {"F1", "F1-PA", "Reduced-F1"}
DESK_DATASETS = [
    "10k-2seg-50L", "10k-20seg-50L", "10k-2seg-50H", "10k-20seg-50H",
    "10k-5seg-20L", "10k-50seg-20L", "10k-5seg-20H", "10k-50seg-20H",
    "10k-1seg-100L", "10k-10seg-100L", "10k-1seg-100H", "10k-10seg-100H",
    "10k-2seg-500L", "10k-2seg-500H",
]


def _fail(message):
    click.echo(f"error: {message}", err=True)
    raise SystemExit(2)


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        _fail(f"cannot read {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        _fail(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})")
    # a previous run's summary/manifest embeds its effective config
    if isinstance(data, dict) and "config" in data and "schema" in data:
        return data["config"]
    return data


def _dataset(item, seed):
    if isinstance(item, str):
        return dataset_from_name(item, seed=seed)
    if isinstance(item, dict):
        fields = dict(item)
        fields.setdefault("seed", seed)
        return SynthDatasetSpec(**fields)
    raise InvalidInput(f"cannot interpret dataset entry {item!r}")


def _metric_specs(items, tau, alpha, eta, mode, threshold):
    specs = []
    for item in items:
        if isinstance(item, dict):
            spec = MetricSpec(item["name"], dict(item.get("params", {})), item.get("label", ""))
        else:
            spec = MetricSpec.coerce(item)
        get_metric(spec.name)
        params = dict(spec.params)
        if spec.name == "CCE":
            for key, val in (("tau", tau), ("alpha", alpha), ("eta", eta), ("mode", mode)):
                if val is not None:
                    params[key] = val
        if spec.name in THRESHOLDED and threshold is not None:
            params["threshold"] = threshold
        specs.append(replace(spec, params=params))
    return specs


def _spec_dict(spec: MetricSpec):
    return {"name": spec.name, "label": spec.label, "params": spec.params}


def _threshold(value):
    if value is None or value == "best":
        return value
    try:
        return float(value)
    except ValueError:
        _fail(f"--threshold must be a number or 'best', got {value!r}")


cce_options = [
    click.option("--tau", type=float, default=None, help="Confidence threshold (default 0.5)."),
    click.option("--alpha", type=float, default=None, help="Anomaly weight in the event-level score."),
    click.option("--eta", type=float, default=None, help="Anomaly weight in the global score."),
    click.option("--mode", type=click.Choice(["strict", "relaxed"]), default=None),
    click.option("--threshold", default=None, help="Threshold for F1-type baselines, or 'best'."),
]


def _add(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f

    return deco


@click.group()
@click.version_option(__version__)
def main():
    """Confidence-consistency evaluation and the RankEval metric benchmark."""


# ---------------------------------------------------------------------------
# eval


@main.command("eval")
@click.argument("scores_file", type=click.Path(dir_okay=False))
@click.argument("labels_file", type=click.Path(dir_okay=False))
@click.option("--metric", "metrics", multiple=True, help="Metric to compute (repeatable).")
@_add(cce_options)
@click.option("--scale100", is_flag=True, help="Report values x100.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_eval(scores_file, labels_file, metrics, tau, alpha, eta, mode, threshold, scale100, out_dir):
    """Score SCORES_FILE against LABELS_FILE."""
    threshold = _threshold(threshold)
    try:
        scores = read_scores(scores_file)
        labels = read_labels(labels_file)
    except ParseError as exc:
        _fail(str(exc))
    if scores.size != labels.size:
        _fail(f"length mismatch: {scores_file} has {scores.size} values, {labels_file} has {labels.size}")

    try:
        specs = _metric_specs(list(metrics) or DEFAULT_METRICS, tau, alpha, eta, mode, threshold)
        cce_params = next((s.params for s in specs if s.name == "CCE"), {})
        config = CceConfig(
            tau=cce_params.get("tau", 0.5),
            anomaly_event_weight=cce_params.get("alpha", 0.5),
            global_anomaly_weight=cce_params.get("eta", 0.5),
            mode=cce_params.get("mode", "relaxed"),
        )
        results = [(s, evaluate(s.name, scores, labels, **s.params)) for s in specs]
        breakdown = cce(scores, labels, config)
    except InvalidInput as exc:
        _fail(str(exc))

    scale = 100.0 if scale100 else 1.0
    effective = {
        "command": "eval",
        "scores_file": str(scores_file),
        "labels_file": str(labels_file),
        "metrics": [_spec_dict(s) for s in specs],
        "scale": scale,
    }
    rows = [
        {
            "metric": spec.label,
            "value": None if mv.value is None else mv.value * scale,
            "scale": scale,
            "params": json.dumps(mv.params, sort_keys=True),
        }
        for spec, mv in results
    ]
    event_rows = [
        {
            "index": i,
            "start": ev.start,
            "end": ev.end,
            "kind": ev.kind.name.lower(),
            "length": len(ev),
            "confidence": conf,
            "consistency": cons,
            "uncertainty": float(breakdown.uncertainty[i]),
            "product": prod,
        }
        for i, (ev, conf, cons, prod) in enumerate(breakdown.per_event_scores)
    ]
    parts = {
        "s_event": breakdown.s_event,
        "s_global": breakdown.s_global,
        "s_anom_global": breakdown.s_anom_global,
        "s_norm_global": breakdown.s_norm_global,
        "s_cce": breakdown.s_cce,
        "fallback_events": breakdown.fallback_events,
        "single_class": breakdown.single_class,
    }

    lines = [f"cceval eval: {scores.size} points, {len(event_rows)} events"]
    for row in rows:
        shown = "undefined" if row["value"] is None else f"{row['value']:.6f}"
        lines.append(f"  {row['metric']:<12} {shown}")
    lines.append(
        "  CCE breakdown: event={s_event:.6f} global={s_global:.6f} "
        "(anomaly {s_anom_global:.6f}, normal {s_norm_global:.6f})".format(**parts)
    )
    if breakdown.fallback_events:
        lines.append(f"  note: {breakdown.fallback_events} event(s) used the Beta-fit fallback")
    if breakdown.single_class:
        lines.append("  note: labels contain a single class; its weight was reassigned")
    text = "\n".join(lines) + "\n"

    with AtomicOutput(out_dir) as out:
        out.write("eval.csv", format_csv(rows, ["metric", "value", "scale", "params"], "eval", effective))
        out.write(
            "cce_events.csv",
            format_csv(
                event_rows,
                ["index", "start", "end", "kind", "length", "confidence", "consistency", "uncertainty", "product"],
                "eval",
                effective,
            ),
        )
        out.write("summary.txt", text)
        out.write(
            "summary.json",
            dumps_json(
                {
                    "schema": SCHEMA_VERSION,
                    "config": effective,
                    "values": {r["metric"]: r["value"] for r in rows},
                    "cce_breakdown": parts,
                }
            ),
        )
    click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# synth


def _synth_config(data, seed):
    if isinstance(data, list):
        data = {"datasets": data}
    if not isinstance(data, dict):
        raise InvalidInput("dataset spec file must hold a JSON list or object")
    cfg_seed = data.get("seed", 0) if seed is None else seed
    datasets = [_dataset(item, cfg_seed) for item in data.get("datasets", [])]
    models = [AsgmSpec(**{**m, "seed": m.get("seed", cfg_seed)}) for m in data.get("models", [])]
    return cfg_seed, datasets, models


@main.command("synth")
@click.argument("spec_file", type=click.Path(dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the seed in SPEC_FILE.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_synth(spec_file, seed, out_dir):
    """Generate label (and optional score) files described by SPEC_FILE."""
    try:
        cfg_seed, datasets, models = _synth_config(_load_json(spec_file), seed)
    except (InvalidInput, TypeError, KeyError, ValueError) as exc:
        _fail(f"{spec_file}: {exc}")

    effective = {
        "command": "synth",
        "seed": cfg_seed,
        "datasets": [d.to_dict() for d in datasets],
        "models": [m.to_dict() for m in models],
    }
    manifest = []
    with AtomicOutput(out_dir) as out:
        for ds in datasets:
            try:
                labels = generate_labels(ds)
            except InvalidInput as exc:
                _fail(f"infeasible dataset spec {ds.name!r}: {exc}")
            rel = f"datasets/{ds.name}.labels.csv"
            text = format_series(labels, "label", "{:d}")
            out.write(rel, text)
            manifest.append({"kind": "labels", "dataset": ds.name, "model": "", "file": rel,
                             "n": ds.ts_length, "sha256": sha256_text(text), "spec": json.dumps(ds.to_dict(), sort_keys=True)})
            for model in models:
                scores = generate_scores(model, labels, ds.name)
                rel = f"scores/{ds.name}__{model.name}.scores.csv"
                text = format_series(scores, "score")
                out.write(rel, text)
                manifest.append({"kind": "scores", "dataset": ds.name, "model": model.name, "file": rel,
                                 "n": ds.ts_length, "sha256": sha256_text(text), "spec": json.dumps(model.to_dict(), sort_keys=True)})
        out.write(
            "manifest.csv",
            format_csv(manifest, ["kind", "dataset", "model", "file", "n", "sha256", "spec"], "synth", effective),
        )
        out.write("manifest.json", dumps_json({"schema": SCHEMA_VERSION, "config": effective, "files": manifest}))
    click.echo(f"wrote {len(manifest)} file(s) to {out_dir}")


# ---------------------------------------------------------------------------
# rankeval


REPORT_FIELDS = ["task", "metric", "sigma", "spearman", "kendall", "mean_rank_deviation", "n_datasets", "ties"]
DETAIL_FIELDS = ["task", "metric", "sigma", "dataset", "spearman", "kendall", "mean_rank_deviation", "tie", "values"]


def _summary_rows(reports, labels, tasks):
    """Rows in the layout task | statistic | one column per metric (sigma-averaged)."""
    avg = {(r.task.value, r.metric_name): r for r in reports if r.sigma is None}
    rows = []
    stats = [("Sp", "spearman"), ("Kd", "kendall"), ("MD", "mean_rank_deviation")]
    for task in tasks:
        for short, attr in stats:
            row = {"task": task, "score": short}
            for label in labels:
                v = getattr(avg[task, label], attr)
                row[label] = None if v is None else round(v, 3)
            rows.append(row)
    for short, attr in stats:
        row = {"task": "Avg.", "score": short}
        for label in labels:
            vals = [getattr(avg[t, label], attr) for t in tasks]
            vals = [v for v in vals if v is not None]
            row[label] = round(float(np.mean(vals)), 3) if vals else None
        rows.append(row)
    return rows


@main.command("rankeval")
@click.argument("task_config", type=click.Path(dir_okay=False), required=False)
@click.option("--sigma", "sigmas", type=float, multiple=True, help="Noise levels (repeatable).")
@click.option("--seed", type=int, default=None)
@_add(cce_options)
@click.option("--detail/--no-detail", default=True, help="Also write per-dataset rows.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_rankeval(task_config, sigmas, seed, tau, alpha, eta, mode, threshold, detail, out_dir):
    """Run RankEval tasks. Without TASK_CONFIG, runs the desk-scale default."""
    threshold = _threshold(threshold)
    data = _load_json(task_config) if task_config else {}
    if not isinstance(data, dict):
        _fail(f"{task_config}: task config must be a JSON object")
    try:
        cfg_seed = data.get("seed", 0) if seed is None else seed
        tasks = [Task(t).value for t in data.get("tasks", [t.value for t in Task])]
        sigma_grid = list(sigmas) if sigmas else [float(s) for s in data.get("sigma", [0.0, 0.05, 0.1])]
        datasets = [_dataset(d, cfg_seed) for d in data.get("datasets", DESK_DATASETS)]
        fixed = data.get("fixed", {})
        coupled = bool(data.get("coupled", True))
        specs = _metric_specs(data.get("metrics", DEFAULT_METRICS), tau, alpha, eta, mode, threshold)
    except InvalidInput as exc:
        _fail(str(exc))
    except (TypeError, ValueError, KeyError) as exc:
        _fail(f"{task_config}: {exc}")

    effective = {
        "command": "rankeval",
        "seed": cfg_seed,
        "tasks": tasks,
        "sigma": sigma_grid,
        "datasets": [d.to_dict() for d in datasets],
        "fixed": fixed,
        "coupled": coupled,
        "metrics": [_spec_dict(s) for s in specs],
    }
    reports = []
    try:
        for task in tasks:
            spec = default_task(task, datasets, sigma_grid, fixed=fixed.get(task), seed=cfg_seed)
            reports.extend(run_task(spec, specs, coupled=coupled))
    except InvalidInput as exc:
        _fail(str(exc))

    rows = [
        {
            "task": r.task.value,
            "metric": r.metric_name,
            "sigma": "mean" if r.sigma is None else r.sigma,
            "spearman": r.spearman,
            "kendall": r.kendall,
            "mean_rank_deviation": r.mean_rank_deviation,
            "n_datasets": r.n_datasets,
            "ties": r.ties,
        }
        for r in reports
    ]
    labels = [s.label for s in specs]
    table = _summary_rows(reports, labels, tasks)
    with AtomicOutput(out_dir) as out:
        out.write("rank_reports.csv", format_csv(rows, REPORT_FIELDS, "rankeval", effective))
        out.write("rank_summary.csv", format_csv(table, ["task", "score", *labels], "rankeval", effective))
        if detail:
            detail_rows = [
                {
                    "task": r.task.value,
                    "metric": r.metric_name,
                    "sigma": r.sigma,
                    "dataset": d.dataset,
                    "spearman": d.spearman,
                    "kendall": d.kendall,
                    "mean_rank_deviation": d.mean_rank_deviation,
                    "tie": d.tie,
                    "values": json.dumps([None if v is None else float(v) for v in d.values]),
                }
                for r in reports
                if r.sigma is not None
                for d in r.per_dataset
            ]
            out.write("rank_detail.csv", format_csv(detail_rows, DETAIL_FIELDS, "rankeval", effective))
        out.write("summary.json", dumps_json({"schema": SCHEMA_VERSION, "config": effective, "reports": rows}))

    click.echo(f"{'task':<12} {'metric':<12} {'sigma':>6} {'Sp':>7} {'Kd':>7} {'MD':>7}")
    for row in rows:
        def fmt(v):
            return "   n/a" if v is None else f"{v:7.3f}"

        sigma = row["sigma"] if isinstance(row["sigma"], str) else f"{row['sigma']:g}"
        click.echo(
            f"{row['task']:<12} {row['metric']:<12} {sigma:>6} "
            f"{fmt(row['spearman'])} {fmt(row['kendall'])} {fmt(row['mean_rank_deviation'])}"
        )


# ---------------------------------------------------------------------------
# bench


def _fixed_density(n, density, lo, hi, seed):
    segments = max(1, int(round(n * density)))
    return SynthDatasetSpec(n, segments, lo, hi, "L", seed=seed, name=f"{n}-{segments}seg-bench")


def loglog_slope(xs, ys):
    """Least-squares slope of log(y) against log(x)."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


@main.command("bench")
@click.argument("bench_config", type=click.Path(dir_okay=False), required=False)
@click.option("--repetitions", type=int, default=None)
@click.option("--lengths", default=None, help="Comma-separated series lengths.")
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_bench(bench_config, repetitions, lengths, seed, out_dir):
    """Measure metric latency against series length, segment count and task."""
    data = _load_json(bench_config) if bench_config else {}
    cfg_seed = data.get("seed", 0) if seed is None else seed
    reps = repetitions if repetitions is not None else int(data.get("repetitions", 5))
    if reps < 5:
        _fail(f"repetitions must be >= 5, got {reps}")
    try:
        n_grid = [int(x) for x in lengths.split(",")] if lengths else [int(x) for x in data.get("lengths", [10_000, 100_000, 1_000_000])]
        density = float(data.get("density", 0.002))
        seg_n = int(data.get("segment_length", 100_000))
        seg_grid = [int(x) for x in data.get("segments", [2, 20, 200, 2000])]
        tasks = [Family(t) for t in data.get("tasks", [f.value for f in Family])]
        specs = _metric_specs(data.get("metrics", ["CCE"]), None, None, None, None, None)
    except InvalidInput as exc:
        _fail(str(exc))
    except ValueError as exc:
        _fail(f"invalid bench config: {exc}")

    effective = {
        "command": "bench",
        "seed": cfg_seed,
        "repetitions": reps,
        "lengths": n_grid,
        "density": density,
        "segment_length": seg_n,
        "segments": seg_grid,
        "tasks": [t.value for t in tasks],
        "metrics": [_spec_dict(s) for s in specs],
    }
    meta = machine_metadata()
    try:
        length_suite = [_fixed_density(n, density, 40, 60, cfg_seed) for n in n_grid]
        seg_suite = [SynthDatasetSpec(seg_n, k, 1, max(1, min(60, seg_n // (2 * k) - 1)), "L", seed=cfg_seed,
                                      name=f"{seg_n}-{k}seg-bench") for k in seg_grid]
        task_ds = length_suite[0] if length_suite else _fixed_density(10_000, density, 40, 60, cfg_seed)
        for ds in [*length_suite, *seg_suite]:
            ds.validate()
        records = []
        for spec in specs:
            records += measure_latency(spec, length_suite, reps, task="length")
            records += measure_latency(spec, seg_suite, reps, task="segments")
            for fam in tasks:
                model = AsgmSpec(fam, q=0.5, p=0.05 if fam is Family.PREQNEGP else 0.0, seed=cfg_seed)
                records += measure_latency(spec, [task_ds], reps, model=model, task=fam.value)
    except InvalidInput as exc:
        _fail(str(exc))

    summary = summarize_latency(records)
    by_sweep = {}
    for row in summary:
        by_sweep.setdefault(row["task"], []).append(row)
    slopes = {}
    for spec in specs:
        pts = [r for r in by_sweep.get("length", []) if r["metric"] == spec.label]
        if len(pts) >= 2:
            slopes[spec.label] = loglog_slope([r["ts_length"] for r in pts], [r["median_ms"] for r in pts])

    rec_fields = ["metric_name", "task", "dataset", "ts_length", "segment_count", "repetition", "repetitions", "wall_time"]
    sum_fields = ["metric", "task", "ts_length", "segment_count", "median_ms", "mean_ms", "repetitions"]
    cfg_meta = {**effective, "machine": meta}
    with AtomicOutput(out_dir) as out:
        out.write("latency.csv", format_csv([r.__dict__ for r in records], rec_fields, "bench", cfg_meta))
        out.write("latency_summary.csv", format_csv(summary, sum_fields, "bench", cfg_meta))
        out.write("plot_length_vs_time.csv", format_csv(by_sweep.get("length", []), sum_fields, "bench", cfg_meta))
        out.write("plot_segments_vs_time.csv", format_csv(by_sweep.get("segments", []), sum_fields, "bench", cfg_meta))
        task_rows = [r for r in records if r.task not in ("length", "segments")]
        out.write("plot_task_vs_time.csv", format_csv([r.__dict__ for r in task_rows], rec_fields, "bench", cfg_meta))
        out.write(
            "summary.json",
            dumps_json({"schema": SCHEMA_VERSION, "config": effective, "machine": meta,
                        "loglog_slope": slopes, "summary": summary}),
        )
    for row in summary:
        click.echo(f"{row['metric']:<10} {row['task']:<10} n={row['ts_length']:<8} segs={row['segment_count']:<6} "
                   f"median={row['median_ms']:.3f} ms")
    for name, slope in slopes.items():
        click.echo(f"{name}: log-log slope vs length = {slope:.3f}")
    if any(not math.isfinite(s) for s in slopes.values()):
        _fail("could not fit latency slope")
