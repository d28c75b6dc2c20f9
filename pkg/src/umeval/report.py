"""Report rendering: markdown for eyeballs, CSV for plotting, JSON for
round-tripping.

Markdown shows SRCC as signed percentages with one decimal, the convention
of published MOS-correlation tables; CSV and JSON carry full precision.
"""

from __future__ import annotations

import csv
import io
import json

from .harness import (
    BootstrapSpec,
    SweepPoint,
    SweepReport,
    TaskEvaluation,
    WerCorrelations,
)
from .um import UM_NAMES

REPORT_FORMATS = ("csv", "markdown", "json")


def _pct(value: float) -> str:
    return f"{value * 100.0:.1f}"


def render_report(evaluation: TaskEvaluation | SweepReport, format: str = "markdown") -> str:
    if format not in REPORT_FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {REPORT_FORMATS}")
    if isinstance(evaluation, TaskEvaluation):
        return _render_task(evaluation, format)
    if isinstance(evaluation, SweepReport):
        return _render_sweep(evaluation, format)
    raise TypeError(f"cannot render {type(evaluation).__name__}")


# -- task reports -----------------------------------------------------------


def _render_task(ev: TaskEvaluation, fmt: str) -> str:
    if fmt == "csv":
        return _task_csv(ev)
    if fmt == "json":
        return _task_json(ev)
    return _task_markdown(ev)


def _task_csv(ev: TaskEvaluation) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["um", "srcc", "ci_low", "ci_high", "n"])
    for name in UM_NAMES:
        ci = ev.per_um_ci.get(name)
        writer.writerow(
            [
                name,
                repr(ev.per_um_srcc[name]),
                repr(ci[0]) if ci else "",
                repr(ci[1]) if ci else "",
                ev.n_utterances,
            ]
        )
    if ev.wer is not None:
        for name in UM_NAMES:
            writer.writerow([f"{name}_vs_wer", repr(ev.wer.per_um_srcc[name]), "", "", ev.wer.n])
        writer.writerow(["um_wer_mean", repr(ev.wer.mean_srcc), "", "", ev.wer.n])
        writer.writerow(["wer_vs_mos", repr(ev.wer.wer_mos_srcc), "", "", ev.wer.n])
    return buf.getvalue()


def _task_markdown(ev: TaskEvaluation) -> str:
    lines = [f"# Task {ev.task_id}", "", f"{ev.n_utterances} utterances evaluated."]
    if ev.bootstrap is not None:
        b = ev.bootstrap
        lines.append(
            f"Bootstrap: {b.resamples} resamples, {b.level:g} level, "
            f"seed {b.seed}, rng {b.rng_tag}."
        )
    lines.append("")
    if ev.per_um_ci:
        lines.append("| um | srcc (%) | ci low (%) | ci high (%) |")
        lines.append("| --- | ---: | ---: | ---: |")
        for name in UM_NAMES:
            lo, hi = ev.per_um_ci[name]
            lines.append(
                f"| {name} | {_pct(ev.per_um_srcc[name])} | {_pct(lo)} | {_pct(hi)} |"
            )
    else:
        lines.append("| um | srcc (%) |")
        lines.append("| --- | ---: |")
        for name in UM_NAMES:
            lines.append(f"| {name} | {_pct(ev.per_um_srcc[name])} |")
    lines.append("")
    lines.append("Entropy is measured in nats; srcc is rank correlation against MOS.")
    if ev.wer is not None:
        w = ev.wer
        lines.append("")
        lines.append(f"## WER correlations ({w.n} utterances with transcripts)")
        lines.append("")
        lines.append("| series | srcc (%) |")
        lines.append("| --- | ---: |")
        for name in UM_NAMES:
            lines.append(f"| {name} vs wer | {_pct(w.per_um_srcc[name])} |")
        lines.append(f"| mean of um-vs-wer | {_pct(w.mean_srcc)} |")
        lines.append(f"| wer vs mos | {_pct(w.wer_mos_srcc)} |")
    if ev.skipped:
        lines.append("")
        lines.append(f"## Skipped ({len(ev.skipped)})")
        lines.append("")
        for uid, reason in ev.skipped:
            lines.append(f"- {uid}: {reason}")
    lines.append("")
    return "\n".join(lines)


def _task_json(ev: TaskEvaluation) -> str:
    obj: dict = {
        "task_id": ev.task_id,
        "n_utterances": ev.n_utterances,
        "per_um_srcc": ev.per_um_srcc,
        "per_um_ci": {k: list(v) for k, v in ev.per_um_ci.items()},
        "skipped": [list(pair) for pair in ev.skipped],
    }
    if ev.bootstrap is not None:
        b = ev.bootstrap
        obj["bootstrap"] = {
            "resamples": b.resamples,
            "level": b.level,
            "seed": b.seed,
            "rng_tag": b.rng_tag,
        }
    if ev.wer is not None:
        obj["wer"] = {
            "per_um_srcc": ev.wer.per_um_srcc,
            "mean_srcc": ev.wer.mean_srcc,
            "wer_mos_srcc": ev.wer.wer_mos_srcc,
            "n": ev.wer.n,
        }
    return json.dumps(obj, sort_keys=True) + "\n"


def task_evaluation_from_json(text: str) -> TaskEvaluation:
    """Inverse of the JSON rendering; round-trips to an equal TaskEvaluation."""
    obj = json.loads(text)
    bootstrap = None
    if "bootstrap" in obj:
        b = obj["bootstrap"]
        bootstrap = BootstrapSpec(
            resamples=b["resamples"], level=b["level"], seed=b["seed"], rng_tag=b["rng_tag"]
        )
    wer = None
    if "wer" in obj:
        w = obj["wer"]
        wer = WerCorrelations(
            per_um_srcc=w["per_um_srcc"],
            mean_srcc=w["mean_srcc"],
            wer_mos_srcc=w["wer_mos_srcc"],
            n=w["n"],
        )
    return TaskEvaluation(
        task_id=obj["task_id"],
        n_utterances=obj["n_utterances"],
        per_um_srcc=obj["per_um_srcc"],
        per_um_ci={k: (v[0], v[1]) for k, v in obj["per_um_ci"].items()},
        skipped=tuple((uid, reason) for uid, reason in obj["skipped"]),
        bootstrap=bootstrap,
        wer=wer,
    )


# -- sweep reports ----------------------------------------------------------


def _render_sweep(report: SweepReport, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "um_mean", "um_max", "um_sd", "um_entropy"])
        for point in report.points:
            writer.writerow(
                [repr(point.dropout_p)] + [repr(point.per_um_srcc[n]) for n in UM_NAMES]
            )
        return buf.getvalue()
    if fmt == "json":
        obj = {
            "points": [
                {"dropout_p": p.dropout_p, "per_um_srcc": p.per_um_srcc}
                for p in report.points
            ]
        }
        return json.dumps(obj, sort_keys=True) + "\n"
    lines = ["# Dropout sweep", ""]
    lines.append("| p | mean (%) | max (%) | sd (%) | entropy (%) |")
    lines.append("| ---: | ---: | ---: | ---: | ---: |")
    for point in report.points:
        cells = " | ".join(_pct(point.per_um_srcc[n]) for n in UM_NAMES)
        lines.append(f"| {point.dropout_p:g} | {cells} |")
    lines.append("")
    return "\n".join(lines)


def sweep_report_from_json(text: str) -> SweepReport:
    obj = json.loads(text)
    return SweepReport(
        points=tuple(
            SweepPoint(dropout_p=p["dropout_p"], per_um_srcc=p["per_um_srcc"])
            for p in obj["points"]
        )
    )
