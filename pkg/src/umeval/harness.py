"""Task evaluation: UMs per utterance, SRCC against MOS, dropout sweeps.

Headline numbers are utterance-level (one pair per audio file); system_id
is carried through but plays no role. Unreadable logit files are skipped
with a reason and surfaced in the report, never silently dropped.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    AllFilesUnreadable,
    DegenerateSeries,
    EvaluationError,
    LogitFormatError,
    MissingBaseline,
    TooFewUtterances,
)
from .logit_io import LogitMatrix, UtteranceRecord, read_logit_file
from .stats import RNG_TAG, PairedSeries, bootstrap_ci, spearman
from .um import UM_NAMES, UMVector, compute_um_vector
from .wer import ctc_greedy_decode, read_vocab, wer, wer_tokens


@dataclass(frozen=True)
class BootstrapSpec:
    """Bootstrap settings; rng_tag names the resampling algorithm."""

    resamples: int = 1000
    level: float = 0.95
    seed: int = 0
    rng_tag: str = RNG_TAG


@dataclass(frozen=True)
class WerSpec:
    """Where hypothesis transcripts come from: CTC-decode the logits with a
    vocabulary file, or read pre-made hypotheses from a TSV of
    ``utterance_id<TAB>text`` lines. Exactly one source must be set."""

    vocab_path: Path | None = None
    hyp_path: Path | None = None

    def __post_init__(self) -> None:
        if (self.vocab_path is None) == (self.hyp_path is None):
            raise ValueError("set exactly one of vocab_path or hyp_path")


@dataclass(frozen=True)
class EvalOptions:
    bootstrap: BootstrapSpec | None = None
    wer: WerSpec | None = None
    workers: int = 1


@dataclass(frozen=True)
class WerCorrelations:
    """The intelligibility triangle: UM-vs-WER per measure, their mean, and
    WER-vs-MOS, over the utterances that had reference transcripts."""

    per_um_srcc: dict[str, float]
    mean_srcc: float
    wer_mos_srcc: float
    n: int


@dataclass(frozen=True)
class TaskEvaluation:
    """Per-task correlation report (rendered as percentages in tables)."""

    task_id: str
    n_utterances: int
    per_um_srcc: dict[str, float]
    per_um_ci: dict[str, tuple[float, float]] = field(default_factory=dict)
    skipped: tuple[tuple[str, str], ...] = ()
    bootstrap: BootstrapSpec | None = None
    wer: WerCorrelations | None = None


@dataclass(frozen=True)
class SweepPoint:
    dropout_p: float
    per_um_srcc: dict[str, float]


@dataclass(frozen=True)
class SweepReport:
    """SRCC-vs-dropout-probability series, ascending in p with p=0 first."""

    points: tuple[SweepPoint, ...]


def _load_one(
    record: UtteranceRecord,
) -> tuple[UtteranceRecord, LogitMatrix | None, UMVector | None, str | None]:
    try:
        matrix, _meta = read_logit_file(record.logit_path)
        return record, matrix, compute_um_vector(matrix), None
    except (LogitFormatError, OSError) as exc:
        return record, None, None, f"{type(exc).__name__}: {exc}"


def _correlate(values, mos, label: str) -> float:
    try:
        return spearman(PairedSeries(np.asarray(values), np.asarray(mos)))
    except DegenerateSeries as exc:
        raise DegenerateSeries(f"{label}: {exc}") from exc


def evaluate_task(records: list[UtteranceRecord], options: EvalOptions | None = None) -> TaskEvaluation:
    """Evaluate one manifest: one UMVector per readable utterance, SRCC per
    UM against MOS, optional bootstrap intervals and WER correlations."""
    options = options or EvalOptions()
    if len(records) < 3:
        raise TooFewUtterances(f"manifest has {len(records)} rows, need >= 3")
    task_ids = {r.task_id for r in records}
    if len(task_ids) != 1:
        raise EvaluationError(
            f"manifest mixes task_ids {sorted(task_ids)}; evaluate one task per manifest"
        )
    task_id = records[0].task_id

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            loaded = list(pool.map(_load_one, records))
    else:
        loaded = [_load_one(r) for r in records]

    skipped = tuple((rec.utterance_id, reason) for rec, _, _, reason in loaded if reason)
    usable = [(rec, matrix, ums) for rec, matrix, ums, reason in loaded if reason is None]
    if not usable:
        raise AllFilesUnreadable(f"all {len(records)} logit files unreadable")
    if len(usable) < 3:
        raise TooFewUtterances(
            f"only {len(usable)} readable utterances after skipping {len(skipped)}, need >= 3"
        )

    mos = [rec.mos for rec, _, _ in usable]
    um_series = {
        name: [ums.as_dict()[name] for _, _, ums in usable] for name in UM_NAMES
    }
    per_um_srcc = {
        name: _correlate(um_series[name], mos, f"um[{name}] vs mos") for name in UM_NAMES
    }

    per_um_ci: dict[str, tuple[float, float]] = {}
    if options.bootstrap is not None:
        b = options.bootstrap
        for i, name in enumerate(UM_NAMES):
            series = PairedSeries(np.asarray(um_series[name]), np.asarray(mos))
            per_um_ci[name] = bootstrap_ci(series, b.resamples, b.level, b.seed + i)

    wer_block = None
    if options.wer is not None:
        wer_block = _wer_correlations(usable, options.wer)

    return TaskEvaluation(
        task_id=task_id,
        n_utterances=len(usable),
        per_um_srcc=per_um_srcc,
        per_um_ci=per_um_ci,
        skipped=skipped,
        bootstrap=options.bootstrap,
        wer=wer_block,
    )


def _read_hyp_tsv(path: Path) -> dict[str, str]:
    hyps: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        uid, _, text = line.partition("\t")
        hyps[uid] = text
    return hyps


def _wer_correlations(
    usable: list[tuple[UtteranceRecord, LogitMatrix, UMVector]], spec: WerSpec
) -> WerCorrelations:
    if spec.vocab_path is not None:
        vocab = read_vocab(spec.vocab_path)
        hyp_for = lambda rec, matrix: ctc_greedy_decode(matrix, vocab)  # noqa: E731
    else:
        hyps = _read_hyp_tsv(spec.hyp_path)
        hyp_for = lambda rec, matrix: (  # noqa: E731
            wer_tokens(hyps[rec.utterance_id]) if rec.utterance_id in hyps else None
        )

    rows: list[tuple[UMVector, float, float]] = []  # (ums, wer, mos)
    for rec, matrix, ums in usable:
        if rec.transcript_ref is None:
            continue
        hyp = hyp_for(rec, matrix)
        if hyp is None:
            continue
        breakdown = wer(wer_tokens(rec.transcript_ref), hyp)
        rows.append((ums, breakdown.wer, rec.mos))
    if len(rows) < 3:
        raise TooFewUtterances(
            f"only {len(rows)} utterances with transcripts and hypotheses, need >= 3 for WER correlations"
        )

    wers = [w for _, w, _ in rows]
    mos = [m for _, _, m in rows]
    per_um = {
        name: _correlate([u.as_dict()[name] for u, _, _ in rows], wers, f"um[{name}] vs wer")
        for name in UM_NAMES
    }
    return WerCorrelations(
        per_um_srcc=per_um,
        mean_srcc=float(np.mean([per_um[name] for name in UM_NAMES])),
        wer_mos_srcc=_correlate(wers, mos, "wer vs mos"),
        n=len(rows),
    )


def evaluate_sweep(
    manifests: list[tuple[float, list[UtteranceRecord]]], options: EvalOptions | None = None
) -> SweepReport:
    """Evaluate each (dropout_p, manifest) point independently; points are
    reported ascending in p and must include the p = 0 baseline."""
    if len(manifests) < 2:
        raise EvaluationError(f"sweep needs >= 2 points, got {len(manifests)}")
    ps = [p for p, _ in manifests]
    if len(set(ps)) != len(ps):
        raise EvaluationError("sweep lists a dropout_p more than once")
    if not any(p == 0.0 for p in ps):
        raise MissingBaseline("sweep is missing the p = 0 baseline point")

    points = []
    for p, records in sorted(manifests, key=lambda pair: pair[0]):
        try:
            evaluation = evaluate_task(records, options)
        except (EvaluationError, DegenerateSeries) as exc:
            raise type(exc)(f"[p={p}] {exc}") from exc
        points.append(SweepPoint(dropout_p=p, per_um_srcc=evaluation.per_um_srcc))
    return SweepReport(points=tuple(points))
