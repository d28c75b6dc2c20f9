"""Zero-shot audio-quality evaluation from SSL-model logits.

Computes audio-level uncertainty measures (entropy, mean, max, sd) from
per-window logit matrices and correlates them with Mean Opinion Scores;
ships the logit exchange format, rank statistics, WER tools, a synthetic
self-test generator and an evaluation CLI.
"""

from .harness import (
    BootstrapSpec,
    EvalOptions,
    SweepPoint,
    SweepReport,
    TaskEvaluation,
    WerCorrelations,
    WerSpec,
    evaluate_sweep,
    evaluate_task,
)
from .logit_io import (
    LogitFileMetadata,
    LogitMatrix,
    UtteranceRecord,
    read_logit_file,
    read_manifest,
    write_logit_file,
)
from .report import render_report, sweep_report_from_json, task_evaluation_from_json
from .stats import PairedSeries, average_ranks, bootstrap_ci, spearman
from .synth import SyntheticSpec, generate_synthetic
from .um import UMVector, compute_um_vector, um_entropy, um_reduce, window_entropy
from .wer import Vocab, WerBreakdown, ctc_greedy_decode, read_vocab, wer, wer_tokens

__version__ = "0.1.0"

__all__ = [
    "BootstrapSpec",
    "EvalOptions",
    "LogitFileMetadata",
    "LogitMatrix",
    "PairedSeries",
    "SweepPoint",
    "SweepReport",
    "SyntheticSpec",
    "TaskEvaluation",
    "UMVector",
    "UtteranceRecord",
    "Vocab",
    "WerBreakdown",
    "WerCorrelations",
    "WerSpec",
    "average_ranks",
    "bootstrap_ci",
    "compute_um_vector",
    "ctc_greedy_decode",
    "evaluate_sweep",
    "evaluate_task",
    "generate_synthetic",
    "read_logit_file",
    "read_manifest",
    "read_vocab",
    "render_report",
    "spearman",
    "sweep_report_from_json",
    "task_evaluation_from_json",
    "um_entropy",
    "um_reduce",
    "wer",
    "wer_tokens",
    "window_entropy",
    "write_logit_file",
]
