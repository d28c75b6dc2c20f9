"""Command-line interface: one executable, five subcommands.

Exit codes: 0 success, 1 evaluation error, 2 usage error, 3 I/O or format
error. Every failure prints a single-line diagnostic of the form
``umeval: error: <Kind>: <detail>`` as the last line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .errors import (
    DegenerateSeries,
    EmptyReference,
    EvaluationError,
    IoFailure,
    LogitFormatError,
    ManifestError,
    NonFiniteInput,
    VocabFileError,
    VocabSizeMismatch,
)
from .harness import BootstrapSpec, EvalOptions, WerSpec, evaluate_sweep, evaluate_task
from .logit_io import read_logit_file, read_manifest
from .report import REPORT_FORMATS, render_report
from .synth import QUALITY_LAWS, SyntheticSpec, generate_synthetic
from .um import compute_um_vector
from .wer import ctc_greedy_decode, read_vocab, wer, wer_tokens

EXIT_OK = 0
EXIT_EVALUATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

_EVALUATION_ERRORS = (EvaluationError, DegenerateSeries, EmptyReference, NonFiniteInput)
_IO_ERRORS = (
    LogitFormatError,
    ManifestError,
    IoFailure,
    VocabSizeMismatch,
    VocabFileError,
    OSError,
)


def _fail(exc: Exception, code: int) -> int:
    print(f"umeval: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _add_report_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=REPORT_FORMATS, default="markdown", help="report format"
    )
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for per-utterance work (output is identical for any N)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="umeval",
        description="Zero-shot audio-quality evaluation from SSL-model logits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_um = sub.add_parser("um", help="print the four uncertainty measures of one logit file")
    p_um.add_argument("logit_path", help="path to a .umlg logit file")
    p_um.add_argument("--json", action="store_true", help="emit a one-line JSON object")
    p_um.set_defaults(func=cmd_um)

    p_eval = sub.add_parser("eval", help="evaluate a manifest: SRCC of each UM against MOS")
    p_eval.add_argument("manifest", help="manifest CSV path")
    p_eval.add_argument(
        "--bootstrap",
        type=int,
        nargs="?",
        const=1000,
        default=None,
        metavar="N",
        help="bootstrap confidence intervals with N resamples (default 1000); requires --seed",
    )
    p_eval.add_argument("--level", type=float, default=0.95, help="bootstrap confidence level")
    p_eval.add_argument("--seed", type=int, default=None, help="bootstrap seed")
    p_eval.add_argument(
        "--wer", action="store_true", help="also correlate UMs and MOS against WER"
    )
    p_eval.add_argument("--vocab", default=None, help="vocab file: decode hypotheses from logits")
    p_eval.add_argument(
        "--hyp-tsv", default=None, help="hypotheses TSV (utterance_id<TAB>text)"
    )
    _add_report_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="evaluate a dropout sweep of manifests")
    p_sweep.add_argument("spec", help="sweep spec CSV with columns dropout_p,manifest_path")
    _add_report_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset with planted quality")
    p_synth.add_argument("--n", type=int, default=200, help="number of utterances (>= 10)")
    p_synth.add_argument("--w", type=int, default=16, help="windows per utterance")
    p_synth.add_argument("--q", type=int, default=32, help="vocabulary size (>= 2)")
    p_synth.add_argument("--law", choices=QUALITY_LAWS, default="temperature")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out-dir", required=True, help="output directory")
    p_synth.set_defaults(func=cmd_synth)

    p_wer = sub.add_parser("wer", help="word error rates from files or decoded logits")
    p_wer.add_argument("--ref", default=None, help="reference transcript file, one line each")
    p_wer.add_argument("--hyp", default=None, help="hypothesis transcript file, one line each")
    p_wer.add_argument("--decode", default=None, metavar="MANIFEST", help="decode hypotheses from manifest logits")
    p_wer.add_argument("--vocab", default=None, help="vocab file for --decode")
    p_wer.set_defaults(func=cmd_wer)

    return parser


def cmd_um(args: argparse.Namespace) -> int:
    try:
        matrix, _meta = read_logit_file(args.logit_path)
        ums = compute_um_vector(matrix)
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    if args.json:
        print(json.dumps(ums.as_dict(), sort_keys=True))
    else:
        print(
            f"entropy={ums.um_entropy:.7g} mean={ums.um_mean:.7g} "
            f"max={ums.um_max:.7g} sd={ums.um_sd:.7g}"
        )
    return EXIT_OK


def _eval_options(args: argparse.Namespace, parser_error) -> EvalOptions:
    bootstrap = None
    if args.bootstrap is not None:
        if args.seed is None:
            parser_error("--bootstrap requires --seed (no hidden nondeterminism)")
        bootstrap = BootstrapSpec(resamples=args.bootstrap, level=args.level, seed=args.seed)
    wer_spec = None
    if args.wer:
        if (args.vocab is None) == (args.hyp_tsv is None):
            parser_error("--wer requires exactly one of --vocab or --hyp-tsv")
        wer_spec = WerSpec(
            vocab_path=Path(args.vocab) if args.vocab else None,
            hyp_path=Path(args.hyp_tsv) if args.hyp_tsv else None,
        )
    return EvalOptions(bootstrap=bootstrap, wer=wer_spec, workers=max(1, args.workers))


def cmd_eval(args: argparse.Namespace) -> int:
    options = _eval_options(args, build_parser().error)
    try:
        records = read_manifest(args.manifest)
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    try:
        evaluation = evaluate_task(records, options)
        report = render_report(evaluation, args.format)
    except _EVALUATION_ERRORS as exc:
        return _fail(exc, EXIT_EVALUATION)
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    _emit(report, args.out)
    return EXIT_OK


def _read_sweep_spec(path: Path) -> list[tuple[float, Path]]:
    from .errors import MalformedLine, MissingField

    points: list[tuple[float, Path]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MissingField(f"{path}: empty sweep spec, header row required")
        for col in ("dropout_p", "manifest_path"):
            if col not in reader.fieldnames:
                raise MissingField(f"{path}:1: header missing required column {col!r}")
        for row in reader:
            line = reader.line_num
            if row.get("dropout_p") is None or row.get("manifest_path") in (None, ""):
                raise MalformedLine(f"{path}:{line}: incomplete sweep row")
            try:
                p = float(row["dropout_p"])
            except ValueError as exc:
                raise MalformedLine(
                    f"{path}:{line}: unparsable dropout_p {row['dropout_p']!r}"
                ) from exc
            if not 0.0 <= p < 1.0:
                raise MalformedLine(f"{path}:{line}: dropout_p {p} outside [0, 1)")
            manifest = Path(row["manifest_path"])
            if not manifest.is_absolute():
                manifest = path.parent / manifest
            points.append((p, manifest))
    return points


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        points = _read_sweep_spec(Path(args.spec))
        manifests = [(p, read_manifest(m)) for p, m in points]
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    options = EvalOptions(workers=max(1, args.workers))
    try:
        report = render_report(evaluate_sweep(manifests, options), args.format)
    except _EVALUATION_ERRORS as exc:
        return _fail(exc, EXIT_EVALUATION)
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    _emit(report, args.out)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    parser_error = build_parser().error
    if args.q < 2:
        parser_error("--q must be >= 2 (a categorical needs at least two tokens)")
    if args.n < 10:
        parser_error("--n must be >= 10")
    if args.w < 1:
        parser_error("--w must be >= 1")
    spec = SyntheticSpec(
        n_utterances=args.n, w=args.w, q=args.q, quality_law=args.law, seed=args.seed
    )
    try:
        manifest_path = generate_synthetic(spec, Path(args.out_dir))
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)
    print(manifest_path)
    return EXIT_OK


def _wer_rows_from_files(ref_path: Path, hyp_path: Path) -> list[tuple[str, list[str], list[str]]]:
    ref_lines = ref_path.read_text(encoding="utf-8").splitlines()
    hyp_lines = hyp_path.read_text(encoding="utf-8").splitlines()
    if len(ref_lines) != len(hyp_lines):
        raise ValueError(
            f"line count mismatch: {len(ref_lines)} reference vs {len(hyp_lines)} hypothesis lines"
        )
    return [
        (str(i + 1), wer_tokens(r), wer_tokens(h))
        for i, (r, h) in enumerate(zip(ref_lines, hyp_lines))
    ]


def _wer_rows_from_manifest(manifest: Path, vocab_path: Path):
    vocab = read_vocab(vocab_path)
    rows = []
    for record in read_manifest(manifest):
        if record.transcript_ref is None:
            continue
        matrix, _meta = read_logit_file(record.logit_path)
        hyp = ctc_greedy_decode(matrix, vocab)
        rows.append((record.utterance_id, wer_tokens(record.transcript_ref), hyp))
    return rows


def cmd_wer(args: argparse.Namespace) -> int:
    parser_error = build_parser().error
    file_mode = args.ref is not None or args.hyp is not None
    decode_mode = args.decode is not None
    if file_mode == decode_mode:
        parser_error("use either --ref/--hyp or --decode/--vocab")
    if file_mode and (args.ref is None or args.hyp is None):
        parser_error("--ref and --hyp must be given together")
    if decode_mode and args.vocab is None:
        parser_error("--decode requires --vocab")

    try:
        if file_mode:
            try:
                rows = _wer_rows_from_files(Path(args.ref), Path(args.hyp))
            except ValueError as exc:
                return _fail(exc, EXIT_USAGE)
        else:
            rows = _wer_rows_from_manifest(Path(args.decode), Path(args.vocab))
    except _IO_ERRORS as exc:
        return _fail(exc, EXIT_IO)

    if not rows:
        return _fail(EvaluationError("no reference transcripts to score"), EXIT_EVALUATION)

    total_errors = 0
    total_ref = 0
    lines = ["id\twer\tS\tD\tI\tN"]
    for uid, ref, hyp in rows:
        try:
            b = wer(ref, hyp)
        except EmptyReference as exc:
            return _fail(EmptyReference(f"{uid}: {exc}"), EXIT_EVALUATION)
        total_errors += b.errors
        total_ref += b.ref_words
        lines.append(
            f"{uid}\t{b.wer:.6g}\t{b.substitutions}\t{b.deletions}\t{b.insertions}\t{b.ref_words}"
        )
    lines.append(f"corpus\t{total_errors / total_ref:.6g}\t\t\t\t{total_ref}")
    print("\n".join(lines))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:  # parser.error() inside a command
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
