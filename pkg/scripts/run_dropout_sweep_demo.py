#!/usr/bin/env python3
"""Build and evaluate a mock dropout sweep without any model inference.

Real sweeps come from extractor runs at several dropout probabilities; this
demo emulates the flattening effect of heavier handicapping by scaling a
baseline synthetic dataset's logits by (1 - p) and re-tagging the metadata,
then drives the sweep machinery on the derived manifests.

    python3 scripts/run_dropout_sweep_demo.py --out-dir /tmp/sweep-demo
"""

import argparse
import tempfile
from pathlib import Path

import numpy as np

from umeval import (
    LogitFileMetadata,
    LogitMatrix,
    SyntheticSpec,
    evaluate_sweep,
    generate_synthetic,
    read_logit_file,
    read_manifest,
    render_report,
    write_logit_file,
)
from umeval.logit_io import write_manifest


def derive_point(baseline_manifest: Path, p: float, out_dir: Path) -> Path:
    """Scale every logit matrix by (1 - p), keeping the manifest shape."""
    (out_dir / "logits").mkdir(parents=True, exist_ok=True)
    rows = []
    for record in read_manifest(baseline_manifest):
        matrix, meta = read_logit_file(record.logit_path)
        scaled = LogitMatrix(matrix.values * np.float32(1.0 - p))
        k = 1 if p == 0.0 else 100
        meta = LogitFileMetadata(
            meta.utterance_id, meta.model_id, meta.logit_source, p, k, meta.sample_rate_hz
        )
        rel = f"logits/{record.utterance_id}.umlg"
        write_logit_file(scaled, meta, out_dir / rel)
        rows.append(
            {
                "utterance_id": record.utterance_id,
                "mos": repr(record.mos),
                "logit_path": rel,
                "task_id": record.task_id,
            }
        )
    manifest = out_dir / "manifest.csv"
    write_manifest(rows, manifest)
    return manifest


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3])
    args = parser.parse_args()

    out_root = Path(args.out_dir) if args.out_dir else Path(tempfile.mkdtemp(prefix="sweep-"))
    baseline = generate_synthetic(
        SyntheticSpec(n_utterances=120, seed=args.seed), out_root / "baseline"
    )

    manifests = []
    for p in args.points:
        manifest = derive_point(baseline, p, out_root / f"p{p:g}")
        manifests.append((p, read_manifest(manifest)))

    report = evaluate_sweep(manifests)
    print(render_report(report, "csv"))
    print(render_report(report, "markdown"))


if __name__ == "__main__":
    main()
