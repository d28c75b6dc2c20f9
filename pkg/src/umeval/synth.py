"""Synthetic self-test datasets with a planted quality signal.

Each utterance gets a quality score s drawn uniform in [1, 5] and a logit
matrix whose sharpness encodes s:

* temperature law: logits = t * z with z standard normal, centered per
  window, and t = 0.5 + s. Centering makes the entropy/scale monotonicity
  exact, so entropy anti-correlates and max correlates with quality.
* noise law: a one-hot spike per window is corrupted by zero-mean Gaussian
  noise whose sd decreases in s (3.0 at s=1 down to 0.1 at s=5), then the
  window is re-standardized to a fixed scale. Re-standardizing is what
  makes noise wash out structure instead of adding logit energy; raw
  additive noise would *sharpen* the softmax and flip the planted sign.
  The planted signal is weaker than the temperature law's.

Output tree: ``logits/*.umlg``, ``manifest.csv`` (relative paths, so the
tree is relocatable) and ``ground_truth.json`` mapping utterance_id to
{quality, law_params}. Byte-identical for identical specs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure
from .logit_io import LogitFileMetadata, LogitMatrix, write_logit_file, write_manifest

QUALITY_LAWS = ("temperature", "noise")

NOISE_SD_AT_WORST = 3.0
NOISE_SD_AT_BEST = 0.1
NOISE_SPIKE_HEIGHT = 4.0
NOISE_OUTPUT_SCALE = 1.5


@dataclass(frozen=True)
class SyntheticSpec:
    n_utterances: int = 200
    w: int = 16
    q: int = 32
    quality_law: str = "temperature"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_utterances < 10:
            raise ValueError(f"need n_utterances >= 10, got {self.n_utterances}")
        if self.w < 1:
            raise ValueError(f"need w >= 1, got {self.w}")
        if self.q < 2:
            raise ValueError(f"need q >= 2, got {self.q}")
        if self.quality_law not in QUALITY_LAWS:
            raise ValueError(f"quality_law must be one of {QUALITY_LAWS}")


def _temperature_logits(rng: np.random.Generator, s: float, w: int, q: int):
    z = rng.standard_normal((w, q))
    z = z - z.mean(axis=1, keepdims=True)
    t = 0.5 + s
    return t * z, {"law": "temperature", "t": t}


def _noise_logits(rng: np.random.Generator, s: float, w: int, q: int):
    sd = NOISE_SD_AT_WORST + (s - 1.0) / 4.0 * (NOISE_SD_AT_BEST - NOISE_SD_AT_WORST)
    winners = rng.integers(0, q, size=w)
    c = np.zeros((w, q))
    c[np.arange(w), winners] = NOISE_SPIKE_HEIGHT
    c = c + rng.normal(0.0, sd, size=(w, q))
    c = c - c.mean(axis=1, keepdims=True)
    c = NOISE_OUTPUT_SCALE * c / c.std(axis=1, keepdims=True)
    return c, {"law": "noise", "noise_sd": sd}


def generate_synthetic(spec: SyntheticSpec, out_dir: str | Path) -> Path:
    """Write the dataset under out_dir; returns the manifest path."""
    out_dir = Path(out_dir)
    logit_dir = out_dir / "logits"
    try:
        logit_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {logit_dir}: {exc}") from exc

    rng = np.random.default_rng(spec.seed)
    law = _temperature_logits if spec.quality_law == "temperature" else _noise_logits
    task_id = f"synthetic-{spec.quality_law}"

    rows = []
    ground_truth = {}
    for i in range(spec.n_utterances):
        uid = f"utt{i:04d}"
        s = float(rng.uniform(1.0, 5.0))
        values, params = law(rng, s, spec.w, spec.q)
        matrix = LogitMatrix(values.astype(np.float32))
        meta = LogitFileMetadata(
            utterance_id=uid,
            model_id=task_id,
            logit_source="encoder_raw",
        )
        rel_path = f"logits/{uid}.umlg"
        write_logit_file(matrix, meta, out_dir / rel_path)
        rows.append(
            {
                "utterance_id": uid,
                "mos": repr(s),
                "logit_path": rel_path,
                "task_id": task_id,
            }
        )
        ground_truth[uid] = {"quality": s, "law_params": params}

    manifest_path = out_dir / "manifest.csv"
    write_manifest(rows, manifest_path)
    try:
        (out_dir / "ground_truth.json").write_text(
            json.dumps(ground_truth, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write ground truth: {exc}") from exc
    return manifest_path
