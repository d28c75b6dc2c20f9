"""Acceptance gate: property suites plus planted-signal recovery.

Each test prints one ``ACCEPTANCE <criterion>: PASS|FAIL`` line and enforces
its runtime budget. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import functools
import json
import math
import struct
import time

import numpy as np
import pytest

from oracles import levenshtein, naive_entropy, naive_spearman
from umeval.cli import main
from umeval.errors import (
    MalformedHeader,
    NonFiniteValue,
    ShapeMismatch,
    UnsupportedShape,
)
from umeval.logit_io import (
    LogitFileMetadata,
    LogitMatrix,
    read_logit_file,
    write_logit_file,
)
from umeval.stats import PairedSeries, spearman
from umeval.um import window_entropy
from umeval.wer import wer


def criterion(name, budget_s):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nACCEPTANCE {name}: FAIL")
                raise
            elapsed = time.perf_counter() - start
            print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s, budget {budget_s}s)")
            assert elapsed < budget_s, f"{name} took {elapsed:.2f}s, budget {budget_s}s"

        return wrapper

    return decorate


@criterion("entropy-correctness", 5.0)
def test_entropy_matches_extended_precision_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        q = int(rng.integers(2, 513))
        scale = float(rng.choice([0.1, 1.0, 10.0, 100.0]))
        row = rng.normal(0.0, scale, q)
        h = window_entropy(row)
        assert 0.0 <= h <= math.log(q)
        assert h == pytest.approx(naive_entropy(row), abs=1e-10)


@criterion("shift-and-sharpening", 5.0)
def test_shift_invariance_and_sharpening_monotonicity():
    rng = np.random.default_rng(7)
    for _ in range(100):
        q = int(rng.integers(2, 65))
        row = rng.normal(0.0, 3.0, q)
        row[int(rng.integers(q))] += 1.0  # unique maximum
        shift = float(rng.uniform(-100.0, 100.0))
        assert window_entropy(row + shift) == pytest.approx(
            window_entropy(row), abs=1e-12
        )
        centered = row - row.mean()
        entropies = [window_entropy(s * centered) for s in (1, 2, 4, 8)]
        assert all(a > b for a, b in zip(entropies, entropies[1:]))


@criterion("srcc-oracle-equivalence", 10.0)
def test_spearman_matches_naive_rank_pearson():
    assert spearman(PairedSeries([1, 2, 2, 4], [1, 3, 2, 4])) == pytest.approx(
        0.9486833, abs=1e-7
    )
    rng = np.random.default_rng(101)
    checked = 0
    while checked < 1000:
        n = int(rng.integers(3, 101))
        tie_mass = float(rng.uniform(0.0, 0.5))

        def draw():
            values = rng.normal(0.0, 10.0, n)
            snap = rng.random(n) < tie_mass
            values[snap] = np.round(values[snap] / 5.0) * 5.0  # coarse tie grid
            return values

        x, y = draw(), draw()
        if np.all(x == x[0]) or np.all(y == y[0]):
            continue
        assert spearman(PairedSeries(x, y)) == pytest.approx(
            naive_spearman(x, y), abs=1e-12
        )
        checked += 1


@criterion("wer-oracle-equivalence", 10.0)
def test_wer_edit_counts_match_levenshtein_oracle():
    rng = np.random.default_rng(55)
    alphabet = ["a", "b", "c", "d", "e"]
    for _ in range(1000):
        ref = [alphabet[k] for k in rng.integers(0, 5, size=rng.integers(1, 13))]
        hyp = [alphabet[k] for k in rng.integers(0, 5, size=rng.integers(0, 13))]
        b = wer(ref, hyp)
        assert b.substitutions + b.deletions + b.insertions == levenshtein(ref, hyp)
        assert b.insertions - b.deletions == len(hyp) - len(ref)


@criterion("exchange-format-round-trip", 5.0)
def test_exchange_format_round_trip_and_malformed_fixtures(tmp_path):
    rng = np.random.default_rng(9)
    sources = ("contrastive", "asr_head", "encoder_raw")
    path = tmp_path / "rt.umlg"
    for i in range(500):
        w = int(rng.integers(1, 9))
        q = int(rng.integers(2, 17))
        matrix = LogitMatrix(rng.normal(0, 50, size=(w, q)).astype(np.float32))
        dropout = float(rng.choice([0.0, 0.25, 0.5]))
        meta = LogitFileMetadata(
            utterance_id=f"u{i}",
            model_id=f"model-{i % 7}",
            logit_source=sources[i % 3],
            dropout_p=dropout,
            num_passes=1 if dropout == 0.0 else int(rng.integers(2, 101)),
            sample_rate_hz=int(rng.choice([8000, 16000, 44100])),
        )
        write_logit_file(matrix, meta, path)
        back, meta_back = read_logit_file(path)
        assert back.values.tobytes() == matrix.values.tobytes()
        assert meta_back == meta

    meta_bytes = json.dumps(
        LogitFileMetadata("u", "m", "encoder_raw").to_json_dict(), sort_keys=True
    ).encode()

    def header(magic=b"UMLG", w=2, q=3):
        return struct.pack(
            "<4sBBBBBBIII", magic, 1, 0, 0, 0, 1, 1, w, q, len(meta_bytes)
        )

    fixtures = [
        (header(magic=b"XXXX") + meta_bytes + b"\x00" * 24, MalformedHeader),
        (header() + meta_bytes + b"\x00" * 20, ShapeMismatch),  # short payload
        (
            header()
            + meta_bytes
            + struct.pack("<6f", 0, 0, float("nan"), 0, 0, 0),
            NonFiniteValue,
        ),
        (header(w=1, q=1) + meta_bytes + b"\x00" * 4, UnsupportedShape),
    ]
    for raw, expected_error in fixtures:
        bad = tmp_path / "bad.umlg"
        bad.write_bytes(raw)
        with pytest.raises(expected_error):
            read_logit_file(bad)


def _eval_csv(manifest, out_path, *extra):
    code = main(
        ["eval", str(manifest), "--format", "csv", "--out", str(out_path), *extra]
    )
    assert code == 0
    rows = [line.split(",") for line in out_path.read_text().strip().splitlines()[1:]]
    return {row[0]: float(row[1]) for row in rows}


@criterion("planted-signal-end-to-end", 60.0)
def test_synthetic_pipeline_recovers_planted_signs(tmp_path):
    for seed in range(10):
        root = tmp_path / f"seed{seed}"
        code = main(
            ["synth", "--n", "200", "--w", "16", "--q", "32", "--law", "temperature",
             "--seed", str(seed), "--out-dir", str(root)]
        )
        assert code == 0
        srcc = _eval_csv(root / "manifest.csv", root / "report.csv")
        if seed == 0:
            assert srcc["entropy"] <= -0.9, srcc
            assert srcc["max"] >= 0.9, srcc
        assert srcc["entropy"] < 0 < srcc["max"], (seed, srcc)


@criterion("byte-determinism", 60.0)
def test_eval_and_sweep_are_byte_deterministic(tmp_path):
    for seed in (0, 1):
        main(["synth", "--n", "60", "--w", "8", "--q", "16", "--seed", str(seed),
              "--out-dir", str(tmp_path / f"d{seed}")])
    manifest = tmp_path / "d0" / "manifest.csv"

    outputs = []
    for run in range(2):
        for workers in (1, 4):
            out = tmp_path / f"eval-{run}-{workers}.csv"
            code = main(
                ["eval", str(manifest), "--format", "csv", "--out", str(out),
                 "--bootstrap", "200", "--seed", "13", "--workers", str(workers)]
            )
            assert code == 0
            outputs.append(out.read_bytes())
    assert len(set(outputs)) == 1

    spec = tmp_path / "sweep.csv"
    spec.write_text(
        "dropout_p,manifest_path\n0,d0/manifest.csv\n0.1,d1/manifest.csv\n",
        encoding="utf-8",
    )
    sweep_outputs = []
    for run in range(2):
        for workers in (1, 4):
            out = tmp_path / f"sweep-{run}-{workers}.csv"
            code = main(
                ["sweep", str(spec), "--format", "csv", "--out", str(out),
                 "--workers", str(workers)]
            )
            assert code == 0
            sweep_outputs.append(out.read_bytes())
    assert len(set(sweep_outputs)) == 1
