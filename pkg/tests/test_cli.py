import json
import re

import numpy as np
import pytest

from umeval.cli import main
from umeval.logit_io import LogitFileMetadata, LogitMatrix, write_logit_file
from umeval.report import sweep_report_from_json

DIAG = re.compile(r"^umeval: error: [A-Za-z].*$")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_zero_file(tmp_path, name="zero.umlg", w=2, q=4):
    path = tmp_path / name
    write_logit_file(
        LogitMatrix(np.zeros((w, q), np.float32)),
        LogitFileMetadata("u0", "m", "encoder_raw"),
        path,
    )
    return path


def assert_last_line_diagnostic(err):
    lines = err.strip().splitlines()
    assert lines, "expected a diagnostic on stderr"
    assert "error:" in lines[-1], lines[-1]


class TestUmCommand:
    def test_plain_output(self, tmp_path, capsys):
        path = write_zero_file(tmp_path)
        code, out, _ = run(capsys, "um", str(path))
        assert code == 0
        assert out.strip() == "entropy=1.386294 mean=0 max=0 sd=0"

    def test_json_output(self, tmp_path, capsys):
        path = write_zero_file(tmp_path)
        code, out, _ = run(capsys, "um", str(path), "--json")
        assert code == 0
        obj = json.loads(out)
        assert set(obj) == {"mean", "max", "sd", "entropy"}
        assert all(isinstance(v, float) for v in obj.values())
        assert obj["entropy"] == pytest.approx(np.log(4))

    def test_missing_file_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "um", str(tmp_path / "nope.umlg"))
        assert code == 3
        assert "nope.umlg" in err.strip().splitlines()[-1]
        assert_last_line_diagnostic(err)

    def test_malformed_file_names_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.umlg"
        bad.write_bytes(b"not a logit file at all")
        code, _, err = run(capsys, "um", str(bad))
        assert code == 3
        assert "MalformedHeader" in err


@pytest.fixture()
def synth_manifest(tmp_path):
    code = main(["synth", "--n", "30", "--w", "4", "--q", "8", "--seed", "2",
                 "--out-dir", str(tmp_path / "ds")])
    assert code == 0
    return tmp_path / "ds" / "manifest.csv"


class TestEvalCommand:
    def test_csv_schema(self, synth_manifest, capsys):
        code, out, _ = run(capsys, "eval", str(synth_manifest), "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "um,srcc,ci_low,ci_high,n"
        assert len(out.splitlines()) == 5

    def test_deterministic_bytes(self, synth_manifest, capsys):
        args = ("eval", str(synth_manifest), "--format", "json",
                "--bootstrap", "100", "--seed", "7")
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_workers_do_not_change_bytes(self, synth_manifest, capsys):
        _, out1, _ = run(capsys, "eval", str(synth_manifest), "--workers", "1")
        _, out4, _ = run(capsys, "eval", str(synth_manifest), "--workers", "4")
        assert out1 == out4

    def test_two_row_manifest_exit_1(self, tmp_path, capsys):
        manifest = tmp_path / "m.csv"
        manifest.write_text(
            "utterance_id,mos,logit_path,task_id\na,3.5,a.umlg,t\nb,4.0,b.umlg,t\n",
            encoding="utf-8",
        )
        code, _, err = run(capsys, "eval", str(manifest))
        assert code == 1
        assert "TooFewUtterances" in err

    def test_unreadable_manifest_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "eval", str(tmp_path / "missing.csv"))
        assert code == 3
        assert_last_line_diagnostic(err)

    def test_bootstrap_without_seed_is_usage_error(self, synth_manifest, capsys):
        code, _, err = run(capsys, "eval", str(synth_manifest), "--bootstrap", "100")
        assert code == 2
        assert "--seed" in err

    def test_out_writes_file(self, synth_manifest, tmp_path, capsys):
        target = tmp_path / "report.md"
        code, out, _ = run(capsys, "eval", str(synth_manifest), "--out", str(target))
        assert code == 0
        assert out == ""
        assert "# Task synthetic-temperature" in target.read_text()

    def test_skips_reported_but_exit_zero(self, synth_manifest, capsys):
        # corrupt one logit file; evaluation still succeeds with a skip entry
        victim = synth_manifest.parent / "logits" / "utt0000.umlg"
        victim.write_bytes(b"junk")
        code, out, _ = run(capsys, "eval", str(synth_manifest))
        assert code == 0
        assert "## Skipped (1)" in out
        assert "utt0000" in out


class TestSweepCommand:
    @pytest.fixture()
    def sweep_spec(self, tmp_path):
        for i, seed in enumerate((1, 2, 3)):
            main(["synth", "--n", "30", "--w", "4", "--q", "8", "--seed", str(seed),
                  "--out-dir", str(tmp_path / f"p{i}")])
        spec = tmp_path / "sweep.csv"
        spec.write_text(
            "dropout_p,manifest_path\n"
            "0.2,p2/manifest.csv\n"
            "0,p0/manifest.csv\n"
            "0.1,p1/manifest.csv\n",
            encoding="utf-8",
        )
        return spec

    def test_three_points_ascending(self, sweep_spec, capsys):
        code, out, _ = run(capsys, "sweep", str(sweep_spec), "--format", "csv")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "p,um_mean,um_max,um_sd,um_entropy"
        assert [line.split(",")[0] for line in lines[1:]] == ["0.0", "0.1", "0.2"]

    def test_json_round_trips(self, sweep_spec, capsys):
        code, out, _ = run(capsys, "sweep", str(sweep_spec), "--format", "json")
        assert code == 0
        report = sweep_report_from_json(out)
        assert [p.dropout_p for p in report.points] == [0.0, 0.1, 0.2]

    def test_missing_baseline_exit_1(self, sweep_spec, capsys):
        text = sweep_spec.read_text().replace("0,p0", "0.3,p0")
        sweep_spec.write_text(text, encoding="utf-8")
        code, _, err = run(capsys, "sweep", str(sweep_spec))
        assert code == 1
        assert "MissingBaseline" in err

    def test_unreadable_spec_exit_3(self, tmp_path, capsys):
        code, _, err = run(capsys, "sweep", str(tmp_path / "nope.csv"))
        assert code == 3
        assert_last_line_diagnostic(err)

    def test_deterministic_across_workers(self, sweep_spec, capsys):
        _, out1, _ = run(capsys, "sweep", str(sweep_spec), "--workers", "1")
        _, out4, _ = run(capsys, "sweep", str(sweep_spec), "--workers", "4")
        assert out1 == out4


class TestSynthCommand:
    def test_default_tree(self, tmp_path, capsys):
        code, out, _ = run(capsys, "synth", "--n", "12", "--out-dir", str(tmp_path / "d"))
        assert code == 0
        assert out.strip().endswith("manifest.csv")
        assert len(list((tmp_path / "d" / "logits").glob("*.umlg"))) == 12
        assert (tmp_path / "d" / "ground_truth.json").exists()

    def test_identical_trees_for_same_flags(self, tmp_path, capsys):
        args = ["synth", "--n", "12", "--w", "3", "--q", "5", "--seed", "9"]
        main(args + ["--out-dir", str(tmp_path / "a")])
        main(args + ["--out-dir", str(tmp_path / "b")])
        a = {p.name: p.read_bytes() for p in sorted((tmp_path / "a").rglob("*")) if p.is_file()}
        b = {p.name: p.read_bytes() for p in sorted((tmp_path / "b").rglob("*")) if p.is_file()}
        assert a == b

    def test_q_one_usage_error(self, tmp_path, capsys):
        code, _, err = run(capsys, "synth", "--q", "1", "--out-dir", str(tmp_path))
        assert code == 2
        assert "error:" in err.strip().splitlines()[-1]

    def test_small_n_usage_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "synth", "--n", "5", "--out-dir", str(tmp_path))
        assert code == 2


class TestWerCommand:
    def test_identical_files_zero_corpus_wer(self, tmp_path, capsys):
        ref = tmp_path / "ref.txt"
        ref.write_text("a b c\nd e\n", encoding="utf-8")
        code, out, _ = run(capsys, "wer", "--ref", str(ref), "--hyp", str(ref))
        assert code == 0
        corpus = [line for line in out.splitlines() if line.startswith("corpus")][0]
        assert float(corpus.split("\t")[1]) == 0.0

    def test_line_count_mismatch_exit_2(self, tmp_path, capsys):
        ref = tmp_path / "ref.txt"
        hyp = tmp_path / "hyp.txt"
        ref.write_text("a\nb\nc\n", encoding="utf-8")
        hyp.write_text("a\nb\n", encoding="utf-8")
        code, _, err = run(capsys, "wer", "--ref", str(ref), "--hyp", str(hyp))
        assert code == 2
        assert_last_line_diagnostic(err)

    def test_corpus_wer_is_error_sum_ratio(self, tmp_path, capsys):
        # utterance WERs are 1/3 and 2/2; the corpus value must be the ratio
        # of summed errors to summed reference words, (1+2)/5, not the mean
        ref = tmp_path / "ref.txt"
        hyp = tmp_path / "hyp.txt"
        ref.write_text("a b c\nd e\n", encoding="utf-8")
        hyp.write_text("a x c\nd e f g\n", encoding="utf-8")
        code, out, _ = run(capsys, "wer", "--ref", str(ref), "--hyp", str(hyp))
        assert code == 0
        corpus = [line for line in out.splitlines() if line.startswith("corpus")][0]
        assert float(corpus.split("\t")[1]) == pytest.approx(0.6)
        per_utt = [float(line.split("\t")[1]) for line in out.splitlines()[1:3]]
        assert np.mean(per_utt) != pytest.approx(0.6)

    def test_empty_reference_line_exit_1(self, tmp_path, capsys):
        ref = tmp_path / "ref.txt"
        hyp = tmp_path / "hyp.txt"
        ref.write_text("a b\n\n", encoding="utf-8")
        hyp.write_text("a b\nc\n", encoding="utf-8")
        code, _, err = run(capsys, "wer", "--ref", str(ref), "--hyp", str(hyp))
        assert code == 1
        assert "EmptyReference" in err

    def test_decode_mode(self, tmp_path, capsys):
        vocab = tmp_path / "vocab.txt"
        vocab.write_text("#blank=0\n#word_delim=1\n-\n|\nh\ni\n", encoding="utf-8")
        logit = tmp_path / "u.umlg"
        ids = [2, 3, 0, 1, 2, 2, 3]  # h i _ | h(h) i -> "hi hi"
        m = np.full((len(ids), 4), -4.0, np.float32)
        for t, k in enumerate(ids):
            m[t, k] = 4.0
        write_logit_file(
            LogitMatrix(m), LogitFileMetadata("u", "m", "asr_head"), logit
        )
        manifest = tmp_path / "m.csv"
        manifest.write_text(
            "utterance_id,mos,logit_path,task_id,transcript_ref\n"
            "u,3.0,u.umlg,t,hi hi\n",
            encoding="utf-8",
        )
        code, out, _ = run(capsys, "wer", "--decode", str(manifest), "--vocab", str(vocab))
        assert code == 0
        row = out.splitlines()[1].split("\t")
        assert row[0] == "u"
        assert float(row[1]) == 0.0

    def test_decode_vocab_mismatch_exit_3(self, tmp_path, capsys):
        vocab = tmp_path / "vocab.txt"
        vocab.write_text("#blank=0\n-\na\nb\n", encoding="utf-8")  # 3 tokens, q=4
        logit = tmp_path / "u.umlg"
        write_logit_file(
            LogitMatrix(np.zeros((2, 4), np.float32)),
            LogitFileMetadata("u", "m", "asr_head"),
            logit,
        )
        manifest = tmp_path / "m.csv"
        manifest.write_text(
            "utterance_id,mos,logit_path,task_id,transcript_ref\nu,3.0,u.umlg,t,a b\n",
            encoding="utf-8",
        )
        code, _, err = run(capsys, "wer", "--decode", str(manifest), "--vocab", str(vocab))
        assert code == 3
        assert "VocabSizeMismatch" in err

    def test_conflicting_modes_usage_error(self, tmp_path, capsys):
        code, _, _ = run(capsys, "wer")
        assert code == 2


class TestUsageErrors:
    def test_unknown_flag(self, capsys):
        code, _, err = run(capsys, "um", "file", "--frobnicate")
        assert code == 2

    def test_unknown_subcommand(self, capsys):
        code, _, _ = run(capsys, "frobnicate")
        assert code == 2

    def test_help_lists_subcommands(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        for name in ("um", "eval", "sweep", "synth", "wer"):
            assert name in out

    def test_eval_help_lists_flags(self, capsys):
        code, out, _ = run(capsys, "eval", "--help")
        assert code == 0
        for flag in ("--bootstrap", "--level", "--seed", "--wer", "--format",
                     "--out", "--workers", "--vocab", "--hyp-tsv"):
            assert flag in out
