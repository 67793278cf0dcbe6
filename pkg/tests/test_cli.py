"""Command-line pipeline: subcommands, exit codes, precedence, determinism."""

import json
import os
import subprocess
import sys

import pytest

from assistlm.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """gen-corpus + two trained variants, shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    models = root / "models"
    assert run("gen-corpus", "--out", str(corpus), "--n-docs", "40",
               "--seed", "9") == EXIT_OK
    common = ["--corpus", str(corpus), "--out", str(models),
              "--hidden-dim", "10", "--epochs", "1", "--vocab-budget", "200",
              "--minibatch", "8", "--seed", "2"]
    assert run("train", "--variant", "baseline", *common) == EXIT_OK
    assert run("train", "--variant", "c+g", *common) == EXIT_OK
    return {"root": root, "corpus": corpus, "models": models,
            "vocab": models / "vocab.json",
            "baseline": models / "baseline-seed2.ckpt",
            "full": models / "c+g-seed2.ckpt"}


def test_gen_corpus_writes_three_splits(pipeline):
    names = {p.name for p in pipeline["corpus"].iterdir()}
    assert {"train.jsonl", "dev.jsonl", "test.jsonl"} <= names


def test_train_artifacts_exist(pipeline):
    assert pipeline["vocab"].exists()
    assert pipeline["baseline"].exists()
    report = json.loads((pipeline["models"] / "train-c+g-seed2.json").read_text())
    assert report["task"] == "train"
    assert report["variant"] == "c+g"
    assert report["dev_perplexity"] > 1.0


def test_eval_predict_report_and_csv(pipeline, tmp_path):
    out = tmp_path / "p.json"
    csv_path = tmp_path / "p.csv"
    assert run("eval-predict", "--corpus", str(pipeline["corpus"]),
               "--vocab", str(pipeline["vocab"]),
               "--model", str(pipeline["full"]),
               "--out", str(out), "--csv", str(csv_path)) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["task"] == "predict"
    assert 0.0 <= report["metrics"]["mrr"] <= 1.0
    header, *rows = csv_path.read_text().strip().splitlines()
    assert header == "doc_id,position,target,rank"
    assert len(rows) == report["metrics"]["n_positions"]


def test_eval_complete_report_and_log(pipeline, tmp_path):
    out = tmp_path / "c.json"
    log = tmp_path / "events.csv"
    assert run("eval-complete", "--corpus", str(pipeline["corpus"]),
               "--vocab", str(pipeline["vocab"]),
               "--model", str(pipeline["baseline"]),
               "--out", str(out), "--log", str(log)) == EXIT_OK
    report = json.loads(out.read_text())
    tally = report["tally"]
    assert tally["typed_keys"] + tally["accepted_chars"] == tally["total_chars"]
    header = log.read_text().splitlines()[0]
    assert header == "doc_id,word_index,word,accepted,prefix_len_at_accept,distraction_chars"


def test_bounds_report(pipeline, tmp_path):
    out = tmp_path / "b.json"
    assert run("bounds", "--corpus", str(pipeline["corpus"]),
               "--vocab", str(pipeline["vocab"]), "--out", str(out)) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["theoretical"]["metrics"]["ks"] >= \
        report["vocabulary"]["metrics"]["ks"]


def test_qualitative_report_with_ratio_tsv(pipeline, tmp_path):
    out = tmp_path / "q.json"
    tsv = tmp_path / "r.tsv"
    assert run("qualitative", "--corpus", str(pipeline["corpus"]),
               "--vocab", str(pipeline["vocab"]),
               "--model", str(pipeline["full"]),
               "--model-b", str(pipeline["baseline"]),
               "--tsv", str(tsv), "--out", str(out)) == EXIT_OK
    report = json.loads(out.read_text())
    assert "suggestion_list" in report
    assert "substitution" in report
    lines = tsv.read_text().splitlines()
    assert lines[0] == "token\tratio"
    assert len(lines) == len(report["likelihood_ratio"]["series"]["tokens"]) + 1


def test_report_merges_without_recomputation(pipeline, tmp_path):
    p_out = tmp_path / "p.json"
    c_out = tmp_path / "c.json"
    run("eval-predict", "--corpus", str(pipeline["corpus"]),
        "--vocab", str(pipeline["vocab"]), "--model", str(pipeline["full"]),
        "--out", str(p_out))
    run("eval-complete", "--corpus", str(pipeline["corpus"]),
        "--vocab", str(pipeline["vocab"]), "--model", str(pipeline["full"]),
        "--ablation", "kb", "--out", str(c_out))
    merged = tmp_path / "merged.json"
    txt = tmp_path / "merged.txt"
    csv_path = tmp_path / "merged.csv"
    assert run("report", str(p_out), str(c_out), "--out", str(merged),
               "--txt", str(txt), "--csv", str(csv_path)) == EXIT_OK
    tables = json.loads(merged.read_text())["tables"]
    predict_rows = {r["label"]: r for r in tables["predict"]}
    complete_rows = {r["label"]: r for r in tables["complete"]}
    # verbatim copy, no drift
    assert predict_rows["+c+g"]["cells"]["MRR"] == \
        json.loads(p_out.read_text())["metrics"]["mrr"]
    assert complete_rows["+c+g-kb"]["cells"]["KS"] == \
        json.loads(c_out.read_text())["metrics"]["ks"]
    assert "+c+g" in txt.read_text()
    assert csv_path.read_text().startswith("predict,MRR")


def test_rerun_reports_are_byte_identical(pipeline, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["eval-predict", "--corpus", str(pipeline["corpus"]),
            "--vocab", str(pipeline["vocab"]), "--model", str(pipeline["baseline"])]
    run(*args, "--out", str(a))
    run(*args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_interactive_replay_reports_metrics(pipeline, capsys, monkeypatch):
    import io
    monkeypatch.setattr("sys.stdin", io.StringIO("the pati\tent "))
    assert run("interactive", "--model", str(pipeline["baseline"]),
               "--vocab", str(pipeline["vocab"])) == EXIT_OK
    out = capsys.readouterr().out
    assert "final: KS" in out
    assert "next word:" in out


# --- exit codes ---------------------------------------------------------------

def test_usage_error_exit_2(tmp_path):
    assert run("train", "--corpus", str(tmp_path), "--variant", "baseline") \
        == EXIT_USAGE   # --out missing
    with pytest.raises(SystemExit) as exc:
        run("train", "--variant", "not-a-variant")
    assert exc.value.code == 2


def test_data_error_exit_3(pipeline, tmp_path):
    assert run("eval-predict", "--corpus", str(tmp_path / "missing"),
               "--vocab", str(pipeline["vocab"]),
               "--model", str(pipeline["baseline"]),
               "--out", str(tmp_path / "x.json")) == EXIT_DATA
    # corrupted checkpoint is a data error too
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"garbage")
    assert run("eval-predict", "--corpus", str(pipeline["corpus"]),
               "--vocab", str(pipeline["vocab"]), "--model", str(bad),
               "--out", str(tmp_path / "x.json")) == EXIT_DATA


def test_numeric_error_exit_4(pipeline, tmp_path):
    import numpy as np
    with np.errstate(invalid="ignore"):
        code = run("train", "--corpus", str(pipeline["corpus"]),
                   "--out", str(tmp_path), "--variant", "g",
                   "--hidden-dim", "6", "--epochs", "1",
                   "--vocab-budget", "100", "--value-scale", "inf")
    assert code == EXIT_NUMERIC


# --- option precedence -----------------------------------------------------------

def test_flag_beats_env_beats_file_beats_default(pipeline, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs": 3, "hidden_dim": 6}))
    out_dir = tmp_path / "m1"
    monkeypatch.setenv("ASSISTLM_EPOCHS", "2")
    # env (2) beats file (3); flag --hidden-dim 8 beats file (6)
    assert run("train", "--corpus", str(pipeline["corpus"]),
               "--out", str(out_dir), "--variant", "baseline",
               "--config", str(cfg), "--hidden-dim", "8",
               "--vocab-budget", "100", "--seed", "1") == EXIT_OK
    report = json.loads((out_dir / "train-baseline-seed1.json").read_text())
    assert report["config"]["epochs"] == 2
    assert report["config"]["hidden_dim"] == 8
    assert report["config"]["minibatch"] == 64    # untouched default
    monkeypatch.delenv("ASSISTLM_EPOCHS")


def test_console_script_entry_point(pipeline):
    proc = subprocess.run(
        [sys.executable, "-m", "assistlm.cli", "bounds",
         "--corpus", str(pipeline["corpus"]),
         "--vocab", str(pipeline["vocab"]),
         "--out", str(pipeline["root"] / "bounds.json")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "theoretical KS" in proc.stdout
