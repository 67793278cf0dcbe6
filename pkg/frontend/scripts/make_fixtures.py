#!/usr/bin/env python3
"""Regenerate the demo's parity fixtures from the assistlm package.

Trains a small deterministic checkpoint, runs the offline evaluators through
the CLI, and records the exact JSON bodies the HTTP service returns for every
request the scripted replay will make.  The frontend tests then replay typing
against those recorded wire responses and compare tallies/grids against the
CLI reports — no Python needed at test time.

Usage (from the repository root, with assistlm installed):

    python3 frontend/scripts/make_fixtures.py

Rewrites frontend/tests/fixtures/replay.json and whatif.json in place.
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from assistlm import cli
from assistlm.corpus import CorpusSplit, Vocabulary, save_split
from assistlm.generator import default_config, generate_corpus
from assistlm.service import create_app

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
MODEL_ID = "c+g-seed5"
REPLAY_DOCS = 3
SUBSTITUTION_VALUES = [20.0, 45.0, 70.0]


def kb_body(doc):
    return [{"attribute": t.attribute, "value": t.value} for t in doc.kb]


def run_cli(*args):
    code = cli.main([str(a) for a in args])
    if code != 0:
        raise SystemExit(f"cli {args[0]} failed with exit code {code}")


def record(client, path, body):
    resp = client.post(path, json=body)
    resp.raise_for_status()
    return {"path": path, "body": body, "response": resp.json()}


def main():
    work = Path(tempfile.mkdtemp(prefix="assistlm-fixtures-"))
    corpus_dir = work / "corpus"
    run_dir = work / "run"

    split = generate_corpus(default_config(n_docs=80), seed=13)
    replay = split.test[:REPLAY_DOCS]
    save_split(CorpusSplit(train=split.train, dev=split.dev,
                           test=replay, seed=13), corpus_dir)

    run_cli("train", "--corpus", corpus_dir, "--out", run_dir,
            "--variant", "c+g", "--hidden-dim", 12, "--epochs", 3,
            "--minibatch", 8, "--vocab-budget", 300, "--seed", 5)
    vocab_path = run_dir / "vocab.json"
    ckpt = run_dir / f"{MODEL_ID}.ckpt"

    run_cli("eval-complete", "--corpus", corpus_dir, "--vocab", vocab_path,
            "--model", ckpt, "--split", "test", "--out", work / "complete.json")
    complete_report = json.loads((work / "complete.json").read_text())

    client = TestClient(create_app(run_dir, vocab_path))
    exchanges = []
    docs = []
    for doc in replay:
        words = doc.words
        kb = kb_body(doc)
        docs.append({"id": doc.id, "words": words, "kb": kb})
        for i, word in enumerate(words):
            context = words[:i]
            exchanges.append(record(client, "/v1/predict", {
                "model_id": MODEL_ID, "context_tokens": context,
                "kb": kb, "k": 5}))
            for plen in range(1, len(word) + 1):
                exchanges.append(record(client, "/v1/complete", {
                    "model_id": MODEL_ID, "context_tokens": context,
                    "kb": kb, "prefix": word[:plen]}))

    replay_fixture = {
        "model_id": MODEL_ID,
        "docs": docs,
        "exchanges": exchanges,
        "expected_tally": complete_report["tally"],
        "expected_metrics": complete_report["metrics"],
    }

    # Substitution parity: a replay doc with an in-vocab graded slot.
    vocab = Vocabulary.load(vocab_path)
    doc_index, slot = next(
        (i, g) for i, d in enumerate(replay) for g in d.meta.graded_slots
        if g.attribute == "ef" and all(c in vocab.index for c in g.candidates))
    doc = replay[doc_index]

    run_cli("qualitative", "--corpus", corpus_dir, "--vocab", vocab_path,
            "--model", ckpt, "--split", "test", "--doc-index", doc_index,
            "--attribute", slot.attribute,
            "--values", ",".join(str(v) for v in SUBSTITUTION_VALUES),
            "--out", work / "qualitative.json")
    cli_grid = json.loads(
        (work / "qualitative.json").read_text())["substitution"]["grid"]

    request = {
        "model_id": MODEL_ID,
        "text": doc.raw_text,
        "kb": kb_body(doc),
        "value_positions": doc.meta.value_positions,
        "slot_position": slot.position,
        "candidates": slot.candidates,
        "configurations": [{slot.attribute: v} for v in SUBSTITUTION_VALUES],
    }
    service_grid = record(client, "/v1/substitution", request)["response"]

    whatif_fixture = {
        "model_id": MODEL_ID,
        "doc_id": doc.id,
        "attribute": slot.attribute,
        "request": request,
        "service_grid": service_grid,
        "cli_grid": cli_grid,
    }

    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for name, payload in (("replay.json", replay_fixture),
                          ("whatif.json", whatif_fixture)):
        path = FIXTURE_DIR / name
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        print(f"wrote {path} ({path.stat().st_size} bytes)")
    n_words = sum(len(d["words"]) for d in docs)
    print(f"{len(docs)} docs, {n_words} words, {len(exchanges)} exchanges; "
          f"expected tally {replay_fixture['expected_tally']}")


if __name__ == "__main__":
    sys.exit(main())
