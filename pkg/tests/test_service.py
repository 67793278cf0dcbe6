"""HTTP service: endpoint behavior, shipped JSON schemas, library parity."""

import json
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

from assistlm.complete_sim import PrefixLexicon
from assistlm.corpus import SPECIALS
from assistlm.lm import save_model
from assistlm.qualitative import SubstitutionStudy, substitution_study, suggestion_list
from assistlm.service import create_app

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def _load_schema(name: str) -> dict:
    return json.loads((SCHEMA_DIR / name).read_text())


@pytest.fixture(scope="module")
def registry():
    resources = []
    for path in SCHEMA_DIR.glob("*.json"):
        schema = json.loads(path.read_text())
        resources.append((schema["$id"], Resource.from_contents(schema)))
    return Registry().with_resources(resources)


def _validate(payload, schema_name, registry):
    jsonschema.validate(payload, _load_schema(schema_name), registry=registry)


@pytest.fixture(scope="module")
def client(tmp_path_factory, tiny_models, tiny_vocab):
    from fastapi.testclient import TestClient

    model_dir = tmp_path_factory.mktemp("served-models")
    tiny_vocab.save(model_dir / "vocab.json")
    save_model(tiny_models["baseline"], model_dir / "base.ckpt")
    save_model(tiny_models["c+g"], model_dir / "full.ckpt")
    app = create_app(model_dir, model_dir / "vocab.json", default_k=5)
    return TestClient(app)


@pytest.fixture(scope="module")
def sample_doc(tiny_test_docs):
    return next(d for d in tiny_test_docs if d.meta.graded_slots)


def _kb_json(doc):
    return [{"attribute": t.attribute, "value": t.value} for t in doc.kb]


# --- GET /v1/models -----------------------------------------------------------

def test_models_listing(client, registry, tiny_vocab):
    r = client.get("/v1/models")
    assert r.status_code == 200
    body = r.json()
    _validate(body, "models-response.json", registry)
    by_id = {m["model_id"]: m for m in body}
    assert set(by_id) == {"base", "full"}
    assert by_id["base"]["variant"] == "baseline"
    assert not by_id["base"]["conditional"]
    assert by_id["full"]["variant"] == "c+g"
    assert by_id["full"]["conditional"] and by_id["full"]["grounded"]
    assert by_id["full"]["vocab_size"] == len(tiny_vocab)


def test_empty_model_dir_lists_nothing(tmp_path, tiny_vocab):
    from fastapi.testclient import TestClient

    tiny_vocab.save(tmp_path / "vocab.json")
    app = create_app(tmp_path, tmp_path / "vocab.json")
    assert TestClient(app).get("/v1/models").json() == []


# --- POST /v1/predict ------------------------------------------------------------

def test_predict_schema_and_ordering(client, registry, sample_doc):
    req = {"model_id": "full", "context_tokens": sample_doc.words[:3],
           "kb": _kb_json(sample_doc), "k": 7}
    _validate(req, "predict-request.json", registry)
    r = client.post("/v1/predict", json=req)
    assert r.status_code == 200
    body = r.json()
    _validate(body, "predict-response.json", registry)
    suggestions = body["suggestions"]
    assert [s["rank"] for s in suggestions] == list(range(1, 8))
    probs = [s["probability"] for s in suggestions]
    assert probs == sorted(probs, reverse=True)
    assert all(s["word"] not in SPECIALS for s in suggestions)


def test_predict_parity_with_suggestion_list(client, tiny_models, sample_doc):
    position = 4
    req = {"model_id": "full", "context_tokens": sample_doc.words[:position],
           "kb": _kb_json(sample_doc), "k": 5}
    served = client.post("/v1/predict", json=req).json()["suggestions"]
    offline = suggestion_list(tiny_models["c+g"], sample_doc, position, k=30)
    words = [i.word for i in offline.items if i.word not in SPECIALS][:5]
    assert [s["word"] for s in served] == words


def test_predict_default_k_and_ablation_echo(client):
    r = client.post("/v1/predict", json={
        "model_id": "full", "context_tokens": [], "kb": [],
        "ablation": {"ignore_kb": True}})
    body = r.json()
    assert len(body["suggestions"]) == 5
    assert body["ablation"] == {"ignore_kb": True, "ignore_values": False}


def test_predict_is_stateless(client, sample_doc):
    req = {"model_id": "full", "context_tokens": sample_doc.words[:5],
           "kb": _kb_json(sample_doc)}
    first = client.post("/v1/predict", json=req)
    second = client.post("/v1/predict", json=req)
    assert first.content == second.content


def test_predict_unknown_model_404(client):
    r = client.post("/v1/predict", json={"model_id": "ghost",
                                         "context_tokens": [], "kb": []})
    assert r.status_code == 404


def test_predict_malformed_body_has_field_diagnostics(client):
    r = client.post("/v1/predict", json={"context_tokens": [], "kb": []})
    assert r.status_code == 400
    fields = [d["field"] for d in r.json()["detail"]]
    assert "model_id" in fields

    r = client.post("/v1/predict", json={"model_id": "full", "k": 0,
                                         "context_tokens": [], "kb": []})
    assert r.status_code == 400
    assert any(d["field"] == "k" for d in r.json()["detail"])

    r = client.post("/v1/predict", json={"model_id": "full", "context": []})
    assert r.status_code == 400   # unknown field rejected, not ignored


# --- POST /v1/complete --------------------------------------------------------------

def test_complete_schema_and_parity(client, registry, tiny_models, sample_doc):
    model = tiny_models["c+g"]
    lexicon = PrefixLexicon(model.vocab)
    position = 2
    target = sample_doc.words[position]
    logp, _ = model.forward_document(sample_doc)
    import numpy as np
    scores = np.exp(logp[position])

    for plen in range(1, len(target) + 1):
        prefix = target[:plen]
        req = {"model_id": "full", "context_tokens": sample_doc.words[:position],
               "kb": _kb_json(sample_doc), "prefix": prefix}
        _validate(req, "complete-request.json", registry)
        r = client.post("/v1/complete", json=req)
        assert r.status_code == 200
        body = r.json()
        _validate(body, "complete-response.json", registry)
        offline = lexicon.best_match(prefix, scores)
        if offline is None:
            assert body["suggestion"] is None
        else:
            assert body["suggestion"] == offline[0]


def test_complete_no_match_is_null(client, registry):
    r = client.post("/v1/complete", json={
        "model_id": "base", "context_tokens": [], "kb": [], "prefix": "zzzzq"})
    body = r.json()
    _validate(body, "complete-response.json", registry)
    assert body == {"suggestion": None, "probability": None}


def test_complete_empty_prefix_rejected(client):
    r = client.post("/v1/complete", json={
        "model_id": "base", "context_tokens": [], "kb": [], "prefix": ""})
    assert r.status_code == 400


def test_predict_top1_consistent_with_complete(client):
    # whenever the top-1 word is the unique match of its first character,
    # /complete with that prefix must surface the same word
    top = client.post("/v1/predict", json={
        "model_id": "base", "context_tokens": ["the"], "kb": [], "k": 1})
    word = top.json()["suggestions"][0]["word"]
    comp = client.post("/v1/complete", json={
        "model_id": "base", "context_tokens": ["the"], "kb": [],
        "prefix": word}).json()
    assert comp["suggestion"] is not None
    assert comp["suggestion"].startswith(word)


# --- POST /v1/substitution -----------------------------------------------------------

def test_substitution_schema_and_parity(client, registry, tiny_models,
                                        tiny_vocab, sample_doc):
    slot = sample_doc.meta.graded_slots[0]
    attr = slot.attribute
    req = {
        "model_id": "full",
        "text": sample_doc.raw_text,
        "kb": _kb_json(sample_doc),
        "value_positions": {k: list(v) for k, v in
                            sample_doc.meta.value_positions.items()},
        "slot_position": slot.position,
        "candidates": slot.candidates,
        "configurations": [{attr: 20.0}, {attr: 70.0}],
    }
    _validate(req, "substitution-request.json", registry)
    r = client.post("/v1/substitution", json=req)
    assert r.status_code == 200
    body = r.json()
    _validate(body, "substitution-response.json", registry)

    study = SubstitutionStudy(doc=sample_doc, slot_position=slot.position,
                              candidates=slot.candidates,
                              configurations=[{attr: 20.0}, {attr: 70.0}])
    offline = substitution_study(tiny_models["c+g"], study).to_dict()
    assert body == offline


def test_substitution_single_candidate_is_one(client, sample_doc):
    slot = sample_doc.meta.graded_slots[0]
    r = client.post("/v1/substitution", json={
        "model_id": "full", "text": sample_doc.raw_text,
        "kb": _kb_json(sample_doc),
        "value_positions": {}, "slot_position": slot.position,
        "candidates": [slot.candidates[0]],
        "configurations": [{slot.attribute: 30.0}]})
    row = r.json()["rows"][0]
    assert row["probabilities"][slot.candidates[0]] == pytest.approx(1.0)


def test_substitution_oov_candidate_400(client, sample_doc):
    slot = sample_doc.meta.graded_slots[0]
    r = client.post("/v1/substitution", json={
        "model_id": "full", "text": sample_doc.raw_text,
        "kb": _kb_json(sample_doc),
        "value_positions": {}, "slot_position": slot.position,
        "candidates": ["notaword"],
        "configurations": [{slot.attribute: 30.0}]})
    assert r.status_code == 400
