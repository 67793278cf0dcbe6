"""Stateless HTTP JSON API over trained checkpoints: next-word prediction,
prefix completion, and the value-substitution study.

Every request carries its full context (no sessions); responses are pure
functions of (request body, loaded checkpoints).  Mask symbols never appear
in user-facing suggestion lists.  Malformed bodies map to 400 with field
diagnostics, unknown model ids to 404.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .complete_sim import PrefixLexicon
from .corpus import Document, DocMeta, KbTuple, Vocabulary, encode
from .errors import DataError
from .lm import AblationFlags, LanguageModel, load_model
from .qualitative import SubstitutionStudy, substitution_study

logger = logging.getLogger(__name__)

CHECKPOINT_SUFFIX = ".ckpt"


class ModelStore:
    """Immutable set of models loaded from a checkpoint directory."""

    def __init__(self, model_dir, vocab_path):
        self.vocab = Vocabulary.load(vocab_path)
        self.models: dict[str, LanguageModel] = {}
        self.lexicon = PrefixLexicon(self.vocab)
        for path in sorted(Path(model_dir).glob(f"*{CHECKPOINT_SUFFIX}")):
            model_id = path.stem
            self.models[model_id] = load_model(path, self.vocab)
            logger.info("loaded model %r (%s)", model_id,
                        self.models[model_id].config.variant)

    def get(self, model_id: str) -> LanguageModel | None:
        return self.models.get(model_id)


class KbTupleBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    attribute: str
    value: float | str | None = None


class AblationBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ignore_kb: bool = False
    ignore_values: bool = False

    def to_flags(self) -> AblationFlags:
        return AblationFlags(ignore_kb=self.ignore_kb, ignore_values=self.ignore_values)


class PredictRequest(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), extra="forbid")

    model_id: str
    context_tokens: list[str] = Field(default_factory=list)
    kb: list[KbTupleBody] = Field(default_factory=list)
    k: int | None = Field(default=None, ge=1)
    ablation: AblationBody = Field(default_factory=AblationBody)


class CompleteRequest(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), extra="forbid")

    model_id: str
    context_tokens: list[str] = Field(default_factory=list)
    kb: list[KbTupleBody] = Field(default_factory=list)
    prefix: str = Field(min_length=1)
    ablation: AblationBody = Field(default_factory=AblationBody)


class SubstitutionRequest(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), extra="forbid")

    model_id: str
    text: str
    kb: list[KbTupleBody] = Field(default_factory=list)
    value_positions: dict[str, list[int]] = Field(default_factory=dict)
    slot_position: int = Field(ge=0)
    candidates: list[str] = Field(min_length=1)
    configurations: list[dict[str, float]] = Field(min_length=1)
    ablation: AblationBody = Field(default_factory=AblationBody)


def _kb_tuples(body: list[KbTupleBody]) -> list[KbTuple]:
    return [KbTuple(attribute=t.attribute, value=t.value) for t in body]


def _next_word_dist(model: LanguageModel, context: list[str],
                    kb: list[KbTuple], ablation: AblationFlags) -> np.ndarray:
    """Distribution over the next word after teacher-forcing the context."""
    state = model.init_state(kb, ablation)
    dist = None
    for token in [model.bos_token()] + [encode(s, model.vocab) for s in context]:
        state, dist = model.step(state, token, ablation)
    return dist


def create_app(model_dir, vocab_path, default_k: int = 5) -> FastAPI:
    store = ModelStore(model_dir, vocab_path)
    app = FastAPI(title="assistlm service")
    app.state.store = store
    # Browser clients (the typing demo) are served from their own origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        details = [{"field": ".".join(str(p) for p in e["loc"] if p != "body"),
                    "message": e["msg"]} for e in exc.errors()]
        return JSONResponse(status_code=400, content={"detail": details})

    @app.exception_handler(DataError)
    async def data_error_handler(request: Request, exc: DataError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def _model_or_404(model_id: str):
        model = store.get(model_id)
        if model is None:
            return None, JSONResponse(
                status_code=404, content={"detail": f"unknown model_id {model_id!r}"})
        return model, None

    @app.get("/v1/models")
    def list_models():
        out = []
        for model_id, model in store.models.items():
            cfg = model.config
            out.append({"model_id": model_id, "variant": cfg.variant,
                        "conditional": cfg.conditional, "grounded": cfg.grounded,
                        "hidden_dim": cfg.hidden_dim, "vocab_size": len(model.vocab)})
        return out

    @app.post("/v1/predict")
    def predict(req: PredictRequest):
        model, err = _model_or_404(req.model_id)
        if err:
            return err
        ablation = req.ablation.to_flags()
        dist = _next_word_dist(model, req.context_tokens, _kb_tuples(req.kb), ablation)
        special = model.vocab.special_ids
        order = np.lexsort((np.arange(dist.size), -dist))
        k = req.k if req.k is not None else default_k
        suggestions = []
        for i in order:
            if int(i) in special:
                continue
            suggestions.append({"word": model.vocab.surface(int(i)),
                                "probability": float(dist[i]),
                                "rank": len(suggestions) + 1})
            if len(suggestions) >= k:
                break
        return {"model_id": req.model_id,
                "ablation": {"ignore_kb": ablation.ignore_kb,
                             "ignore_values": ablation.ignore_values},
                "suggestions": suggestions}

    @app.post("/v1/complete")
    def complete(req: CompleteRequest):
        model, err = _model_or_404(req.model_id)
        if err:
            return err
        ablation = req.ablation.to_flags()
        dist = _next_word_dist(model, req.context_tokens, _kb_tuples(req.kb), ablation)
        match = store.lexicon.best_match(req.prefix, dist)
        if match is None:
            return {"suggestion": None, "probability": None}
        surface, wid = match
        return {"suggestion": surface, "probability": float(dist[wid])}

    @app.post("/v1/substitution")
    def substitution(req: SubstitutionRequest):
        model, err = _model_or_404(req.model_id)
        if err:
            return err
        doc = Document(id="request", raw_text=req.text, kb=_kb_tuples(req.kb),
                       meta=DocMeta(value_positions=dict(req.value_positions)))
        study = SubstitutionStudy(doc=doc, slot_position=req.slot_position,
                                  candidates=req.candidates,
                                  configurations=req.configurations)
        grid = substitution_study(model, study, req.ablation.to_flags())
        return grid.to_dict()

    return app


def run(model_dir, vocab_path, host: str = "127.0.0.1", port: int = 8000,
        default_k: int = 5) -> None:
    import uvicorn

    uvicorn.run(create_app(model_dir, vocab_path, default_k), host=host, port=port)
