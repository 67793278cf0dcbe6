"""Model-inspection studies: top-k suggestion lists with watch-word ranks,
numeric value-substitution document-probability grids, and per-word
likelihood-ratio series between two models.

All document-probability arithmetic stays in log space; grid rows are
renormalized with log-sum-exp.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .corpus import EOS, Document, KbTuple, encode_document, format_number
from .errors import DataError
from .lm import NO_ABLATION, AblationFlags, LanguageModel
from .numgrad.ops import LOG_FLOOR_LOG
from .predict_eval import rank_of


@dataclass
class SuggestionItem:
    word: str
    probability: float
    rank: int


@dataclass
class SuggestionList:
    position: int
    items: list[SuggestionItem]
    watch_ranks: dict[str, int | str]   # word -> rank, or "oov"

    def to_dict(self) -> dict:
        return {"position": self.position,
                "suggestions": [dataclasses.asdict(i) for i in self.items],
                "watch_ranks": self.watch_ranks}


def suggestion_list(model: LanguageModel, doc: Document, position: int, k: int,
                    watch_words: list[str] | None = None,
                    ablation: AblationFlags = NO_ABLATION) -> SuggestionList:
    """Top-k next words at a position given the strict token prefix and the
    KB; ranks cover the full vocabulary (ties broken by ascending id)."""
    if doc.tokens is None:
        raise DataError(f"document {doc.id!r} is not encoded")
    if not 0 <= position <= len(doc.tokens):
        raise DataError(f"position {position} outside document of {len(doc.tokens)} tokens")
    if k < 1:
        raise DataError("k must be >= 1")
    logp, _ = model.forward_document(doc, ablation)
    p = np.exp(logp[position])
    n = p.size
    order = np.lexsort((np.arange(n), -p))
    items = [SuggestionItem(word=model.vocab.surface(int(i)),
                            probability=float(p[i]), rank=r + 1)
             for r, i in enumerate(order[:min(k, n)])]
    watch: dict[str, int | str] = {}
    for word in watch_words or []:
        wid = model.vocab.index.get(word)
        watch[word] = rank_of(p, wid) if wid is not None else "oov"
    return SuggestionList(position=position, items=items, watch_ranks=watch)


@dataclass
class SubstitutionStudy:
    doc: Document
    slot_position: int                  # word index holding the graded word
    candidates: list[str]               # words to place at the slot
    configurations: list[dict[str, float]]  # attribute -> substituted value


@dataclass
class SubstitutionRow:
    configuration: dict[str, float]
    probabilities: dict[str, float]     # candidate -> renormalized doc prob
    slot_probabilities: dict[str, float]  # candidate -> next-word prob at slot


@dataclass
class SubstitutionGrid:
    slot_position: int
    candidates: list[str]
    rows: list[SubstitutionRow]

    def to_dict(self) -> dict:
        return {"slot_position": self.slot_position, "candidates": self.candidates,
                "rows": [dataclasses.asdict(r) for r in self.rows]}


def apply_rewrite(doc: Document, configuration: dict[str, float],
                  candidate: str, slot_position: int) -> Document:
    """Rewrite the KB values and every aligned in-text numeral for the
    configuration's attributes, and place candidate at the slot."""
    words = list(doc.words)
    if not 0 <= slot_position < len(words):
        raise DataError(f"slot position {slot_position} outside document")
    positions = doc.meta.value_positions if doc.meta is not None else {}
    for attribute, value in configuration.items():
        for pos in positions.get(attribute, []):
            words[pos] = format_number(float(value))
    words[slot_position] = candidate
    kb = [KbTuple(t.attribute, float(configuration[t.attribute])
                  if t.attribute in configuration else t.value)
          for t in doc.kb]
    return Document(id=doc.id, raw_text=" ".join(words), kb=kb, meta=doc.meta)


def substitution_study(model: LanguageModel, study: SubstitutionStudy,
                       ablation: AblationFlags = NO_ABLATION) -> SubstitutionGrid:
    """Document probability of each candidate word under each numeric
    configuration, renormalized over the candidates within each row."""
    if not study.candidates:
        raise DataError("substitution study needs at least one candidate")
    special = model.vocab.special_ids
    for word in study.candidates:
        wid = model.vocab.index.get(word)
        if wid is None or wid in special:
            raise DataError(f"candidate {word!r} is out of vocabulary")
    rows = []
    for configuration in study.configurations:
        # A value-blind model must see identical inputs for configurations
        # that differ only in numeric values, so the rewrite is skipped.
        applied = {} if ablation.ignore_values else configuration
        logps = np.empty(len(study.candidates))
        slot_probs = {}
        for j, candidate in enumerate(study.candidates):
            rewritten = apply_rewrite(study.doc, applied, candidate,
                                      study.slot_position)
            encoded = encode_document(rewritten, model.vocab)
            logp, targets = model.forward_document(encoded, ablation)
            picked = np.maximum(logp[np.arange(targets.size), targets], LOG_FLOOR_LOG)
            logps[j] = picked.sum()
            slot_probs[candidate] = float(
                np.exp(logp[study.slot_position, model.vocab.index[candidate]]))
        norm = logps - (np.max(logps) + np.log(np.exp(logps - np.max(logps)).sum()))
        rows.append(SubstitutionRow(
            configuration=dict(configuration),
            probabilities={c: float(np.exp(norm[j]))
                           for j, c in enumerate(study.candidates)},
            slot_probabilities=slot_probs))
    return SubstitutionGrid(slot_position=study.slot_position,
                            candidates=list(study.candidates), rows=rows)


@dataclass
class RatioSeries:
    tokens: list[str]                   # surfaces plus the closing <eos>
    ratios: list[float]                 # p_a(w_t | ...) / p_b(w_t | ...)

    def to_dict(self) -> dict:
        return {"tokens": self.tokens, "ratios": self.ratios}


def likelihood_ratio(model_a: LanguageModel, model_b: LanguageModel,
                     doc: Document,
                     ablation_a: AblationFlags = NO_ABLATION,
                     ablation_b: AblationFlags = NO_ABLATION) -> RatioSeries:
    """Per-position probability ratio between two models sharing a
    vocabulary, over every teacher-forced position including `<eos>`."""
    if model_a.vocab.sha256() != model_b.vocab.sha256():
        raise DataError("models do not share a vocabulary")
    logp_a, targets = model_a.forward_document(doc, ablation_a)
    logp_b, _ = model_b.forward_document(doc, ablation_b)
    if targets.size == 0:
        return RatioSeries(tokens=[], ratios=[])
    idx = np.arange(targets.size)
    picked_a = np.maximum(logp_a[idx, targets], LOG_FLOOR_LOG)
    picked_b = np.maximum(logp_b[idx, targets], LOG_FLOOR_LOG)
    labels = [t.surface for t in doc.tokens] + [EOS]
    return RatioSeries(tokens=labels,
                       ratios=[float(np.exp(d)) for d in picked_a - picked_b])
