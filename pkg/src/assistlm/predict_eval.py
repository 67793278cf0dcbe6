"""Word-prediction evaluation: rank of the true next word at every
teacher-forced position; MRR, Recall@k, Precision@1, and perplexity.

Two OOV-target policies:
  "miss" (default): mask symbols (<num>, <unk>, <eos>) are excluded from the
    rankable suggestion list (they are not words a user could accept), so
    positions whose target is a mask symbol count as misses (rank absent,
    reciprocal rank 0).  Probabilities stay in the full simplex.
  "masked": the target is its mask symbol, ranked over the full vocabulary.

Perplexity always uses masked targets (standard LM accounting), whatever the
rank policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document
from .errors import DataError
from .lm import NO_ABLATION, AblationFlags, LanguageModel, check_ablation
from .numgrad.ops import LOG_FLOOR_LOG

REPORT_KS = (1, 2, 3, 5, 10)
OOV_POLICIES = ("miss", "masked")


@dataclass
class PredictionRecord:
    doc_id: str
    position: int
    target_id: int
    target_oov: bool       # target was OOV before masking (<num>/<unk>)
    rank: int | None       # 1-based; None = miss


@dataclass
class PredictionMetrics:
    mrr: float
    recall_at: dict[int, float]
    precision_at_1: float
    perplexity: float
    n_positions: int

    def to_dict(self) -> dict:
        return {"mrr": self.mrr,
                "recall_at": {str(k): v for k, v in sorted(self.recall_at.items())},
                "precision_at_1": self.precision_at_1,
                "perplexity": self.perplexity,
                "n_positions": self.n_positions}


def rank_of(dist: np.ndarray, target: int) -> int:
    """1-based rank of target with the vocabulary sorted by descending
    probability, ties broken by ascending vocab id."""
    p = np.asarray(dist)
    pt = p[target]
    higher = int(np.count_nonzero(p > pt))
    ties_before = int(np.count_nonzero(p[:target] == pt))
    return higher + ties_before + 1


def _rank_among(p: np.ndarray, candidate_ids: np.ndarray, target: int) -> int:
    """rank_of restricted to candidate_ids (ascending); target must be one."""
    pc = p[candidate_ids]
    pt = p[target]
    higher = int(np.count_nonzero(pc > pt))
    before = candidate_ids < target
    ties_before = int(np.count_nonzero(pc[before] == pt))
    return higher + ties_before + 1


def evaluate_prediction(model: LanguageModel, docs: list[Document],
                        ablation: AblationFlags = NO_ABLATION,
                        oov_policy: str = "miss",
                        ks: tuple[int, ...] = REPORT_KS,
                        ) -> tuple[PredictionMetrics, list[PredictionRecord]]:
    """Rank the true next word at every position of every document.

    MRR averages 1/rank with misses contributing 0; Recall@k is the fraction
    of positions with rank <= k; Precision@1 counts positions whose single
    displayed top suggestion is correct (identical to Recall@1 by
    construction, computed independently).
    """
    if not docs:
        raise DataError("empty evaluation set")
    if oov_policy not in OOV_POLICIES:
        raise DataError(f"unknown oov_policy {oov_policy!r}; expected one of {OOV_POLICIES}")
    check_ablation(model.config, ablation)
    vocab = model.vocab
    special = np.array(sorted(vocab.special_ids), dtype=np.int64)
    candidate_ids = np.setdiff1d(
        np.arange(len(vocab), dtype=np.int64), special, assume_unique=True)
    oov_ids = {vocab.num_id, vocab.unk_id}

    records: list[PredictionRecord] = []
    rr_sum = 0.0
    hits = {k: 0 for k in ks}
    top1_correct = 0
    nll_total = 0.0
    n_positions = 0
    for doc in docs:
        logp, targets = model.forward_document(doc, ablation)
        if targets.size == 0:
            continue
        idx = np.arange(targets.size)
        nll_total += float(-np.maximum(logp[idx, targets], LOG_FLOOR_LOG).sum())
        n_positions += int(targets.size)
        probs = np.exp(logp)
        for pos in range(targets.size):
            p = probs[pos]
            target = int(targets[pos])
            if oov_policy == "miss":
                if target in vocab.special_ids:
                    rank = None
                else:
                    rank = _rank_among(p, candidate_ids, target)
                pc = p[candidate_ids]
                best = int(candidate_ids[int(np.argmax(pc))])
            else:
                rank = rank_of(p, target)
                best = int(np.argmax(p))
            if rank is not None:
                rr_sum += 1.0 / rank
                for k in ks:
                    if rank <= k:
                        hits[k] += 1
            if best == target:
                top1_correct += 1
            records.append(PredictionRecord(
                doc_id=doc.id, position=pos, target_id=target,
                target_oov=target in oov_ids, rank=rank))
    if n_positions == 0:
        raise DataError("evaluation set contains no tokens")
    metrics = PredictionMetrics(
        mrr=rr_sum / n_positions,
        recall_at={k: hits[k] / n_positions for k in ks},
        precision_at_1=top1_correct / n_positions,
        perplexity=float(np.exp(nll_total / n_positions)),
        n_positions=n_positions)
    return metrics, records
