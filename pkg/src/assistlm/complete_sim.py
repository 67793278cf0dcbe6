"""Word-completion simulation with a simulated user, plus the keystroke
metrics (KS, UD, Precision, Recall, F1) and their theoretical/vocabulary
bounds.

The simulated user types a document character by character.  After each
typed character of a word (prefix length >= 1) the completer filters the
lexicon (vocabulary surfaces minus mask symbols) to prefix matches and
displays the best-scoring one; the user accepts as soon as the displayed
word is the target, which inserts the remaining characters.  The accept
gesture is free by default (see count_accept_key).  Exactly one space per
token boundary is typed by the user and counted; the closing `<eos>` is
never typed or counted.

Character accounting:
  total_chars      — keys an unaided user would press (word chars + spaces)
  typed_keys       — keys pressed with completion active
  accepted_chars   — sum over accepted words of |word| - |prefix at accept|
  distraction_chars — sum over displayed, non-accepted suggestions of
                      |suggestion| - |prefix|

KS = (total - typed)/total, Recall = accepted/total (identical under free
accept), UD = distraction/accepted, Precision = accepted/(accepted +
distraction) = 1/(1 + UD), F1 = harmonic mean of Precision and Recall.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from .corpus import Document, Vocabulary
from .errors import DataError
from .lm import NO_ABLATION, AblationFlags, LanguageModel, check_ablation


@dataclass
class CompletionTally:
    total_chars: int = 0
    typed_keys: int = 0
    accepted_chars: int = 0
    distraction_chars: int = 0
    accept_events: int = 0

    def __add__(self, other: "CompletionTally") -> "CompletionTally":
        return CompletionTally(
            self.total_chars + other.total_chars,
            self.typed_keys + other.typed_keys,
            self.accepted_chars + other.accepted_chars,
            self.distraction_chars + other.distraction_chars,
            self.accept_events + other.accept_events)

    def to_dict(self) -> dict:
        return {"total_chars": self.total_chars, "typed_keys": self.typed_keys,
                "accepted_chars": self.accepted_chars,
                "distraction_chars": self.distraction_chars,
                "accept_events": self.accept_events}


@dataclass
class CompletionMetrics:
    ks: float
    ud: float | None       # None when no characters were accepted
    precision: float | None
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"ks": self.ks,
                "ud": self.ud if self.ud is not None else "n/a",
                "precision": self.precision if self.precision is not None else "n/a",
                "recall": self.recall, "f1": self.f1}


def metrics_from_tally(tally: CompletionTally) -> CompletionMetrics:
    if tally.total_chars == 0:
        return CompletionMetrics(ks=0.0, ud=None, precision=None, recall=0.0, f1=0.0)
    ks = (tally.total_chars - tally.typed_keys) / tally.total_chars
    recall = tally.accepted_chars / tally.total_chars
    if tally.accepted_chars == 0:
        return CompletionMetrics(ks=ks, ud=None, precision=None, recall=recall, f1=0.0)
    ud = tally.distraction_chars / tally.accepted_chars
    precision = tally.accepted_chars / (tally.accepted_chars + tally.distraction_chars)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return CompletionMetrics(ks=ks, ud=ud, precision=precision, recall=recall, f1=f1)


def from_ks_ud(ks: float, ud: float) -> CompletionMetrics:
    """Assemble the derived metrics from KS and UD alone (KS = Recall and
    Precision = 1/(1+UD) under the free-accept accounting)."""
    precision = 1.0 / (1.0 + ud)
    recall = ks
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return CompletionMetrics(ks=ks, ud=ud, precision=precision, recall=recall, f1=f1)


class PrefixLexicon:
    """Vocabulary surfaces (mask symbols excluded) with sorted-prefix lookup."""

    def __init__(self, vocab: Vocabulary):
        pairs = sorted((s, i) for i, s in enumerate(vocab.entries)
                       if i not in vocab.special_ids)
        self._surfaces = [s for s, _ in pairs]
        self._ids = np.array([i for _, i in pairs], dtype=np.int64)
        self._vocab = vocab

    def match_ids(self, prefix: str) -> np.ndarray:
        """Vocab ids of all lexicon entries starting with prefix."""
        lo = bisect.bisect_left(self._surfaces, prefix)
        hi = lo
        while hi < len(self._surfaces) and self._surfaces[hi].startswith(prefix):
            hi += 1
        return self._ids[lo:hi]

    def best_match(self, prefix: str, scores: np.ndarray) -> tuple[str, int] | None:
        """Best-scoring entry with the prefix (ties: lowest vocab id), or None."""
        ids = self.match_ids(prefix)
        if ids.size == 0:
            return None
        s = scores[ids]
        winners = ids[s == s.max()]
        best = int(winners.min())
        return self._vocab.surface(best), best


@dataclass
class WordOutcome:
    word: str
    typed: int              # character keys for this word (no space, no accept)
    accepted: bool
    accept_prefix: int      # prefix length at acceptance; 0 if never accepted
    accepted_chars: int
    distraction_chars: int


def simulate_word(scores: np.ndarray, lexicon: PrefixLexicon, target: str) -> WordOutcome:
    """Type one word against a frozen score vector over the vocabulary."""
    if not target:
        raise DataError("cannot simulate an empty word")
    distraction = 0
    for plen in range(1, len(target) + 1):
        match = lexicon.best_match(target[:plen], scores)
        if match is None:
            continue
        surface, _ = match
        if surface == target:
            return WordOutcome(word=target, typed=plen, accepted=True,
                               accept_prefix=plen,
                               accepted_chars=len(target) - plen,
                               distraction_chars=distraction)
        distraction += len(surface) - plen
    return WordOutcome(word=target, typed=len(target), accepted=False,
                       accept_prefix=0, accepted_chars=0,
                       distraction_chars=distraction)


def simulate_document(model: LanguageModel, doc: Document,
                      ablation: AblationFlags = NO_ABLATION,
                      count_accept_key: bool = False,
                      lexicon: PrefixLexicon | None = None,
                      ) -> tuple[CompletionTally, list[WordOutcome]]:
    """Simulate typing one document; the scorer at each word is the model's
    next-word distribution there (teacher-forced, frozen across the word's
    characters)."""
    if doc.tokens is None:
        raise DataError(f"document {doc.id!r} is not encoded")
    words = doc.words
    if len(words) != len(doc.tokens):
        raise DataError(f"document {doc.id!r}: token/word count mismatch")
    if lexicon is None:
        lexicon = PrefixLexicon(model.vocab)
    tally = CompletionTally()
    outcomes: list[WordOutcome] = []
    if not words:
        return tally, outcomes
    logp, _ = model.forward_document(doc, ablation)
    probs = np.exp(logp)
    for i, word in enumerate(words):
        outcome = simulate_word(probs[i], lexicon, word)
        outcomes.append(outcome)
        tally.total_chars += len(word)
        tally.typed_keys += outcome.typed
        tally.accepted_chars += outcome.accepted_chars
        tally.distraction_chars += outcome.distraction_chars
        tally.accept_events += int(outcome.accepted)
    spaces = len(words) - 1
    tally.total_chars += spaces
    tally.typed_keys += spaces
    if count_accept_key:
        tally.typed_keys += tally.accept_events
    return tally, outcomes


def simulate_corpus(model: LanguageModel, docs: list[Document],
                    ablation: AblationFlags = NO_ABLATION,
                    count_accept_key: bool = False,
                    ) -> tuple[CompletionTally, CompletionMetrics, list[list[WordOutcome]]]:
    """Sum per-document simulations and assemble the metrics."""
    if not docs:
        raise DataError("empty evaluation set")
    check_ablation(model.config, ablation)
    lexicon = PrefixLexicon(model.vocab)
    tally = CompletionTally()
    per_doc: list[list[WordOutcome]] = []
    for doc in docs:
        doc_tally, outcomes = simulate_document(
            model, doc, ablation, count_accept_key, lexicon)
        tally = tally + doc_tally
        per_doc.append(outcomes)
    return tally, metrics_from_tally(tally), per_doc


def _bound_tally(docs: list[Document], accepts_word) -> CompletionTally:
    tally = CompletionTally()
    for doc in docs:
        words = doc.words
        if not words:
            continue
        for word in words:
            tally.total_chars += len(word)
            if accepts_word(word):
                saved = len(word) - 1
                tally.accepted_chars += saved
                tally.typed_keys += 1
                tally.accept_events += 1
            else:
                tally.typed_keys += len(word)
        spaces = len(words) - 1
        tally.total_chars += spaces
        tally.typed_keys += spaces
    return tally


def theoretical_bound(docs: list[Document]) -> tuple[CompletionTally, CompletionMetrics]:
    """Ideal completer: every word is retrieved after its first character."""
    tally = _bound_tally(docs, lambda word: True)
    return tally, metrics_from_tally(tally)


def vocabulary_bound(docs: list[Document],
                     vocab: Vocabulary) -> tuple[CompletionTally, CompletionMetrics]:
    """Ideal completer restricted to in-vocabulary words; OOV words are
    typed in full."""
    special = vocab.special_ids

    def in_vocab(word: str) -> bool:
        wid = vocab.index.get(word)
        return wid is not None and wid not in special

    tally = _bound_tally(docs, in_vocab)
    return tally, metrics_from_tally(tally)
