"""Typing simulation: lexicon, per-word traces, accounting, bounds.

Two oracle layers: hand-traced single words with tiny vocabularies, and a
fully independent character-by-character replay of whole documents that
recomputes every tally field with plain Python string matching.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from assistlm.complete_sim import (CompletionTally, PrefixLexicon, from_ks_ud,
                                   metrics_from_tally, simulate_corpus,
                                   simulate_document, simulate_word,
                                   theoretical_bound, vocabulary_bound)
from assistlm.corpus import SPECIALS, Document, Vocabulary, build_vocabulary
from assistlm.errors import DataError


def _vocab(*words):
    return Vocabulary(list(words) + list(SPECIALS))


def _scores(vocab, **named):
    s = np.full(len(vocab), 1e-6)
    for word, value in named.items():
        s[vocab.index[word]] = value
    return s


# --- lexicon -------------------------------------------------------------------

def test_lexicon_excludes_specials_and_matches_prefixes():
    vocab = _vocab("cat", "car", "dog", "cart")
    lex = PrefixLexicon(vocab)
    got = {vocab.surface(i) for i in lex.match_ids("ca")}
    assert got == {"cat", "car", "cart"}
    assert lex.match_ids("<").size == 0          # specials never match
    assert lex.match_ids("zzz").size == 0


def test_lexicon_best_match_highest_score_then_lowest_id():
    vocab = _vocab("cat", "car", "cart")
    lex = PrefixLexicon(vocab)
    scores = _scores(vocab, cat=0.3, car=0.5, cart=0.2)
    assert lex.best_match("ca", scores) == ("car", vocab.index["car"])
    tied = _scores(vocab, cat=0.4, car=0.4, cart=0.1)
    surface, wid = lex.best_match("ca", tied)
    assert wid == min(vocab.index["cat"], vocab.index["car"])


def test_lexicon_propositions_follow_vocab_not_frequency(tiny_vocab):
    lex = PrefixLexicon(tiny_vocab)
    for i in lex.match_ids("t"):
        surface = tiny_vocab.surface(int(i))
        assert surface.startswith("t") and surface not in SPECIALS


# --- hand-traced words -----------------------------------------------------------

def test_word_cat_accepted_after_one_key():
    vocab = _vocab("cat")
    out = simulate_word(_scores(vocab, cat=0.9), PrefixLexicon(vocab), "cat")
    assert out.accepted and out.accept_prefix == 1
    assert out.typed == 1
    assert out.accepted_chars == 2
    assert out.distraction_chars == 0


def test_single_letter_word_saves_nothing():
    vocab = _vocab("a", "and")
    out = simulate_word(_scores(vocab, a=0.9, **{"and": 0.05}),
                        PrefixLexicon(vocab), "a")
    assert out.accepted and out.typed == 1 and out.accepted_chars == 0


def test_oov_word_typed_in_full_with_distraction():
    vocab = _vocab("zebra")
    out = simulate_word(_scores(vocab, zebra=0.9), PrefixLexicon(vocab), "zzz")
    assert not out.accepted
    assert out.typed == 3
    assert out.accepted_chars == 0
    # "z" displays "zebra" (4 distraction chars); "zz"/"zzz" match nothing
    assert out.distraction_chars == 4


def test_wrong_then_right_suggestion_accumulates_distraction():
    vocab = _vocab("card", "cart")
    scores = _scores(vocab, card=0.6, cart=0.3)
    out = simulate_word(scores, PrefixLexicon(vocab), "cart")
    # prefixes c,a,r show "card" (3+2+1 distraction); "cart" wins at plen 4
    assert out.accepted and out.accept_prefix == 4
    assert out.typed == 4 and out.accepted_chars == 0
    assert out.distraction_chars == 6


def test_empty_word_rejected():
    vocab = _vocab("a")
    with pytest.raises(DataError):
        simulate_word(_scores(vocab), PrefixLexicon(vocab), "")


# --- independent whole-document replay -----------------------------------------

def _replay_document(model, doc):
    """Re-simulate with plain string logic; no shared code with the module."""
    logp, _ = model.forward_document(doc)
    probs = np.exp(logp)
    vocab = model.vocab
    surfaces = [(vocab.surface(i), i) for i in range(len(vocab))
                if vocab.surface(i) not in SPECIALS]
    tally = dict(total=0, typed=0, accepted=0, distraction=0, events=0)
    for wi, word in enumerate(doc.words):
        tally["total"] += len(word)
        p = probs[wi]
        done = False
        for plen in range(1, len(word) + 1):
            prefix = word[:plen]
            matches = [(s, i) for s, i in surfaces if s.startswith(prefix)]
            if not matches:
                continue
            best = max(matches, key=lambda si: (p[si[1]], -si[1]))
            if best[0] == word:
                tally["typed"] += plen
                tally["accepted"] += len(word) - plen
                tally["events"] += 1
                done = True
                break
            tally["distraction"] += len(best[0]) - plen
        if not done:
            tally["typed"] += len(word)
    spaces = len(doc.words) - 1
    tally["total"] += spaces
    tally["typed"] += spaces
    return tally


def test_simulation_matches_independent_replay(tiny_model, tiny_test_docs):
    for doc in tiny_test_docs:
        got, _ = simulate_document(tiny_model, doc)
        want = _replay_document(tiny_model, doc)
        assert got.total_chars == want["total"]
        assert got.typed_keys == want["typed"]
        assert got.accepted_chars == want["accepted"]
        assert got.distraction_chars == want["distraction"]
        assert got.accept_events == want["events"]


def test_count_accept_key_adds_exactly_the_events(tiny_model, tiny_test_docs):
    doc = tiny_test_docs[0]
    free, _ = simulate_document(tiny_model, doc)
    keyed, _ = simulate_document(tiny_model, doc, count_accept_key=True)
    assert keyed.typed_keys == free.typed_keys + free.accept_events
    assert keyed.total_chars == free.total_chars
    assert keyed.accepted_chars == free.accepted_chars


def test_unencoded_document_rejected(tiny_model):
    with pytest.raises(DataError):
        simulate_document(tiny_model, Document(id="x", raw_text="a b", kb=[]))


# --- metric identities -------------------------------------------------------------

def test_metric_identities_on_simulated_corpus(tiny_model, tiny_test_docs):
    tally, metrics, _ = simulate_corpus(tiny_model, tiny_test_docs)
    # free accept key: saved keys are exactly the accepted characters
    assert metrics.ks == metrics.recall
    assert metrics.precision == pytest.approx(1.0 / (1.0 + metrics.ud), abs=1e-12)
    p, r = metrics.precision, metrics.recall
    assert metrics.f1 == pytest.approx(2 * p * r / (p + r), abs=1e-12)
    assert tally.typed_keys + tally.accepted_chars == tally.total_chars


def test_zero_accept_edge_cases():
    empty = metrics_from_tally(CompletionTally())
    assert empty.ks == 0.0 and empty.recall == 0.0 and empty.f1 == 0.0
    no_accepts = metrics_from_tally(CompletionTally(
        total_chars=10, typed_keys=10, accepted_chars=0,
        distraction_chars=4, accept_events=0))
    assert no_accepts.ud is None and no_accepts.precision is None
    assert no_accepts.f1 == 0.0


@given(st.floats(min_value=0.01, max_value=0.99),
       st.floats(min_value=0.0, max_value=10.0))
def test_from_ks_ud_identities(ks, ud):
    m = from_ks_ud(ks, ud)
    assert m.precision == pytest.approx(1.0 / (1.0 + ud), abs=1e-12)
    assert m.recall == ks
    p, r = m.precision, m.recall
    assert m.f1 == pytest.approx(2 * p * r / (p + r), abs=1e-12)


def test_reference_operating_point():
    m = from_ks_ud(0.5887, 1.0)
    assert m.precision == pytest.approx(0.5000, abs=1e-4)
    assert m.f1 == pytest.approx(0.5407, abs=1e-4)


# --- bounds ---------------------------------------------------------------------------

def test_theoretical_bound_hand_computed():
    docs = [Document(id="d", raw_text="cat a zebra", kb=[])]
    tally, metrics = theoretical_bound(docs)
    # chars 3+1+5=9 plus 2 spaces; every word costs 1 key + spaces
    assert tally.total_chars == 11
    assert tally.typed_keys == 3 + 2
    assert tally.accepted_chars == 2 + 0 + 4
    assert tally.distraction_chars == 0
    assert tally.accept_events == 3
    assert metrics.ks == pytest.approx(6 / 11)
    assert metrics.ud == 0.0 and metrics.precision == 1.0


def test_vocabulary_bound_types_oov_fully():
    vocab = _vocab("cat", "zebra")
    docs = [Document(id="d", raw_text="cat a zzz", kb=[])]
    tally, metrics = vocabulary_bound(docs, vocab)
    # only "cat" is in vocab: 1 key + 2 accepted; "a" and "zzz" typed fully
    assert tally.typed_keys == 1 + 1 + 3 + 2
    assert tally.accepted_chars == 2
    assert tally.accept_events == 1
    assert metrics.ud == 0.0


def test_bound_ordering_on_real_corpus(tiny_model, tiny_vocab, tiny_test_docs):
    _, model_metrics, _ = simulate_corpus(tiny_model, tiny_test_docs)
    _, theo = theoretical_bound(tiny_test_docs)
    _, vb = vocabulary_bound(tiny_test_docs, tiny_vocab)
    assert model_metrics.ks <= vb.ks + 1e-12
    assert vb.ks <= theo.ks + 1e-12


def test_bounds_over_nothing_are_zero():
    tally, metrics = theoretical_bound([])
    assert tally.total_chars == 0
    assert metrics.ks == 0.0 and metrics.f1 == 0.0
