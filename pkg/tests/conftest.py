"""Shared fixtures: a small deterministic corpus and quickly trained models.

Everything here is session-scoped; tests must not mutate fixture objects.
"""

from __future__ import annotations

import re
import sys

import pytest
from hypothesis import settings

from assistlm.corpus import build_vocabulary, encode_document
from assistlm.generator import default_config, generate_corpus
from assistlm.lm import ModelConfig, train

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

TINY_SEED = 5


@pytest.fixture(scope="session")
def tiny_split():
    return generate_corpus(default_config(n_docs=60), seed=TINY_SEED)


@pytest.fixture(scope="session")
def tiny_vocab(tiny_split):
    return build_vocabulary(tiny_split.train, 400)


@pytest.fixture(scope="session")
def tiny_train_docs(tiny_split, tiny_vocab):
    return [encode_document(d, tiny_vocab) for d in tiny_split.train]


@pytest.fixture(scope="session")
def tiny_test_docs(tiny_split, tiny_vocab):
    return [encode_document(d, tiny_vocab) for d in tiny_split.test]


def _tiny_config(variant: str, **overrides) -> ModelConfig:
    base = dict(hidden_dim=12, vocab_budget=400, epochs=2, minibatch=8,
                bptt_limit=32, seed=11)
    base.update(overrides)
    return ModelConfig.for_variant(variant, **base)


@pytest.fixture(scope="session")
def tiny_models(tiny_split, tiny_vocab):
    """One quickly trained model per variant (D=12, 2 epochs, 48 docs)."""
    docs = tiny_split.train
    return {variant: train(_tiny_config(variant), tiny_vocab, docs)
            for variant in ("baseline", "c", "g", "c+g")}


@pytest.fixture(scope="session")
def tiny_model(tiny_models):
    return tiny_models["c+g"]


@pytest.fixture(scope="session")
def tiny_baseline(tiny_models):
    return tiny_models["baseline"]


_ACCEPTANCE_PATTERN = re.compile(r"::test_(a\d+)_(\w+)")


def pytest_runtest_logreport(report):
    """Print one visible PASS/FAIL line per acceptance criterion."""
    if report.when != "call":
        return
    match = _ACCEPTANCE_PATTERN.search(report.nodeid)
    if match is None or "test_acceptance" not in report.nodeid:
        return
    label = match.group(1).upper()
    title = match.group(2).replace("_", " ")
    status = "PASS" if report.passed else "FAIL"
    print(f"[acceptance] {label} {status} — {title} ({report.duration:.2f}s)",
          file=sys.stderr, flush=True)
