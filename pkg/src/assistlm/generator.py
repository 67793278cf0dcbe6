"""Deterministic synthetic clinical-style report generator.

Each document is a templated echo-style report in which graded words
("non"/"mildly"/"severely") are a deterministic function of a numeric
measurement that appears both in the text and in the knowledge base.
Numerals, units and punctuation are emitted as standalone whitespace
tokens, and the generator records which token positions hold each
attribute's value so downstream what-if studies can rewrite them.
"""

from __future__ import annotations

import hashlib
import re
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .corpus import CorpusSplit, DocMeta, Document, GradedSlot, KbTuple, format_number
from .errors import DataError

_PLACEHOLDER_RE = re.compile(r"\{(grade:)?([a-z_][a-z0-9_]*)\}")


@dataclass
class GradingRule:
    """Maps a numeric value to a severity word via ascending upper bounds.

    ``words[i]`` applies when ``bounds[i-1] <= value < bounds[i]`` (upper
    bounds exclusive); values at or above the last bound get ``words[-1]``.
    """

    bounds: list[float]
    words: list[str]

    def __post_init__(self):
        if len(self.words) != len(self.bounds) + 1:
            raise DataError("grading rule needs one more word than bounds")
        if sorted(self.bounds) != list(self.bounds):
            raise DataError("grading bounds must be ascending")

    def grade(self, value: float) -> str:
        return self.words[bisect_right(self.bounds, value)]


@dataclass
class AttributeSpec:
    """One KB attribute: either a numeric range or a closed set of words."""

    name: str
    low: float = 0.0
    high: float = 0.0
    step: float = 1.0          # numeric draw grid; 1.0 with integer=True gives ints
    integer: bool = False
    choices: Optional[list[str]] = None
    missing_rate: float = 0.0
    grading: Optional[GradingRule] = None

    @property
    def is_choice(self) -> bool:
        return self.choices is not None


@dataclass
class SentenceSpec:
    """A sentence template; ``{attr}`` inserts a value, ``{grade:attr}`` a graded word.

    If any referenced attribute is missing the ``alt`` text is emitted
    instead (or the sentence is dropped when ``alt`` is None). ``drop_rate``
    removes the sentence at random for corpus variety.
    """

    template: str
    alt: Optional[str] = None
    drop_rate: float = 0.0


@dataclass
class GeneratorConfig:
    n_docs: int = 1000
    train_frac: float = 0.8
    dev_frac: float = 0.1
    attributes: list[AttributeSpec] = field(default_factory=list)
    sentences: list[SentenceSpec] = field(default_factory=list)

    def attribute(self, name: str) -> AttributeSpec:
        for spec in self.attributes:
            if spec.name == name:
                return spec
        raise DataError(f"unknown attribute {name!r}")

    def validate(self) -> None:
        if self.n_docs < 1:
            raise DataError("generator config: n_docs must be >= 1")
        if not self.attributes:
            raise DataError("generator config: empty attribute schema")
        if not self.sentences:
            raise DataError("generator config: no sentence templates")
        if not (0 < self.train_frac and 0 <= self.dev_frac
                and self.train_frac + self.dev_frac < 1):
            raise DataError("generator config: bad split fractions")
        names = {a.name for a in self.attributes}
        if len(names) != len(self.attributes):
            raise DataError("generator config: duplicate attribute names")
        for sent in self.sentences:
            for graded, name in _PLACEHOLDER_RE.findall(sent.template):
                spec = self.attribute(name)
                if graded and spec.grading is None:
                    raise DataError(f"attribute {name!r} has no grading rule")


def default_config(n_docs: int = 1000) -> GeneratorConfig:
    """The standard report schema used throughout the experiments."""
    return GeneratorConfig(
        n_docs=n_docs,
        attributes=[
            AttributeSpec("age", low=25, high=94, step=1, integer=True),
            AttributeSpec("sex", choices=["male", "female"]),
            AttributeSpec("heart_rate", low=45, high=130, step=1, integer=True),
            AttributeSpec("ef", low=15.0, high=75.0, step=0.1,
                          grading=GradingRule(
                              [24.0, 33.0, 41.0, 50.0, 58.0, 66.0],
                              ["critically", "severely", "markedly", "moderately",
                               "mildly", "minimally", "non"])),
            AttributeSpec("lvedd", low=30.0, high=75.0, step=0.1,
                          grading=GradingRule(
                              [36.0, 42.0, 49.0, 55.0, 62.0, 68.0],
                              ["non", "minimally", "mildly", "moderately",
                               "markedly", "severely", "critically"])),
            AttributeSpec("la_size", low=25.0, high=55.0, step=0.1, missing_rate=0.3),
            # The two closed-set attributes sit last so the encoder reads them
            # right before its final state, and their sentences sit early so
            # the copied state is still fresh when the decoder needs them.
            AttributeSpec("effusion", choices=[
                "no", "trace", "minimal", "small", "moderate", "large", "loculated"]),
            AttributeSpec("indication", choices=[
                "dyspnea", "palpitations", "syncope", "hypertension", "screening",
                "fatigue", "murmur", "arrhythmia", "bradycardia", "edema"]),
        ],
        sentences=[
            SentenceSpec("referred for {indication} ."),
            SentenceSpec("there is {effusion} pericardial effusion ."),
            SentenceSpec("report for a {age} year old {sex} patient ."),
            SentenceSpec("heart rate is {heart_rate} bpm .", drop_rate=0.2),
            SentenceSpec("ejection fraction is {ef} % ."),
            SentenceSpec("systolic function is {grade:ef} impaired ."),
            SentenceSpec("lv diastolic diameter is {lvedd} mm ."),
            SentenceSpec("the left ventricle is {grade:lvedd} dilated ."),
            SentenceSpec("the left atrium measures {la_size} mm .",
                         alt="the left atrium is not well seen ."),
            SentenceSpec("valves are grossly normal .", drop_rate=0.35),
        ],
    )


def _draw_value(spec: AttributeSpec, rng: np.random.Generator):
    if spec.is_choice:
        return spec.choices[int(rng.integers(len(spec.choices)))]
    n_steps = int(round((spec.high - spec.low) / spec.step)) + 1
    v = spec.low + spec.step * int(rng.integers(n_steps))
    return float(int(round(v))) if spec.integer else round(v, 1)


def _render_value(value) -> str:
    return value if isinstance(value, str) else format_number(value)


def generate_document(config: GeneratorConfig, seed: int, index: int) -> Document:
    """Build one report; deterministic in (config, seed, index)."""
    rng = np.random.default_rng([seed, index])
    values: dict[str, Optional[object]] = {}
    for spec in config.attributes:
        missing = spec.missing_rate > 0 and rng.random() < spec.missing_rate
        values[spec.name] = None if missing else _draw_value(spec, rng)

    tokens: list[str] = []
    meta = DocMeta()
    for sent in config.sentences:
        if sent.drop_rate > 0 and rng.random() < sent.drop_rate:
            continue
        template = sent.template
        refs = _PLACEHOLDER_RE.findall(template)
        if any(values[name] is None for _, name in refs):
            if sent.alt is None:
                continue
            template = sent.alt
            refs = _PLACEHOLDER_RE.findall(template)
        for word in template.split():
            m = _PLACEHOLDER_RE.fullmatch(word)
            if m is None:
                tokens.append(word)
                continue
            graded, name = m.groups()
            spec = config.attribute(name)
            value = values[name]
            if graded:
                meta.graded_slots.append(
                    GradedSlot(name, len(tokens), list(spec.grading.words)))
                tokens.append(spec.grading.grade(float(value)))
            else:
                if not spec.is_choice:
                    meta.value_positions.setdefault(name, []).append(len(tokens))
                tokens.append(_render_value(value))

    kb = [KbTuple(spec.name, values[spec.name]) for spec in config.attributes]
    return Document(
        id=f"doc-{seed}-{index:05d}",
        raw_text=" ".join(tokens),
        kb=kb,
        meta=meta,
    )


def _split_rank(seed: int, doc_id: str) -> str:
    return hashlib.sha256(f"{seed}:{doc_id}".encode("utf-8")).hexdigest()


def generate_corpus(config: GeneratorConfig, seed: int) -> CorpusSplit:
    """Generate the corpus and assign split membership by per-id hashing.

    Documents are ranked by sha256(seed:id) and sliced to the configured
    fractions, so membership depends only on the seed and the id set.
    """
    config.validate()
    docs = [generate_document(config, seed, i) for i in range(config.n_docs)]
    ranked = sorted(docs, key=lambda d: _split_rank(seed, d.id))
    n_train = int(config.n_docs * config.train_frac)
    n_dev = int(config.n_docs * config.dev_frac)
    by_index = {d.id: i for i, d in enumerate(docs)}
    order = lambda ds: sorted(ds, key=lambda d: by_index[d.id])
    return CorpusSplit(
        train=order(ranked[:n_train]),
        dev=order(ranked[n_train:n_train + n_dev]),
        test=order(ranked[n_train + n_dev:]),
        seed=seed,
    )
