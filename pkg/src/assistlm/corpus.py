"""Corpus handling: tokens, vocabulary with masking, KB lexicalization, JSONL I/O.

Text is whitespace-pretokenized everywhere; the synthetic generator emits
numerals, units and punctuation as standalone tokens, so ``text.split()`` is
the full tokenizer. Numeric values are extracted from the original surface
strings before any masking is applied.
"""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import DataError

NUM = "<num>"
UNK = "<unk>"
EOS = "<eos>"
SPECIALS = (NUM, UNK, EOS)

# Signed decimal numeral, optional fraction part. No exponents, no comma
# decimals (a comma-for-dot typo must *not* count as numeric).
_NUMERAL_RE = re.compile(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)\Z")


def is_numeral(surface: str) -> bool:
    """True if the surface is a well-formed signed decimal numeral."""
    return bool(_NUMERAL_RE.match(surface))


def parse_numeric(surface: str) -> float:
    """Decimal value of the string, or 0.0 if it is not a numeral.

    Total function: never raises. Signed zero normalizes to +0.0.
    """
    if not is_numeral(surface):
        return 0.0
    return float(surface) + 0.0


def format_number(value: float) -> str:
    """Render a numeric value the way the generator writes numerals.

    Integral values print without a fraction part, everything else with a
    single fraction digit ("61", "61.4").
    """
    if value == int(value):
        return str(int(value))
    return f"{value:.1f}"


@dataclass(frozen=True)
class KbTuple:
    """A knowledge-base entry. ``value`` is a string, a number, or None (missing)."""

    attribute: str
    value: Union[str, float, None]

    def __post_init__(self):
        if not self.attribute or any(ch.isspace() for ch in self.attribute):
            raise DataError(f"bad KB attribute: {self.attribute!r}")

    def value_str(self) -> Optional[str]:
        if self.value is None:
            return None
        if isinstance(self.value, str):
            return self.value
        return format_number(float(self.value))


@dataclass(frozen=True)
class Token:
    """A surface word with its (post-masking) vocabulary id.

    ``numeric_value`` comes from the original surface, never from a mask
    symbol, and is present iff the surface is a well-formed numeral.
    """

    surface: str
    vocab_id: int
    numeric_value: Optional[float] = None
    is_numeric: bool = False


class Vocabulary:
    """Frequent-surface vocabulary plus the three special symbols.

    Ids 0..V-1 are the budgeted frequent surfaces (most frequent first, ties
    broken lexicographically ascending); the specials <num>, <unk>, <eos>
    follow in that order, so ``len(vocab) == V + 3``.
    """

    def __init__(self, entries: list[str]):
        for s in SPECIALS:
            if s not in entries:
                raise DataError(f"vocabulary missing special symbol {s}")
        self.entries: list[str] = list(entries)
        self.index: dict[str, int] = {s: i for i, s in enumerate(self.entries)}
        if len(self.index) != len(self.entries):
            raise DataError("vocabulary entries are not unique")
        self.num_id = self.index[NUM]
        self.unk_id = self.index[UNK]
        self.eos_id = self.index[EOS]
        self.special_ids = frozenset((self.num_id, self.unk_id, self.eos_id))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, surface: str) -> bool:
        return surface in self.index

    def surface(self, vocab_id: int) -> str:
        return self.entries[vocab_id]

    def to_json(self) -> str:
        payload = {
            "version": 1,
            "specials": {NUM: self.num_id, UNK: self.unk_id, EOS: self.eos_id},
            "entries": self.entries,
        }
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read vocabulary {path}: {exc}") from exc
        if payload.get("version") != 1:
            raise DataError(f"unsupported vocabulary version in {path}")
        return cls(payload["entries"])


@dataclass
class GradedSlot:
    """A token position whose word is graded from a numeric attribute."""

    attribute: str
    position: int
    candidates: list[str]


@dataclass
class DocMeta:
    """Generator-recorded alignment: attribute -> in-text numeral positions."""

    value_positions: dict[str, list[int]] = field(default_factory=dict)
    graded_slots: list[GradedSlot] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value_positions": self.value_positions,
            "graded_slots": [
                {"attribute": g.attribute, "position": g.position, "candidates": g.candidates}
                for g in self.graded_slots
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocMeta":
        return cls(
            value_positions={k: list(v) for k, v in d.get("value_positions", {}).items()},
            graded_slots=[
                GradedSlot(g["attribute"], g["position"], list(g["candidates"]))
                for g in d.get("graded_slots", [])
            ],
        )


@dataclass
class Document:
    """One report: whitespace-separated text plus its knowledge base.

    Treated as immutable after construction. ``tokens`` is filled by
    :func:`encode_document`; ``meta`` is optional generator alignment data.
    """

    id: str
    raw_text: str
    kb: list[KbTuple]
    tokens: Optional[list[Token]] = None
    meta: Optional[DocMeta] = None

    @property
    def words(self) -> list[str]:
        return self.raw_text.split()


@dataclass
class CorpusSplit:
    train: list[Document]
    dev: list[Document]
    test: list[Document]
    seed: int


def build_vocabulary(train_docs: Iterable[Document], budget: int) -> Vocabulary:
    """The ``budget`` most frequent raw surfaces plus the three specials.

    Frequencies are counted over original surfaces, before masking. Ties are
    broken lexicographically ascending.
    """
    if budget < 1:
        raise DataError("vocabulary budget must be >= 1")
    counts: Counter[str] = Counter()
    for doc in train_docs:
        counts.update(doc.words)
    if not counts:
        raise DataError("empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    entries = [s for s, _ in ranked[:budget]]
    entries.extend(SPECIALS)
    return Vocabulary(entries)


def encode(surface: str, vocab: Vocabulary) -> Token:
    """Map a surface to a Token: own id if in vocabulary, else <num>/<unk>.

    The numeric value is always taken from the original surface.
    """
    numeric = is_numeral(surface)
    value = parse_numeric(surface) if numeric else None
    if surface in vocab.index:
        vid = vocab.index[surface]
    elif numeric:
        vid = vocab.num_id
    else:
        vid = vocab.unk_id
    return Token(surface=surface, vocab_id=vid, numeric_value=value, is_numeric=numeric)


def encode_document(doc: Document, vocab: Vocabulary) -> Document:
    return replace(doc, tokens=[encode(w, vocab) for w in doc.words])


def lexicalize_kb(kb: Iterable[KbTuple]) -> list[str]:
    """Render KB tuples as token triples ``attribute : value``, in KB order.

    Tuples whose value is missing are skipped. Numeric values use the
    generator's numeral format.
    """
    out: list[str] = []
    for tup in kb:
        rendered = tup.value_str()
        if rendered is None:
            continue
        out.extend((tup.attribute, ":", rendered))
    return out


# ---------------------------------------------------------------------------
# JSONL corpus files: one object per line with fields id, text, kb
# (and an optional "meta" object carrying generator alignment data).
# ---------------------------------------------------------------------------

def document_to_json(doc: Document) -> str:
    obj = {
        "id": doc.id,
        "text": doc.raw_text,
        "kb": [{"attribute": t.attribute, "value": t.value} for t in doc.kb],
    }
    if doc.meta is not None:
        obj["meta"] = doc.meta.to_dict()
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def document_from_json(line: str) -> Document:
    try:
        obj = json.loads(line)
        kb = [KbTuple(t["attribute"], t["value"]) for t in obj.get("kb", [])]
        meta = DocMeta.from_dict(obj["meta"]) if "meta" in obj else None
        return Document(id=obj["id"], raw_text=obj["text"], kb=kb, meta=meta)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed corpus line: {exc}") from exc


def save_documents(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            fh.write(document_to_json(doc) + "\n")


def load_documents(path) -> list[Document]:
    docs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    docs.append(document_from_json(line))
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    return docs


def save_split(split: CorpusSplit, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_documents(split.train, out / "train.jsonl")
    save_documents(split.dev, out / "dev.jsonl")
    save_documents(split.test, out / "test.jsonl")
    manifest = {"seed": split.seed,
                "sizes": {"train": len(split.train), "dev": len(split.dev), "test": len(split.test)}}
    (out / "split.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def load_split(corpus_dir) -> CorpusSplit:
    d = Path(corpus_dir)
    if not d.is_dir():
        raise DataError(f"corpus directory not found: {corpus_dir}")
    seed = 0
    manifest = d / "split.json"
    if manifest.exists():
        seed = json.loads(manifest.read_text(encoding="utf-8")).get("seed", 0)
    return CorpusSplit(
        train=load_documents(d / "train.jsonl"),
        dev=load_documents(d / "dev.jsonl"),
        test=load_documents(d / "test.jsonl"),
        seed=seed,
    )
