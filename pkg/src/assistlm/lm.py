"""Model variants (baseline, +c, +g, +c+g), training, perplexity, document
probability, checkpoint persistence, and the -kb / -v test-time ablations.

Architecture: a single-layer LSTM decoder over word embeddings (E_in column
per token), optionally preceded by an LSTM encoder over the lexicalized KB
whose final hidden state is copied into the decoder's initial h (decoder c
starts at zero).  Grounded variants append the token's numeric value as one
extra input feature in both encoder and decoder.  Next-word distribution is
softmax(E_out @ h).
"""

from __future__ import annotations

import json
import logging
import math
import os
import struct
from dataclasses import asdict, dataclass, fields

import numpy as np

from .corpus import (EOS, Document, KbTuple, Token, Vocabulary, encode,
                     encode_document, lexicalize_kb)
from .errors import CheckpointError, DataError, NumericError
from .numgrad import AdaDelta, LstmParams, lstm_sequence, lstm_sequence_backward, lstm_step
from .numgrad.ops import LOG_FLOOR_LOG, log_softmax, softmax

logger = logging.getLogger(__name__)

VARIANTS = ("baseline", "c", "g", "c+g")


@dataclass
class ModelConfig:
    hidden_dim: int = 50
    vocab_budget: int = 1000
    conditional: bool = False
    grounded: bool = False
    epochs: int = 20
    minibatch: int = 64
    bptt_limit: int = 256
    seed: int = 1
    value_scale: float = 1.0
    share_embeddings: bool = True

    def __post_init__(self):
        if self.hidden_dim < 1 or self.vocab_budget < 1:
            raise DataError("hidden_dim and vocab_budget must be >= 1")
        if self.epochs < 1 or self.minibatch < 1 or self.bptt_limit < 1:
            raise DataError("epochs, minibatch and bptt_limit must be >= 1")

    @property
    def variant(self) -> str:
        if self.conditional and self.grounded:
            return "c+g"
        if self.conditional:
            return "c"
        if self.grounded:
            return "g"
        return "baseline"

    @classmethod
    def for_variant(cls, variant: str, **kwargs) -> "ModelConfig":
        if variant not in VARIANTS:
            raise DataError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
        return cls(conditional="c" in variant.split("+"),
                   grounded="g" in variant.split("+"), **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class AblationFlags:
    ignore_kb: bool = False    # -kb: bypass the KB encoder
    ignore_values: bool = False  # -v: zero all numeric-value features

NO_ABLATION = AblationFlags()


@dataclass
class DecodeState:
    h: np.ndarray
    c: np.ndarray


def numeric_feature(token: Token, ablation: AblationFlags = NO_ABLATION) -> float:
    """The grounding feature float(w_t): the token's pre-masking numeric
    value, or 0.0 for non-numeric tokens or under the -v ablation."""
    if ablation.ignore_values or token.numeric_value is None:
        return 0.0
    return token.numeric_value


def check_ablation(config: "ModelConfig", ablation: AblationFlags) -> None:
    """-kb only bypasses something on conditional models, -v on grounded
    ones; requesting them elsewhere is a no-op worth a warning."""
    if ablation.ignore_kb and not config.conditional:
        logger.warning("ignore_kb has no effect on a non-conditional model")
    if ablation.ignore_values and not config.grounded:
        logger.warning("ignore_values has no effect on a non-grounded model")


class LanguageModel:
    """Parameter bundle for one variant, bound to its vocabulary."""

    def __init__(self, config: ModelConfig, vocab: Vocabulary,
                 e_in: np.ndarray, e_out: np.ndarray, decoder: LstmParams,
                 encoder: LstmParams | None = None, enc_embed: np.ndarray | None = None):
        n = len(vocab)
        d_in = config.hidden_dim + (1 if config.grounded else 0)
        if e_in.shape != (config.hidden_dim, n):
            raise DataError(f"e_in shape {e_in.shape} != {(config.hidden_dim, n)}")
        if e_out.shape != (n, config.hidden_dim):
            raise DataError(f"e_out shape {e_out.shape} != {(n, config.hidden_dim)}")
        if decoder.d_in != d_in or decoder.hidden_dim != config.hidden_dim:
            raise DataError("decoder dimensions do not match config")
        if (encoder is not None) != config.conditional:
            raise DataError("encoder must be present iff config.conditional")
        if enc_embed is not None and (config.share_embeddings or not config.conditional):
            raise DataError("enc_embed only valid for unshared conditional models")
        self.config = config
        self.vocab = vocab
        self.e_in = e_in
        self.e_out = e_out
        self.decoder = decoder
        self.encoder = encoder
        self.enc_embed = enc_embed

    @classmethod
    def init(cls, config: ModelConfig, vocab: Vocabulary) -> "LanguageModel":
        rng = np.random.default_rng(config.seed)
        n = len(vocab)
        d = config.hidden_dim
        d_in = d + (1 if config.grounded else 0)
        e_in = rng.uniform(-0.08, 0.08, size=(d, n))
        e_out = rng.uniform(-0.08, 0.08, size=(n, d))
        decoder = LstmParams.init(d_in, d, rng)
        encoder = LstmParams.init(d_in, d, rng) if config.conditional else None
        enc_embed = None
        if config.conditional and not config.share_embeddings:
            enc_embed = rng.uniform(-0.08, 0.08, size=(d, n))
        return cls(config, vocab, e_in, e_out, decoder, encoder, enc_embed)

    def params(self) -> dict[str, np.ndarray]:
        """Live parameter arrays, in checkpoint declaration order."""
        out = {"e_in": self.e_in, "e_out": self.e_out,
               "dec_wx": self.decoder.wx, "dec_wh": self.decoder.wh, "dec_b": self.decoder.b}
        if self.encoder is not None:
            out["enc_wx"] = self.encoder.wx
            out["enc_wh"] = self.encoder.wh
            out["enc_b"] = self.encoder.b
        if self.enc_embed is not None:
            out["enc_embed"] = self.enc_embed
        return out

    def kb_tokens(self, kb: list[KbTuple]) -> list[Token]:
        return [encode(s, self.vocab) for s in lexicalize_kb(kb)]

    def _embed(self, ids: np.ndarray, values: np.ndarray, encoder_side: bool = False) -> np.ndarray:
        """Input features for id/value arrays of shape (T, B) -> (T, B, d_in)."""
        table = self.e_in
        if encoder_side and self.enc_embed is not None:
            table = self.enc_embed
        t, b = ids.shape
        word = table.T[ids.reshape(-1)].reshape(t, b, -1)
        if not self.config.grounded:
            return word
        feat = (values * self.config.value_scale)[..., None]
        return np.concatenate([word, feat], axis=2)

    def init_state(self, kb: list[KbTuple], ablation: AblationFlags = NO_ABLATION) -> DecodeState:
        """Decoder start state: zeros, or the encoder's final h over the
        lexicalized KB copied into h (c always starts at zero)."""
        d = self.config.hidden_dim
        zero = np.zeros(d)
        if not self.config.conditional or ablation.ignore_kb or not kb:
            return DecodeState(h=zero, c=zero.copy())
        toks = self.kb_tokens(kb)
        if not toks:
            return DecodeState(h=zero, c=zero.copy())
        ids = np.array([[t.vocab_id] for t in toks], dtype=np.int64)
        vals = np.array([[numeric_feature(t, ablation)] for t in toks])
        x = self._embed(ids, vals, encoder_side=True)
        h, _, _ = lstm_sequence(self.encoder, x, np.zeros((1, d)), np.zeros((1, d)))
        return DecodeState(h=h[-1, 0].copy(), c=zero.copy())

    def step(self, state: DecodeState, token: Token,
             ablation: AblationFlags = NO_ABLATION) -> tuple[DecodeState, np.ndarray]:
        """Consume one token; returns the next state and the next-word
        distribution softmax(E_out @ h) over the full vocabulary."""
        if not 0 <= token.vocab_id < len(self.vocab):
            raise DataError(f"token id {token.vocab_id} outside vocabulary of {len(self.vocab)}")
        x = self.e_in[:, token.vocab_id]
        if self.config.grounded:
            x = np.append(x, numeric_feature(token, ablation) * self.config.value_scale)
        h, c, _ = lstm_step(self.decoder, x, state.h, state.c)
        dist = softmax(self.e_out @ h)
        return DecodeState(h=h, c=c), dist

    def bos_token(self) -> Token:
        """`<eos>` doubles as the beginning-of-document input symbol."""
        return encode(EOS, self.vocab)

    def forward_document(self, doc: Document,
                         ablation: AblationFlags = NO_ABLATION) -> tuple[np.ndarray, np.ndarray]:
        """Teacher-forced pass over one encoded document.

        Returns (logp, targets): logp has one row per predicted position
        (len(tokens) + 1, counting the closing `<eos>`), each a log
        distribution over the full vocabulary; targets are the masked ids.
        """
        if doc.tokens is None:
            raise DataError(f"document {doc.id!r} is not encoded")
        n = len(self.vocab)
        toks = doc.tokens
        if not toks:
            return np.zeros((0, n)), np.zeros(0, dtype=np.int64)
        eos = self.vocab.eos_id
        ids = np.fromiter((t.vocab_id for t in toks), dtype=np.int64, count=len(toks))
        in_ids = np.concatenate([[eos], ids])[:, None]
        in_vals = np.concatenate(
            [[0.0], [numeric_feature(t, ablation) for t in toks]])[:, None]
        x = self._embed(in_ids, in_vals)
        state = self.init_state(doc.kb, ablation)
        h, _, _ = lstm_sequence(self.decoder, x, state.h[None, :], state.c[None, :])
        logits = h[:, 0, :] @ self.e_out.T
        logp = log_softmax(logits)
        targets = np.concatenate([ids, [eos]])
        return logp, targets

    def sequence_nll(self, doc: Document,
                     ablation: AblationFlags = NO_ABLATION) -> tuple[float, int]:
        """Summed teacher-forced cross-entropy and the position count
        (every position including `<eos>`); (0, 0) for an empty document."""
        logp, targets = self.forward_document(doc, ablation)
        if targets.size == 0:
            return 0.0, 0
        picked = np.maximum(logp[np.arange(targets.size), targets], LOG_FLOOR_LOG)
        total = float(-picked.sum())
        if not np.isfinite(total):
            raise NumericError(f"non-finite log-probability for document {doc.id}")
        return total, int(targets.size)

    def perplexity(self, docs: list[Document],
                   ablation: AblationFlags = NO_ABLATION) -> float:
        total = 0.0
        count = 0
        for doc in docs:
            nll, n = self.sequence_nll(doc, ablation)
            total += nll
            count += n
        if count == 0:
            raise DataError("perplexity undefined over zero tokens")
        return float(np.exp(total / count))

    def doc_probability(self, doc: Document,
                        ablation: AblationFlags = NO_ABLATION) -> float:
        """Log probability of the whole document (product of per-word
        probabilities, kept in log space)."""
        nll, _ = self.sequence_nll(doc, ablation)
        return -nll


# ---------------------------------------------------------------------------
# Training


def _decoder_batch(docs: list[Document], vocab: Vocabulary):
    """Padded (T, B) teacher-forcing arrays.  Inputs are [<eos>] + tokens,
    targets tokens + [<eos>]; padded positions carry target -1 (no loss)."""
    b = len(docs)
    eos = vocab.eos_id
    lens = [len(d.tokens) for d in docs]
    t_total = max(lens) + 1
    in_ids = np.full((t_total, b), eos, dtype=np.int64)
    in_vals = np.zeros((t_total, b))
    targets = np.full((t_total, b), -1, dtype=np.int64)
    for col, doc in enumerate(docs):
        n = lens[col]
        if n:
            ids = np.fromiter((t.vocab_id for t in doc.tokens), dtype=np.int64, count=n)
            in_ids[1:n + 1, col] = ids
            in_vals[1:n + 1, col] = [numeric_feature(t) for t in doc.tokens]
            targets[:n, col] = ids
        targets[n, col] = eos
    return in_ids, in_vals, targets


def batch_loss_and_grads(model: LanguageModel, docs: list[Document]):
    """Summed cross-entropy over a minibatch and its full gradient.

    Returns (loss, n_positions, grads) with grads keyed like model.params().
    Gradients truncate at bptt_limit segment boundaries while state carries
    forward; padded steps contribute exactly zero loss and gradient.
    """
    cfg = model.config
    d = cfg.hidden_dim
    in_ids, in_vals, targets = _decoder_batch(docs, model.vocab)
    t_total, b = in_ids.shape
    x = model._embed(in_ids, in_vals)

    grads = {k: np.zeros_like(v) for k, v in model.params().items()}

    # Encoder: batch the lexicalized KBs, read each column's h at its last
    # real step.  Columns with empty KBs keep a zero initial state.
    h0 = np.zeros((b, d))
    c0 = np.zeros((b, d))
    enc = None
    if cfg.conditional:
        kb_tok = [model.kb_tokens(doc.kb) for doc in docs]
        klen = np.array([len(tk) for tk in kb_tok], dtype=np.int64)
        t_kb = int(klen.max())
        if t_kb > 0:
            enc_ids = np.full((t_kb, b), model.vocab.eos_id, dtype=np.int64)
            enc_vals = np.zeros((t_kb, b))
            for col, toks in enumerate(kb_tok):
                for row, tok in enumerate(toks):
                    enc_ids[row, col] = tok.vocab_id
                    enc_vals[row, col] = numeric_feature(tok)
            xe = model._embed(enc_ids, enc_vals, encoder_side=True)
            he, ce, ge = lstm_sequence(model.encoder, xe, h0, c0)
            cols = np.nonzero(klen > 0)[0]
            h0 = np.zeros((b, d))
            h0[cols] = he[klen[cols] - 1, cols]
            enc = (enc_ids, xe, he, ce, ge, klen, cols)

    # Decoder forward in truncated-BPTT segments.
    segments = []
    h_parts = []
    h_prev, c_prev = h0, c0
    for start in range(0, t_total, cfg.bptt_limit):
        xs = np.ascontiguousarray(x[start:start + cfg.bptt_limit])
        hs, cs, gs = lstm_sequence(model.decoder, xs, h_prev, c_prev)
        segments.append((start, xs, h_prev, c_prev, hs, cs, gs))
        h_parts.append(hs)
        h_prev, c_prev = hs[-1], cs[-1]
    h = np.concatenate(h_parts, axis=0)

    # Output layer + summed cross-entropy with padding masked out.
    flat_h = h.reshape(t_total * b, d)
    logp = log_softmax(flat_h @ model.e_out.T)
    tflat = targets.reshape(-1)
    rows = np.nonzero(tflat >= 0)[0]
    picked = np.maximum(logp[rows, tflat[rows]], LOG_FLOOR_LOG)
    loss = float(-picked.sum())
    count = int(rows.size)

    dlogits = np.exp(logp)
    dlogits[tflat < 0] = 0.0
    dlogits[rows, tflat[rows]] -= 1.0
    grads["e_out"] += dlogits.T @ flat_h
    dh = (dlogits @ model.e_out).reshape(t_total, b, d)

    # Decoder backward, newest segment first; carries truncate to zero at
    # segment boundaries, so only segment 0's dh0 reaches the encoder.
    zero_bd = np.zeros((b, d))
    dh0 = None
    d_ein_t = grads["e_in"].T
    for start, xs, h_prev, c_prev, hs, cs, gs in reversed(segments):
        seg_grads, dxs, dh0_seg, _ = lstm_sequence_backward(
            model.decoder, xs, h_prev, c_prev, hs, cs, gs,
            dh[start:start + xs.shape[0]], zero_bd, zero_bd)
        grads["dec_wx"] += seg_grads.wx
        grads["dec_wh"] += seg_grads.wh
        grads["dec_b"] += seg_grads.b
        np.add.at(d_ein_t, in_ids[start:start + xs.shape[0]].reshape(-1),
                  dxs[:, :, :d].reshape(-1, d))
        if start == 0:
            dh0 = dh0_seg

    if enc is not None:
        enc_ids, xe, he, ce, ge, klen, cols = enc
        dhe = np.zeros_like(he)
        dhe[klen[cols] - 1, cols] = dh0[cols]
        seg_grads, dxe, _, _ = lstm_sequence_backward(
            model.encoder, xe, np.zeros((b, d)), np.zeros((b, d)),
            he, ce, ge, dhe, zero_bd, zero_bd)
        grads["enc_wx"] += seg_grads.wx
        grads["enc_wh"] += seg_grads.wh
        grads["enc_b"] += seg_grads.b
        target_embed = grads["enc_embed"].T if model.enc_embed is not None else d_ein_t
        np.add.at(target_embed, enc_ids.reshape(-1), dxe[:, :, :d].reshape(-1, d))

    return loss, count, grads


def train(config: ModelConfig, vocab: Vocabulary, train_docs: list[Document],
          dev_docs: list[Document] | None = None) -> LanguageModel:
    """Train one variant: AdaDelta on summed cross-entropy over shuffled
    minibatches, deterministic given config.seed."""
    if not train_docs:
        raise DataError("empty training corpus")
    docs = [d if d.tokens is not None else encode_document(d, vocab) for d in train_docs]
    dev = None
    if dev_docs:
        dev = [d if d.tokens is not None else encode_document(d, vocab) for d in dev_docs]
    model = LanguageModel.init(config, vocab)
    opt = AdaDelta()
    params = model.params()
    n = len(docs)
    for epoch in range(config.epochs):
        order = np.random.default_rng([config.seed, 104729 + epoch]).permutation(n)
        epoch_loss = 0.0
        epoch_count = 0
        for start in range(0, n, config.minibatch):
            batch = [docs[i] for i in order[start:start + config.minibatch]]
            loss, count, grads = batch_loss_and_grads(model, batch)
            if not math.isfinite(loss):
                raise NumericError(
                    f"non-finite loss {loss!r} at epoch {epoch}, batch {start // config.minibatch}")
            opt.update_all(params, grads)
            epoch_loss += loss
            epoch_count += count
        if dev:
            logger.info("epoch %d: train nll/token %.4f, dev perplexity %.4f",
                        epoch + 1, epoch_loss / max(epoch_count, 1), model.perplexity(dev))
        else:
            logger.info("epoch %d: train nll/token %.4f",
                        epoch + 1, epoch_loss / max(epoch_count, 1))
    return model


# ---------------------------------------------------------------------------
# Checkpoints: magic, little-endian uint32 header length, JSON header
# (version, config, vocab_sha256, vocab_size, array manifest), then the raw
# float64 little-endian arrays in manifest order.

CHECKPOINT_MAGIC = b"ALMCKPT1"
CHECKPOINT_VERSION = 1


def save_model(model: LanguageModel, path) -> None:
    arrays = model.params()
    header = {
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "vocab_sha256": model.vocab.sha256(),
        "vocab_size": len(model.vocab),
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for v in arrays.values():
            fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())
    os.replace(tmp, path)


def _read_header(fh, path) -> dict:
    """Parse the header; leaves fh positioned at the first array byte."""
    magic = fh.read(len(CHECKPOINT_MAGIC))
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint")
    raw = fh.read(4)
    if len(raw) < 4:
        raise CheckpointError(f"{path}: truncated checkpoint header")
    (hlen,) = struct.unpack("<I", raw)
    blob = fh.read(hlen)
    if len(blob) < hlen:
        raise CheckpointError(f"{path}: truncated checkpoint header")
    try:
        header = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint header: {exc}") from exc
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported checkpoint version {header.get('version')!r}")
    return header


def read_checkpoint_header(path) -> dict:
    with open(path, "rb") as fh:
        return _read_header(fh, path)


def load_model(path, vocab: Vocabulary) -> LanguageModel:
    arrays = {}
    with open(path, "rb") as fh:
        header = _read_header(fh, path)
        if header["vocab_sha256"] != vocab.sha256():
            raise CheckpointError(f"{path}: vocabulary hash mismatch")
        try:
            config = ModelConfig.from_dict(header["config"])
        except (DataError, TypeError) as exc:
            raise CheckpointError(f"{path}: bad config in checkpoint: {exc}") from exc
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            n_bytes = int(np.prod(shape)) * 8
            raw = fh.read(n_bytes)
            if len(raw) < n_bytes:
                raise CheckpointError(f"{path}: truncated checkpoint array {spec['name']!r}")
            arrays[spec["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
    required = {"e_in", "e_out", "dec_wx", "dec_wh", "dec_b"}
    if config.conditional:
        required |= {"enc_wx", "enc_wh", "enc_b"}
        if not config.share_embeddings:
            required.add("enc_embed")
    if set(arrays) != required:
        raise CheckpointError(
            f"{path}: checkpoint arrays {sorted(arrays)} != expected {sorted(required)}")
    decoder = LstmParams(arrays["dec_wx"], arrays["dec_wh"], arrays["dec_b"])
    encoder = None
    if config.conditional:
        encoder = LstmParams(arrays["enc_wx"], arrays["enc_wh"], arrays["enc_b"])
    return LanguageModel(config, vocab, arrays["e_in"], arrays["e_out"],
                         decoder, encoder, arrays.get("enc_embed"))
