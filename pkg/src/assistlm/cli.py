"""Command-line pipeline: corpus generation, training, prediction and
completion evaluation, bounds, qualitative studies, the HTTP service, an
interactive terminal typing mode, and report merging.

Option precedence: command-line flags > ASSISTLM_* environment variables >
--config JSON file > built-in defaults.  Exit codes: 0 success, 2 usage
error, 3 data error, 4 numeric failure.

Reports are JSON (schema_version 1), deterministic byte-for-byte for fixed
flags and seeds: they carry no timestamps and are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from .complete_sim import (CompletionTally, PrefixLexicon, metrics_from_tally,
                           simulate_corpus, theoretical_bound, vocabulary_bound)
from .corpus import (Document, KbTuple, Vocabulary, build_vocabulary,
                     encode, encode_document, load_split, save_split)
from .errors import DataError, NumericError
from .generator import default_config, generate_corpus
from .lm import (VARIANTS, AblationFlags, LanguageModel, ModelConfig,
                 load_model, save_model, train)
from .predict_eval import OOV_POLICIES, REPORT_KS, evaluate_prediction
from .qualitative import (SubstitutionStudy, likelihood_ratio,
                          substitution_study, suggestion_list)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ABLATIONS = ("none", "kb", "v", "kb+v")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# Option resolution: flags > env > config file > defaults.

def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise DataError(f"cannot parse boolean {text!r}")


def _parse_k_list(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(p) for p in str(text).split(","))
    except ValueError as exc:
        raise DataError(f"bad k list {text!r}: {exc}") from exc
    if not ks or any(k < 1 for k in ks):
        raise DataError(f"bad k list {text!r}: entries must be >= 1")
    return ks


class Options:
    """Layered option lookup for one parsed invocation."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_cfg: dict = {}
        config_path = getattr(args, "config", None) or os.environ.get("ASSISTLM_CONFIG")
        if config_path:
            try:
                with open(config_path, "r", encoding="utf-8") as fh:
                    self.file_cfg = json.load(fh)
            except OSError as exc:
                raise DataError(f"cannot read config file {config_path}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise DataError(f"config file {config_path} is not valid JSON: {exc}") from exc
            if not isinstance(self.file_cfg, dict):
                raise DataError(f"config file {config_path} must hold a JSON object")

    def get(self, name: str, default, cast=None):
        value = getattr(self.args, name, None)
        if value is None:
            env = os.environ.get(f"ASSISTLM_{name.upper()}")
            if env is not None:
                value = env
            elif name in self.file_cfg:
                value = self.file_cfg[name]
            else:
                return default
        if cast is not None and value is not None:
            if cast is bool and isinstance(value, str):
                return _parse_bool(value)
            if cast is bool:
                return bool(value)
            return cast(value)
        return value

    def require(self, name: str, cast=None):
        value = self.get(name, None, cast)
        if value is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
        return value


class UsageError(Exception):
    pass


def _model_config(opts: Options, variant: str) -> ModelConfig:
    return ModelConfig.for_variant(
        variant,
        hidden_dim=opts.get("hidden_dim", 50, int),
        vocab_budget=opts.get("vocab_budget", 1000, int),
        epochs=opts.get("epochs", 20, int),
        minibatch=opts.get("minibatch", 64, int),
        bptt_limit=opts.get("bptt_limit", 256, int),
        seed=opts.get("seed", 1, int),
        value_scale=opts.get("value_scale", 1.0, float),
        share_embeddings=opts.get("share_embeddings", True, bool))


def _ablation_flags(label: str) -> AblationFlags:
    if label not in ABLATIONS:
        raise UsageError(f"unknown ablation {label!r}; expected one of {ABLATIONS}")
    parts = label.split("+")
    return AblationFlags(ignore_kb="kb" in parts, ignore_values="v" in parts)


def write_json_report(payload: dict, path) -> None:
    """Atomic, deterministic JSON write (sorted keys, no timestamps)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _load_eval_inputs(opts: Options):
    corpus_dir = opts.require("corpus")
    split = load_split(corpus_dir)
    vocab = Vocabulary.load(opts.require("vocab"))
    part = opts.get("split", "test")
    if part not in ("train", "dev", "test"):
        raise UsageError(f"unknown split {part!r}")
    docs = {"train": split.train, "dev": split.dev, "test": split.test}[part]
    return [encode_document(d, vocab) for d in docs], vocab, part


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_gen_corpus(opts: Options) -> int:
    out_dir = opts.require("out")
    n_docs = opts.get("n_docs", 1000, int)
    seed = opts.get("seed", 1, int)
    split = generate_corpus(default_config(n_docs=n_docs), seed=seed)
    save_split(split, out_dir)
    print(f"wrote {len(split.train)}/{len(split.dev)}/{len(split.test)} "
          f"train/dev/test documents to {out_dir}")
    return EXIT_OK


def cmd_train(opts: Options) -> int:
    variant = opts.get("variant", "baseline")
    if variant not in VARIANTS:
        raise UsageError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    corpus_dir = opts.require("corpus")
    out_dir = Path(opts.require("out"))
    split = load_split(corpus_dir)
    config = _model_config(opts, variant)
    vocab = build_vocabulary(split.train, config.vocab_budget)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab_path = out_dir / "vocab.json"
    vocab.save(vocab_path)
    model = train(config, vocab, split.train, split.dev)
    name = f"{variant}-seed{config.seed}"
    ckpt_path = out_dir / f"{name}.ckpt"
    save_model(model, ckpt_path)
    dev_docs = [encode_document(d, vocab) for d in split.dev]
    test_docs = [encode_document(d, vocab) for d in split.test]
    report = {
        "schema_version": SCHEMA_VERSION,
        "task": "train",
        "variant": variant,
        "seed": config.seed,
        "config": config.to_dict(),
        "vocab_size": len(vocab),
        "checkpoint": ckpt_path.name,
        "dev_perplexity": model.perplexity(dev_docs) if dev_docs else None,
        "test_perplexity": model.perplexity(test_docs) if test_docs else None,
    }
    write_json_report(report, out_dir / f"train-{name}.json")
    print(f"trained {variant} (seed {config.seed}) -> {ckpt_path}")
    return EXIT_OK


def _eval_common(opts: Options):
    docs, vocab, part = _load_eval_inputs(opts)
    model = load_model(opts.require("model"), vocab)
    ablation_label = opts.get("ablation", "none")
    ablation = _ablation_flags(ablation_label)
    return docs, vocab, part, model, ablation_label, ablation


def cmd_eval_predict(opts: Options) -> int:
    docs, _, part, model, ablation_label, ablation = _eval_common(opts)
    oov_policy = opts.get("oov_policy", "miss")
    if oov_policy not in OOV_POLICIES:
        raise UsageError(f"unknown oov policy {oov_policy!r}")
    ks = opts.get("k", REPORT_KS, _parse_k_list)
    metrics, records = evaluate_prediction(model, docs, ablation, oov_policy, tuple(ks))
    report = {
        "schema_version": SCHEMA_VERSION,
        "task": "predict",
        "variant": model.config.variant,
        "seed": model.config.seed,
        "ablation": ablation_label,
        "oov_policy": oov_policy,
        "split": part,
        "metrics": metrics.to_dict(),
    }
    out = opts.require("out")
    write_json_report(report, out)
    csv_path = opts.get("csv", None)
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "position", "target", "rank"])
            for r in records:
                writer.writerow([r.doc_id, r.position, r.target_id,
                                 r.rank if r.rank is not None else "miss"])
    print(f"predict: MRR {metrics.mrr:.4f}, Recall@5 "
          f"{metrics.recall_at.get(5, float('nan')):.4f}, "
          f"perplexity {metrics.perplexity:.3f} -> {out}")
    return EXIT_OK


def cmd_eval_complete(opts: Options) -> int:
    docs, _, part, model, ablation_label, ablation = _eval_common(opts)
    count_accept_key = opts.get("count_accept_key", False, bool)
    tally, metrics, outcomes = simulate_corpus(model, docs, ablation, count_accept_key)
    report = {
        "schema_version": SCHEMA_VERSION,
        "task": "complete",
        "variant": model.config.variant,
        "seed": model.config.seed,
        "ablation": ablation_label,
        "count_accept_key": count_accept_key,
        "split": part,
        "tally": tally.to_dict(),
        "metrics": metrics.to_dict(),
    }
    out = opts.require("out")
    write_json_report(report, out)
    log_path = opts.get("log", None)
    if log_path:
        with open(log_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "word_index", "word", "accepted",
                             "prefix_len_at_accept", "distraction_chars"])
            for doc, words in zip(docs, outcomes):
                for i, w in enumerate(words):
                    writer.writerow([doc.id, i, w.word, int(w.accepted),
                                     w.accept_prefix, w.distraction_chars])
    ud = f"{metrics.ud:.4f}" if metrics.ud is not None else "n/a"
    print(f"complete: KS {metrics.ks:.4f}, UD {ud}, F1 {metrics.f1:.4f} -> {out}")
    return EXIT_OK


def cmd_bounds(opts: Options) -> int:
    docs, vocab, part = _load_eval_inputs(opts)
    t_tally, t_metrics = theoretical_bound(docs)
    v_tally, v_metrics = vocabulary_bound(docs, vocab)
    report = {
        "schema_version": SCHEMA_VERSION,
        "task": "bounds",
        "split": part,
        "theoretical": {"tally": t_tally.to_dict(), "metrics": t_metrics.to_dict()},
        "vocabulary": {"tally": v_tally.to_dict(), "metrics": v_metrics.to_dict()},
    }
    out = opts.require("out")
    write_json_report(report, out)
    print(f"bounds: theoretical KS {t_metrics.ks:.4f}, "
          f"vocabulary KS {v_metrics.ks:.4f} -> {out}")
    return EXIT_OK


def cmd_qualitative(opts: Options) -> int:
    docs, vocab, part = _load_eval_inputs(opts)
    model = load_model(opts.require("model"), vocab)
    ablation = _ablation_flags(opts.get("ablation", "none"))
    doc_index = opts.get("doc_index", 0, int)
    if not 0 <= doc_index < len(docs):
        raise UsageError(f"doc index {doc_index} outside split of {len(docs)} documents")
    doc = docs[doc_index]
    payload: dict = {
        "schema_version": SCHEMA_VERSION,
        "task": "qualitative",
        "variant": model.config.variant,
        "seed": model.config.seed,
        "split": part,
        "doc_id": doc.id,
    }

    slot = None
    attribute = opts.get("attribute", None)
    if doc.meta is not None and doc.meta.graded_slots:
        slot = next((g for g in doc.meta.graded_slots
                     if attribute in (None, g.attribute)), None)
    if attribute is None and slot is not None:
        attribute = slot.attribute

    position = opts.get("position", None, int)
    if position is None:
        position = slot.position if slot is not None else 0
    watch = opts.get("watch", None)
    watch_words = watch.split(",") if watch else (slot.candidates if slot else [])
    k = opts.get("suggestions", 5, int)
    payload["suggestion_list"] = suggestion_list(
        model, doc, position, k, watch_words, ablation).to_dict()

    values = opts.get("values", None)
    if slot is not None and attribute is not None:
        if values is not None:
            substitutions = [float(v) for v in str(values).split(",")]
        else:
            low, high = _attribute_range(attribute)
            substitutions = [low, (low + high) / 2.0, high]
        study = SubstitutionStudy(
            doc=doc, slot_position=slot.position, candidates=slot.candidates,
            configurations=[{attribute: v} for v in substitutions])
        payload["substitution"] = {
            "attribute": attribute,
            "grid": substitution_study(model, study, ablation).to_dict(),
        }

    model_b_path = opts.get("model_b", None)
    if model_b_path:
        model_b = load_model(model_b_path, vocab)
        series = likelihood_ratio(model, model_b, doc, ablation, ablation)
        payload["likelihood_ratio"] = {
            "model_b_variant": model_b.config.variant,
            "series": series.to_dict(),
        }
        tsv_path = opts.get("tsv", None)
        if tsv_path:
            with open(tsv_path, "w", encoding="utf-8") as fh:
                fh.write("token\tratio\n")
                for tok, ratio in zip(series.tokens, series.ratios):
                    fh.write(f"{tok}\t{ratio!r}\n")

    out = opts.require("out")
    write_json_report(payload, out)
    print(f"qualitative study of {doc.id} -> {out}")
    return EXIT_OK


def _attribute_range(attribute: str) -> tuple[float, float]:
    for spec in default_config().attributes:
        if spec.name == attribute and not spec.is_choice:
            return float(spec.low), float(spec.high)
    raise UsageError(f"no numeric range known for attribute {attribute!r}; pass --values")


def cmd_serve(opts: Options) -> int:
    from .service import run

    model_dir = opts.require("models")
    vocab_path = opts.get("vocab", os.path.join(model_dir, "vocab.json"))
    run(model_dir=model_dir,
        vocab_path=vocab_path,
        host=opts.get("host", "127.0.0.1"),
        port=opts.get("port", 8000, int),
        default_k=opts.get("default_k", 5, int))
    return EXIT_OK


def cmd_report(opts: Options) -> int:
    inputs = list(getattr(opts.args, "inputs", []) or [])
    if not inputs:
        raise UsageError("report needs at least one input JSON")
    by_task: dict[str, dict[str, list[dict]]] = {"predict": {}, "complete": {}}
    extras = []
    for path in inputs:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read report {path}: {exc}") from exc
        task = data.get("task")
        if task not in by_task:
            extras.append(path)
            continue
        label = _row_label(data.get("variant", "?"), data.get("ablation", "none"))
        by_task[task].setdefault(label, []).append(data)

    tables = {}
    for task, columns in (("predict", _PREDICT_COLUMNS), ("complete", _COMPLETE_COLUMNS)):
        rows = []
        for label in sorted(by_task[task], key=_label_sort_key):
            entries = sorted(by_task[task][label], key=lambda d: d.get("seed", 0))
            cells = {}
            for col, getter in columns.items():
                vals = [getter(e) for e in entries]
                vals = [v for v in vals if v is not None]
                cells[col] = (sum(vals) / len(vals)) if vals else None
            rows.append({"label": label,
                         "seeds": [e.get("seed") for e in entries],
                         "cells": cells,
                         "sources": [e for e in entries]})
        tables[task] = rows

    report = {"schema_version": SCHEMA_VERSION, "task": "report", "tables": tables}
    out = opts.require("out")
    write_json_report(report, out)
    text = _render_tables(tables)
    print(text, end="")
    txt_path = opts.get("txt", None)
    if txt_path:
        Path(txt_path).write_text(text, encoding="utf-8")
    csv_path = opts.get("csv", None)
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            for task, columns in (("predict", _PREDICT_COLUMNS), ("complete", _COMPLETE_COLUMNS)):
                writer.writerow([task] + list(columns))
                for row in tables[task]:
                    writer.writerow([row["label"]] + [
                        _fmt_cell(row["cells"][c]) for c in columns])
    return EXIT_OK


def _row_label(variant: str, ablation: str) -> str:
    base = "baseline" if variant == "baseline" else "+" + variant
    if ablation and ablation != "none":
        base += "".join(f"-{p}" for p in ablation.split("+"))
    return base


def _label_sort_key(label: str):
    """Plain variants first, then their ablations, in variant order."""
    order = ["baseline", "+c", "+g", "+c+g"]
    base = label.split("-", 1)[0]
    variant_rank = order.index(base) if base in order else len(order)
    return ("-" in label, variant_rank, label)


def _metric(path: str):
    def getter(entry: dict):
        node = entry
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return None
            node = node[part]
        return node if isinstance(node, (int, float)) else None
    return getter


_PREDICT_COLUMNS = {
    "MRR": _metric("metrics.mrr"),
    "R@1": _metric("metrics.recall_at.1"),
    "R@2": _metric("metrics.recall_at.2"),
    "R@3": _metric("metrics.recall_at.3"),
    "R@5": _metric("metrics.recall_at.5"),
    "R@10": _metric("metrics.recall_at.10"),
    "PPL": _metric("metrics.perplexity"),
}

_COMPLETE_COLUMNS = {
    "KS": _metric("metrics.ks"),
    "UD": _metric("metrics.ud"),
    "P": _metric("metrics.precision"),
    "R": _metric("metrics.recall"),
    "F1": _metric("metrics.f1"),
}


def _fmt_cell(value) -> str:
    if value is None:
        return "n/a"
    return f"{value:.4f}"


def _render_tables(tables: dict) -> str:
    lines = []
    for task, columns in (("predict", _PREDICT_COLUMNS), ("complete", _COMPLETE_COLUMNS)):
        rows = tables[task]
        if not rows:
            continue
        lines.append(f"[{task}]")
        headers = ["model"] + list(columns)
        body = [[row["label"]] + [_fmt_cell(row["cells"][c]) for c in columns]
                for row in rows]
        widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h)
                  for i, h in enumerate(headers)]
        lines.append("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
        for r in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        lines.append("")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Interactive terminal typing mode.

class TypingSession:
    """Keystroke-level session mirroring the simulator's accounting.

    Printable keys extend the current word; space commits it; tab accepts
    the displayed ghost completion.  A displayed suggestion that is not
    accepted at its prefix counts toward distraction, exactly as in the
    offline simulation.
    """

    def __init__(self, model: LanguageModel, kb: list[KbTuple],
                 ablation: AblationFlags = AblationFlags(),
                 count_accept_key: bool = False):
        self.model = model
        self.ablation = ablation
        self.count_accept_key = count_accept_key
        self.lexicon = PrefixLexicon(model.vocab)
        self.tally = CompletionTally()
        self.words: list[str] = []
        self.prefix = ""
        self._state = model.init_state(kb, ablation)
        self._state, self._dist = model.step(self._state, model.bos_token(), ablation)

    @property
    def ghost(self) -> str | None:
        if not self.prefix:
            return None
        match = self.lexicon.best_match(self.prefix, self._dist)
        return match[0] if match else None

    def top_words(self, k: int = 5) -> list[tuple[str, float]]:
        import numpy as np
        order = np.lexsort((np.arange(self._dist.size), -self._dist))
        out = []
        for i in order:
            if int(i) in self.model.vocab.special_ids:
                continue
            out.append((self.model.vocab.surface(int(i)), float(self._dist[i])))
            if len(out) >= k:
                break
        return out

    def _flush_ghost_distraction(self) -> None:
        shown = self.ghost
        if shown is not None:
            self.tally.distraction_chars += len(shown) - len(self.prefix)

    def _commit(self, word: str) -> None:
        self.words.append(word)
        token = encode(word, self.model.vocab)
        self._state, self._dist = self.model.step(self._state, token, self.ablation)
        self.prefix = ""

    def press_char(self, ch: str) -> None:
        self._flush_ghost_distraction()
        self.prefix += ch
        self.tally.typed_keys += 1
        self.tally.total_chars += 1

    def press_space(self) -> None:
        if self.prefix:
            self._flush_ghost_distraction()
            self._commit(self.prefix)
        self.tally.typed_keys += 1
        self.tally.total_chars += 1

    def press_tab(self) -> bool:
        shown = self.ghost
        if shown is None:
            return False
        saved = len(shown) - len(self.prefix)
        self.tally.accepted_chars += saved
        self.tally.total_chars += saved
        self.tally.accept_events += 1
        if self.count_accept_key:
            self.tally.typed_keys += 1
        self._commit(shown)
        return True

    def finish(self) -> None:
        if self.prefix:
            self._flush_ghost_distraction()
            self._commit(self.prefix)

    def metrics(self):
        return metrics_from_tally(self.tally)


def _render_session(session: TypingSession) -> str:
    m = session.metrics()
    ghost = session.ghost
    line = " ".join(session.words)
    if session.prefix:
        line = f"{line} {session.prefix}" if line else session.prefix
        if ghost and len(ghost) > len(session.prefix):
            line += f"[{ghost[len(session.prefix):]}]"
    ud = f"{m.ud:.2f}" if m.ud is not None else "n/a"
    return f"KS {m.ks:.3f} UD {ud} | {line}"


def cmd_interactive(opts: Options) -> int:
    vocab = Vocabulary.load(opts.require("vocab"))
    model = load_model(opts.require("model"), vocab)
    ablation = _ablation_flags(opts.get("ablation", "none"))
    kb: list[KbTuple] = []
    kb_path = opts.get("kb", None)
    if kb_path:
        with open(kb_path, "r", encoding="utf-8") as fh:
            kb = [KbTuple(t["attribute"], t.get("value")) for t in json.load(fh)]
    session = TypingSession(model, kb, ablation,
                            opts.get("count_accept_key", False, bool))

    def show_predictions():
        tops = session.top_words(5)
        print("next word: " + "  ".join(f"{w} ({p:.3f})" for w, p in tops))

    show_predictions()
    if sys.stdin.isatty():
        _interactive_tty(session, show_predictions)
    else:
        _interactive_replay(session, show_predictions)
    session.finish()
    m = session.metrics()
    ud = f"{m.ud:.4f}" if m.ud is not None else "n/a"
    print(f"\nfinal: KS {m.ks:.4f} UD {ud} F1 {m.f1:.4f} "
          f"({session.tally.typed_keys}/{session.tally.total_chars} keys)")
    return EXIT_OK


def _interactive_replay(session: TypingSession, show_predictions) -> None:
    """Non-TTY mode: replay stdin text as keystrokes (tab chars accept)."""
    text = sys.stdin.read()
    for ch in text:
        if ch == "\t":
            if session.press_tab():
                show_predictions()
        elif ch in (" ", "\n"):
            had_word = bool(session.prefix)
            session.press_space()
            if had_word:
                show_predictions()
        else:
            session.press_char(ch)
        print(_render_session(session))


def _interactive_tty(session: TypingSession, show_predictions) -> None:
    import termios
    import tty

    fd = sys.stdin.fileno()
    old = termios.tcgetattr(fd)
    print("type text; tab accepts the [ghost]; ctrl-d ends\n")
    try:
        tty.setraw(fd)
        while True:
            ch = sys.stdin.read(1)
            if not ch or ch in ("\x04", "\x03"):   # ctrl-d / ctrl-c
                break
            termios.tcsetattr(fd, termios.TCSADRAIN, old)
            if ch == "\t":
                if session.press_tab():
                    show_predictions()
            elif ch in (" ", "\r", "\n"):
                had_word = bool(session.prefix)
                session.press_space()
                if had_word:
                    show_predictions()
            elif ch.isprintable():
                session.press_char(ch)
            print("\r" + _render_session(session), end="    \n" if ch in ("\r", "\n") else "    ")
            sys.stdout.flush()
            tty.setraw(fd)
    finally:
        termios.tcsetattr(fd, termios.TCSADRAIN, old)
        print()


# ---------------------------------------------------------------------------
# Argument parsing and dispatch.

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assistlm",
        description="Knowledge-conditioned, numerically grounded LSTM language "
                    "models with typing-simulation evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", help="JSON config file (flags > env > file > defaults)")
        p.add_argument("--seed", type=int, help="random seed (default 1)")
        return p

    p = add("gen-corpus", cmd_gen_corpus, "generate a synthetic report corpus")
    p.add_argument("--out", help="output corpus directory")
    p.add_argument("--n-docs", dest="n_docs", type=int, help="number of documents (default 1000)")

    p = add("train", cmd_train, "train one model variant")
    p.add_argument("--corpus", help="corpus directory from gen-corpus")
    p.add_argument("--out", help="output directory for vocab/checkpoint/report")
    p.add_argument("--variant", choices=VARIANTS, help="model variant (default baseline)")
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--vocab-budget", dest="vocab_budget", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--minibatch", type=int)
    p.add_argument("--bptt-limit", dest="bptt_limit", type=int)
    p.add_argument("--value-scale", dest="value_scale", type=float)
    p.add_argument("--no-share-embeddings", dest="share_embeddings",
                   action="store_false", default=None)

    for name, func, extra in (("eval-predict", cmd_eval_predict, "predict"),
                              ("eval-complete", cmd_eval_complete, "complete")):
        p = add(name, func, f"run the word-{extra} evaluation")
        p.add_argument("--corpus", help="corpus directory")
        p.add_argument("--vocab", help="vocabulary JSON path")
        p.add_argument("--model", help="checkpoint path")
        p.add_argument("--split", choices=("train", "dev", "test"))
        p.add_argument("--ablation", choices=ABLATIONS)
        p.add_argument("--out", help="output report JSON path")
        if extra == "predict":
            p.add_argument("--oov-policy", dest="oov_policy", choices=OOV_POLICIES)
            p.add_argument("--k", help="comma-separated recall ranks (default 1,2,3,5,10)")
            p.add_argument("--csv", help="optional per-position CSV path")
        else:
            p.add_argument("--count-accept-key", dest="count_accept_key",
                           action="store_true", default=None)
            p.add_argument("--log", help="optional per-word event CSV path")

    p = add("bounds", cmd_bounds, "compute theoretical and vocabulary bounds")
    p.add_argument("--corpus", help="corpus directory")
    p.add_argument("--vocab", help="vocabulary JSON path")
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--out", help="output report JSON path")

    p = add("qualitative", cmd_qualitative, "suggestion lists, substitution grid, ratios")
    p.add_argument("--corpus", help="corpus directory")
    p.add_argument("--vocab", help="vocabulary JSON path")
    p.add_argument("--model", help="checkpoint path")
    p.add_argument("--model-b", dest="model_b", help="second checkpoint for likelihood ratios")
    p.add_argument("--split", choices=("train", "dev", "test"))
    p.add_argument("--ablation", choices=ABLATIONS)
    p.add_argument("--doc-index", dest="doc_index", type=int)
    p.add_argument("--position", type=int, help="token position for the suggestion list")
    p.add_argument("--suggestions", type=int, help="suggestion list length (default 5)")
    p.add_argument("--watch", help="comma-separated watch words")
    p.add_argument("--attribute", help="attribute for the substitution study")
    p.add_argument("--values", help="comma-separated substitute values")
    p.add_argument("--tsv", help="optional plot-ready TSV for the ratio series")
    p.add_argument("--out", help="output report JSON path")

    p = add("serve", cmd_serve, "serve the HTTP JSON API")
    p.add_argument("--models", help="checkpoint directory")
    p.add_argument("--vocab", help="vocabulary JSON path (default <models>/vocab.json)")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--default-k", dest="default_k", type=int)

    p = add("interactive", cmd_interactive, "terminal typing loop with live metrics")
    p.add_argument("--model", help="checkpoint path")
    p.add_argument("--vocab", help="vocabulary JSON path")
    p.add_argument("--kb", help="JSON file with KB tuples for conditioning")
    p.add_argument("--ablation", choices=ABLATIONS)
    p.add_argument("--count-accept-key", dest="count_accept_key",
                   action="store_true", default=None)

    p = add("report", cmd_report, "merge evaluation JSONs into comparison tables")
    p.add_argument("inputs", nargs="*", help="evaluation report JSON files")
    p.add_argument("--out", help="merged report JSON path")
    p.add_argument("--txt", help="optional plain-text table path")
    p.add_argument("--csv", help="optional CSV table path")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("ASSISTLM_LOG", "INFO"),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return args.func(opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
