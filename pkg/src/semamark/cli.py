"""Command-line pipeline: ingest, train-lm, make-dataset, train-mapper,
watermark, detect, attack, evaluate, steal, sweep.

Every run resolves settings as defaults < config file < flags, writes the
resolved configuration next to its outputs, and stamps CSV artifacts with the
configuration hash. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import evaluation as ev
from .lm import load_lm, save_lm, train_lm
from .mapping import (MappingModel, ModelFormatError, VocabMismatchError, init_model,
                      load_model, save_model)
from .text import Corpus, CorpusError, Vocabulary, ingest_corpus, read_documents, tokenize
from .training import TrainConfig, TrainingDiverged, train, write_training_log
from .util import config_hash, ensure_dir, write_csv, write_jsonl
from .watermark import (WatermarkParams, load_records, save_records, synonym_id_map,
                        watermark_text)
from .util import rng_for, stream_key


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must exit 1, not argparse's 2
        raise UsageError(message)


def _default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


def load_config_file(path) -> dict[str, str]:
    """Flat `key = value` document; blank lines and # comments ignored."""
    config: dict[str, str] = {}
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    for i, line in enumerate(raw.splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"bad config line {i + 1} in {path}: {line!r}")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


class RunConfig:
    """Merged settings: flags win over the config file, which wins over
    defaults. Every resolved value is recorded for provenance."""

    def __init__(self, args: argparse.Namespace, defaults: dict):
        self.values: dict = dict(defaults)
        if getattr(args, "config", None):
            file_cfg = load_config_file(args.config)
            for key in self.values:
                if key in file_cfg:
                    self.values[key] = file_cfg[key]
        for key in self.values:
            flag_val = getattr(args, key, None)
            if flag_val is not None:
                self.values[key] = flag_val

    def get(self, key, cast=str):
        val = self.values[key]
        if val is None:
            return None
        if cast is bool and isinstance(val, str):
            return val.lower() in ("1", "true", "yes")
        return cast(val)

    def hash(self) -> str:
        return config_hash({k: self.values[k] for k in self.values})

    def write(self, out_dir: Path, command: str) -> str:
        h = self.hash()
        lines = [f"# config_hash={h}", f"command = {command}"]
        for key in sorted(self.values):
            lines.append(f"{key} = {self.values[key]}")
        (out_dir / f"{command}_config.txt").write_text("\n".join(lines) + "\n",
                                                       encoding="utf-8")
        return h


def _read_input_texts(path) -> list[str]:
    """Texts from a .txt/.jsonl corpus, or the outputs of a watermark run."""
    path = Path(path)
    if path.suffix == ".jsonl":
        texts = []
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from exc
        for i, line in enumerate(raw.splitlines()):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"bad record at {path}:{i + 1}: {exc}") from exc
            if "output" in rec:
                texts.append(str(rec["output"]))
            elif "text" in rec:
                texts.append(str(rec["text"]))
            else:
                raise DataError(f"record at {path}:{i + 1} has no text/output field")
        return texts
    try:
        return read_documents(path)
    except CorpusError as exc:
        raise DataError(str(exc)) from exc


def _load_vocab(path) -> Vocabulary:
    try:
        return Vocabulary.load(path)
    except (OSError, CorpusError, ValueError) as exc:
        raise DataError(f"cannot load vocabulary: {exc}") from exc


def _load_mapper(path, vocab: Vocabulary | None = None) -> MappingModel:
    try:
        return load_model(path, vocab)
    except (OSError, ModelFormatError, VocabMismatchError) as exc:
        raise DataError(f"cannot load mapping model: {exc}") from exc


def _load_lm(path, vocab: Vocabulary):
    try:
        return load_lm(path, vocab)
    except (OSError, CorpusError) as exc:
        raise DataError(f"cannot load language model: {exc}") from exc


def _lexicons(cfg: RunConfig) -> ds.Lexicons:
    directory = cfg.get("lexicons")
    try:
        if directory in (None, "", "bundled"):
            return ds.default_lexicons()
        return ds.load_lexicons(directory)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot load lexicons: {exc}") from exc


def _wm_params(cfg: RunConfig) -> WatermarkParams:
    params = WatermarkParams(
        delta=cfg.get("delta", float),
        entropy_threshold=cfg.get("entropy_threshold", float),
        temperature=cfg.get("temperature", float),
        top_p=cfg.get("top_p", float),
        conditioning=cfg.get("conditioning"),
        scheme=cfg.get("scheme"),
        fidelity_weight=cfg.get("fidelity_weight", float),
        additive=cfg.get("additive", bool),
        gamma=cfg.get("gamma", float),
        key=cfg.get("key", int),
        seed=cfg.get("seed", int),
    )
    try:
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return params


WM_DEFAULTS = {
    "delta": 0.13, "entropy_threshold": 2.0, "temperature": 0.7, "top_p": 0.9,
    "scheme": "semantic", "conditioning": "global", "fidelity_weight": 4.0,
    "additive": False, "gamma": 0.5, "key": 7, "seed": 0,
}


def _add_common(sub: argparse.ArgumentParser, with_jobs: bool = True) -> None:
    sub.add_argument("--config", help="flat key = value config file")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--seed", type=int)
    if with_jobs:
        sub.add_argument("--jobs", type=int)


def _add_wm_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--delta", type=float)
    sub.add_argument("--entropy-threshold", dest="entropy_threshold", type=float)
    sub.add_argument("--temperature", type=float)
    sub.add_argument("--top-p", dest="top_p", type=float)
    sub.add_argument("--scheme", choices=("semantic", "kgw", "unigram"))
    sub.add_argument("--conditioning", choices=("global", "prefix"))
    sub.add_argument("--fidelity-weight", dest="fidelity_weight", type=float)
    sub.add_argument("--additive", action="store_const", const=True, default=None)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--key", type=int)
    sub.add_argument("--lexicons")


def build_parser() -> _Parser:
    parser = _Parser(prog="semamark", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("ingest", help="filter a corpus and build its vocabulary")
    _add_common(p, with_jobs=False)
    p.add_argument("--input", required=True)
    p.add_argument("--min-words", dest="min_words", type=int)
    p.add_argument("--max-words", dest="max_words", type=int)
    p.add_argument("--max-vocab", dest="max_vocab", type=int)

    p = subs.add_parser("train-lm", help="train the n-gram language model")
    _add_common(p, with_jobs=False)
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--order", type=int)
    p.add_argument("--smoothing-k", dest="smoothing_k", type=float)

    p = subs.add_parser("make-dataset", help="build the triplet dataset")
    _add_common(p, with_jobs=False)
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicons")
    p.add_argument("--n-positives", dest="n_positives", type=int)
    p.add_argument("--replace-rate", dest="replace_rate", type=float)
    p.add_argument("--max-edits", dest="max_edits", type=int)
    p.add_argument("--eval-docs", dest="eval_docs", type=int)
    p.add_argument("--val-docs", dest="val_docs", type=int)
    p.add_argument("--train-docs", dest="train_docs", type=int)

    p = subs.add_parser("train-mapper", help="contrastively train the mapping model")
    _add_common(p, with_jobs=False)
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("--lambda-text", dest="lambda_text", type=float)
    p.add_argument("--lambda-token", dest="lambda_token", type=float)

    p = subs.add_parser("watermark", help="embed watermarks into target texts")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--mapper")
    p.add_argument("--vocab", required=True)
    _add_wm_flags(p)

    p = subs.add_parser("detect", help="score texts for the watermark")
    _add_common(p, with_jobs=False)
    p.add_argument("--input", required=True)
    p.add_argument("--mapper")
    p.add_argument("--vocab", required=True)
    p.add_argument("--scheme", choices=("semantic", "kgw", "unigram"))
    p.add_argument("--conditioning", choices=("global", "prefix"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--key", type=int)
    p.add_argument("--threshold", type=float, help="optional binary-decision cutoff")

    p = subs.add_parser("attack", help="apply a transform to texts")
    _add_common(p, with_jobs=False)
    p.add_argument("--input", required=True)
    p.add_argument("--kind", required=True,
                   choices=("paraphrase", "sentiment", "sentiment_latter", "hate"))
    p.add_argument("--replace-rate", dest="replace_rate", type=float)
    p.add_argument("--max-edits", dest="max_edits", type=int)
    p.add_argument("--n-phrases", dest="n_phrases", type=int)
    p.add_argument("--lexicons")

    p = subs.add_parser("evaluate", help="run the four-condition attack suite")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--mapper")
    p.add_argument("--vocab", required=True)
    p.add_argument("--replace-rate", dest="replace_rate", type=float)
    p.add_argument("--max-edits", dest="max_edits", type=int)
    _add_wm_flags(p)

    p = subs.add_parser("steal", help="token-frequency stealing attack")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--mapper")
    p.add_argument("--vocab", required=True)
    p.add_argument("--n-targets", dest="n_targets", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--ks")
    _add_wm_flags(p)

    p = subs.add_parser("sweep", help="watermark strength trade-off sweep")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--mapper")
    p.add_argument("--vocab", required=True)
    p.add_argument("--deltas", help="comma-separated strength values")
    p.add_argument("--replace-rate", dest="replace_rate", type=float)
    p.add_argument("--max-edits", dest="max_edits", type=int)
    _add_wm_flags(p)

    return parser


# ---------------------------------------------------------------------------
# Subcommand bodies

def cmd_ingest(args) -> int:
    cfg = RunConfig(args, {"min_words": 200, "max_words": 300, "max_vocab": 2000,
                           "seed": 0, "input": args.input})
    out = ensure_dir(args.out)
    try:
        corpus = ingest_corpus(args.input, cfg.get("min_words", int),
                               cfg.get("max_words", int), max_vocab=cfg.get("max_vocab", int))
    except CorpusError as exc:
        raise DataError(str(exc)) from exc
    corpus.vocab.save(out / "vocab.txt")
    write_jsonl(out / "corpus.jsonl", [{"text": t} for t in corpus.texts])
    h = cfg.write(out, "ingest")
    write_csv(out / "ingest_stats.csv", ["key", "value"],
              sorted(corpus.provenance.items()), h)
    print(f"ingested {len(corpus)} documents, vocabulary size {corpus.vocab.size}")
    return 0


def cmd_train_lm(args) -> int:
    cfg = RunConfig(args, {"order": 3, "smoothing_k": 1.0, "seed": 0,
                           "corpus": args.corpus, "vocab": args.vocab})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    texts = _read_input_texts(args.corpus)
    if not texts:
        raise DataError("empty corpus")
    corpus = Corpus([tokenize(t, vocab) for t in texts], vocab)
    try:
        model = train_lm(corpus, cfg.get("order", int), cfg.get("smoothing_k", float))
    except (ValueError, CorpusError) as exc:
        raise DataError(str(exc)) from exc
    save_lm(model, out / "lm.ngram")
    cfg.write(out, "train-lm")
    print(f"trained order-{model.order} model over {vocab.size} token types")
    return 0


def cmd_make_dataset(args) -> int:
    cfg = RunConfig(args, {"n_positives": 4, "replace_rate": 0.3, "max_edits": 8,
                           "eval_docs": 200, "val_docs": 60, "train_docs": 0,
                           "seed": 0, "corpus": args.corpus})
    out = ensure_dir(args.out)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.corpus)
    n_eval, n_val = cfg.get("eval_docs", int), cfg.get("val_docs", int)
    if n_eval + n_val >= len(texts):
        raise DataError(f"corpus of {len(texts)} docs cannot supply "
                        f"{n_eval} eval + {n_val} val docs")
    train_texts, val_texts, eval_texts = ds.split_corpus(texts, n_eval, n_val,
                                                         cfg.get("seed", int))
    limit = cfg.get("train_docs", int)
    if limit:
        train_texts = train_texts[:limit]
    seed = cfg.get("seed", int)
    kw = dict(n_positives=cfg.get("n_positives", int),
              replace_rate=cfg.get("replace_rate", float),
              max_edits=cfg.get("max_edits", int))
    train_recs, train_stats = ds.build_triplets(train_texts, lexicons, seed=seed, **kw)
    val_recs, val_stats = ds.build_triplets(val_texts, lexicons, seed=seed + 1, **kw)
    if not train_recs or not val_recs:
        raise DataError("triplet construction produced an empty split")
    ds.save_triplets(train_recs, out / "triplets_train.jsonl")
    ds.save_triplets(val_recs, out / "triplets_val.jsonl")
    write_jsonl(out / "eval_texts.jsonl", [{"text": t} for t in eval_texts])
    h = cfg.write(out, "make-dataset")
    rows = [(f"train_{k}", v) for k, v in sorted(train_stats.as_dict().items())]
    rows += [(f"val_{k}", v) for k, v in sorted(val_stats.as_dict().items())]
    write_csv(out / "dataset_stats.csv", ["key", "value"], rows, h)
    print(f"built {len(train_recs)} train / {len(val_recs)} val triplets, "
          f"{len(eval_texts)} eval texts")
    return 0


def cmd_train_mapper(args) -> int:
    cfg = RunConfig(args, {"feature_dim": 4096, "hidden_dim": 256, "epochs": 15,
                           "lr": 3e-3, "batch_size": 64, "margin": 0.3,
                           "lambda_text": 1.0, "lambda_token": 1.0, "seed": 0,
                           "train": args.train, "val": args.val, "vocab": args.vocab})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    try:
        train_recs = ds.load_triplets(args.train)
        val_recs = ds.load_triplets(args.val)
    except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load triplets: {exc}") from exc
    if not train_recs or not val_recs:
        raise DataError("empty triplet split")
    train_set = ds.tokenize_records(train_recs, vocab)
    val_set = ds.tokenize_records(val_recs, vocab)
    tc = TrainConfig(margin=cfg.get("margin", float), lambda_text=cfg.get("lambda_text", float),
                     lambda_token=cfg.get("lambda_token", float), epochs=cfg.get("epochs", int),
                     learning_rate=cfg.get("lr", float), batch_size=cfg.get("batch_size", int),
                     seed=cfg.get("seed", int))
    model = init_model(vocab, cfg.get("feature_dim", int), cfg.get("hidden_dim", int),
                       seed=cfg.get("seed", int))
    try:
        best, log = train(train_set, val_set, tc, model)
    except TrainingDiverged as exc:
        raise DataError(str(exc)) from exc
    save_model(best, out / "mapper.bin")
    h = cfg.write(out, "train-mapper")
    write_training_log(log, out / "training_log.csv", h)
    sidecar = {"config_hash": h, **tc.as_dict(),
               "feature_dim": best.feature_dim, "hidden_dim": best.hidden_dim,
               "vocab_hash": best.vocab_hash}
    (out / "mapper.config.json").write_text(json.dumps(sidecar, indent=1, sort_keys=True),
                                            encoding="utf-8")
    print(f"trained mapper: best val loss {min(s.val_loss for s in log):.4f} "
          f"over {len(log)} epochs")
    return 0


def cmd_watermark(args) -> int:
    cfg = RunConfig(args, {**WM_DEFAULTS, "jobs": _default_jobs(), "lexicons": "bundled",
                           "input": args.input})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    params = _wm_params(cfg)
    mapper = _load_mapper(args.mapper, vocab) if args.mapper else None
    if params.scheme == "semantic" and mapper is None:
        raise UsageError("semantic scheme requires --mapper")
    lm = _load_lm(args.lm, vocab)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.input)
    if not texts:
        raise DataError("no input texts")
    syn_ids = synonym_id_map(vocab, lexicons)
    records = []
    for i, text in enumerate(texts):
        seq = tokenize(text, vocab)
        if len(seq) == 0:
            raise DataError(f"input text {i} is empty after tokenization")
        rng = rng_for(params.seed, stream_key("wm"), i)
        records.append(watermark_text(lm, mapper, seq, params, syn_ids, rng))
    save_records(records, out / "watermarked.jsonl")
    h = cfg.write(out, "watermark")
    rows = [(i, r.green_fraction(), sum(r.perturbed) / len(r.perturbed), len(r.output_ids))
            for i, r in enumerate(records)]
    write_csv(out / "watermark_summary.csv",
              ["index", "green_fraction", "perturbed_fraction", "n_tokens"], rows, h)
    mean_green = sum(r.green_fraction() for r in records) / len(records)
    print(f"watermarked {len(records)} texts, mean green fraction {mean_green:.3f}")
    return 0


def cmd_detect(args) -> int:
    cfg = RunConfig(args, {"scheme": "semantic", "conditioning": "global", "gamma": 0.5,
                           "key": 7, "seed": 0, "threshold": None, "input": args.input})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    scheme = cfg.get("scheme")
    mapper = _load_mapper(args.mapper, vocab) if args.mapper else None
    if scheme == "semantic" and mapper is None:
        raise UsageError("semantic scheme requires --mapper")
    texts = _read_input_texts(args.input)
    if not texts:
        raise DataError(f"no texts to score in {args.input}")
    threshold = cfg.get("threshold", float) if cfg.values.get("threshold") is not None else None
    rows = []
    for i, text in enumerate(texts):
        try:
            res = ev.detect(text, scheme, mapper=mapper, vocab=vocab,
                            key=cfg.get("key", int), gamma=cfg.get("gamma", float),
                            conditioning=cfg.get("conditioning"))
        except ValueError as exc:
            raise DataError(f"text {i}: {exc}") from exc
        row = [i, res.green_fraction, res.z_score, res.n_tokens]
        if threshold is not None:
            row.append(int(res.green_fraction > threshold))
        rows.append(tuple(row))
    h = cfg.write(out, "detect")
    header = ["index", "green_fraction", "z_score", "n_tokens"]
    if threshold is not None:
        header.append("decision")
    write_csv(out / "detections.csv", header, rows, h)
    mean_frac = sum(r[1] for r in rows) / len(rows)
    print(f"scored {len(rows)} texts, mean green fraction {mean_frac:.3f}")
    return 0


_ATTACK_KINDS = {"paraphrase": ds.KIND_PARAPHRASE, "sentiment": ds.KIND_SENTIMENT,
                 "sentiment_latter": ds.KIND_SENT_LATTER, "hate": ds.KIND_HATE}


def cmd_attack(args) -> int:
    cfg = RunConfig(args, {"replace_rate": 0.15, "max_edits": 8, "n_phrases": 1,
                           "seed": 0, "lexicons": "bundled", "kind": args.kind,
                           "input": args.input})
    out = ensure_dir(args.out)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.input)
    if not texts:
        raise DataError("no input texts")
    kind = _ATTACK_KINDS[args.kind]
    spec = ds.TransformSpec(kind, {"replace_rate": cfg.get("replace_rate", float),
                                   "max_edits": cfg.get("max_edits", int),
                                   "n_phrases": cfg.get("n_phrases", int)})
    seed = cfg.get("seed", int)
    records, skipped = [], 0
    for i, text in enumerate(texts):
        rng = rng_for(seed, stream_key("attack"), i)
        result = ds.apply_transform(text, spec, lexicons, rng)
        if result is None:
            skipped += 1
            records.append({"index": i, "text": None, "skipped": "transform rejected"})
        else:
            records.append({"index": i, "text": result})
    write_jsonl(out / "attacked.jsonl", records)
    h = cfg.write(out, "attack")
    write_csv(out / "attack_stats.csv", ["key", "value"],
              [("kind", kind), ("texts", len(texts)), ("skipped", skipped)], h)
    print(f"attacked {len(texts) - skipped} texts ({skipped} rejected)")
    return 0


def cmd_evaluate(args) -> int:
    cfg = RunConfig(args, {**WM_DEFAULTS, "replace_rate": 0.15, "max_edits": 8,
                           "jobs": _default_jobs(), "lexicons": "bundled",
                           "input": args.input})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    params = _wm_params(cfg)
    mapper = _load_mapper(args.mapper, vocab) if args.mapper else None
    if params.scheme == "semantic" and mapper is None:
        raise UsageError("semantic scheme requires --mapper")
    lm = _load_lm(args.lm, vocab)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.input)
    if not texts:
        raise DataError("no evaluation texts")
    report = ev.run_suite(texts, vocab, lm, mapper, lexicons, params,
                          seed=cfg.get("seed", int), jobs=cfg.get("jobs", int),
                          replace_rate=cfg.get("replace_rate", float),
                          max_edits=cfg.get("max_edits", int),
                          extra_config={"config_hash_seed": cfg.hash()})
    cfg.write(out, "evaluate")
    report.write_outputs(out)
    for line in report.summary_lines():
        print(line)
    return 0


def cmd_steal(args) -> int:
    cfg = RunConfig(args, {**WM_DEFAULTS, "n_targets": 10, "samples": 500,
                           "ks": "50,100,200", "jobs": _default_jobs(),
                           "lexicons": "bundled", "input": args.input})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    params = _wm_params(cfg)
    mapper = _load_mapper(args.mapper, vocab) if args.mapper else None
    if params.scheme == "semantic" and mapper is None:
        raise UsageError("semantic scheme requires --mapper")
    lm = _load_lm(args.lm, vocab)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.input)[: cfg.get("n_targets", int)]
    if not texts:
        raise DataError("no target texts")
    ks = tuple(int(k) for k in str(cfg.get("ks")).split(","))
    try:
        result = ev.stealing_attack(lm, mapper, vocab, texts, params, lexicons,
                                    n_samples=cfg.get("samples", int), ks=ks,
                                    seed=cfg.get("seed", int), jobs=cfg.get("jobs", int))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    h = cfg.write(out, "steal")
    rows = []
    for ti, rates in enumerate(result["per_target"]):
        for k in ks:
            rows.append((ti, k, rates[k]))
    for k in ks:
        rows.append(("mean", k, result["mean"][k]))
    write_csv(out / "stealing.csv", ["target", "k", "decryption_rate"], rows, h)
    summary = ", ".join(f"k={k}: {result['mean'][k]:.3f}" for k in ks)
    print(f"{params.scheme} mean decryption rates over {len(texts)} targets: {summary}")
    return 0


def cmd_sweep(args) -> int:
    cfg = RunConfig(args, {**WM_DEFAULTS, "deltas": "0,0.5,1,2,4", "replace_rate": 0.15,
                           "max_edits": 8, "jobs": _default_jobs(), "lexicons": "bundled",
                           "input": args.input})
    out = ensure_dir(args.out)
    vocab = _load_vocab(args.vocab)
    params = _wm_params(cfg)
    mapper = _load_mapper(args.mapper, vocab) if args.mapper else None
    if params.scheme == "semantic" and mapper is None:
        raise UsageError("semantic scheme requires --mapper")
    lm = _load_lm(args.lm, vocab)
    lexicons = _lexicons(cfg)
    texts = _read_input_texts(args.input)
    if not texts:
        raise DataError("no evaluation texts")
    deltas = [float(d) for d in str(cfg.get("deltas")).split(",")]
    rows = ev.delta_sweep(texts, vocab, lm, mapper, lexicons, params, deltas,
                          seed=cfg.get("seed", int), jobs=cfg.get("jobs", int),
                          replace_rate=cfg.get("replace_rate", float),
                          max_edits=cfg.get("max_edits", int), outdir=out)
    cfg.write(out, "sweep")
    for delta, auc, ppl in rows:
        print(f"delta={delta:g} overall_auc={auc:.2f} mean_ppl={ppl:.2f}")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest, "train-lm": cmd_train_lm, "make-dataset": cmd_make_dataset,
    "train-mapper": cmd_train_mapper, "watermark": cmd_watermark, "detect": cmd_detect,
    "attack": cmd_attack, "evaluate": cmd_evaluate, "steal": cmd_steal, "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
