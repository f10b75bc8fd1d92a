"""Mapping model: whole-text embedding whose sign pattern is the green/red split.

The encoder is a hashed bag of token unigrams and bigrams feeding a small
residual feed-forward network with a tanh output squash, so every output
coordinate lies in (-1, 1). A token is green exactly when its coordinate is
strictly positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .text import TokenSeq, Vocabulary
from .util import stable_bucket

PARAM_ORDER = ("W1", "b1", "W2", "b2", "W3", "b3", "W4", "b4")
FORMAT_NAME = "semamark-mapper"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Corrupt, truncated, or wrong-version model file."""


class VocabMismatchError(ValueError):
    """Model bound to a different vocabulary than the one supplied."""


def featurize(seq: TokenSeq | tuple, feature_dim: int = 4096) -> np.ndarray:
    """Hashed counts of token-id unigrams and bigrams, L2-normalized.

    Empty input produces the zero vector.
    """
    ids = seq.ids if isinstance(seq, TokenSeq) else tuple(seq)
    vec = np.zeros(feature_dim, dtype=np.float64)
    for i in ids:
        vec[stable_bucket(b"u:%d" % i, feature_dim)] += 1.0
    for a, b in zip(ids, ids[1:]):
        vec[stable_bucket(b"b:%d:%d" % (a, b), feature_dim)] += 1.0
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


@dataclass(frozen=True)
class GreenRedSplit:
    """Partition of the vocabulary; `mask[v]` is True for green tokens."""

    mask: np.ndarray

    @property
    def green(self) -> set[int]:
        return set(int(i) for i in np.flatnonzero(self.mask))

    @property
    def red(self) -> set[int]:
        return set(int(i) for i in np.flatnonzero(~self.mask))

    @property
    def green_size(self) -> int:
        return int(self.mask.sum())

    def is_green(self, token: int) -> bool:
        return bool(self.mask[token])


class MappingModel:
    """Parameters and forward pass of the text -> R^|V| mapping."""

    def __init__(self, feature_dim: int, hidden_dim: int, vocab_size: int,
                 vocab_hash: str, params: dict[str, np.ndarray], config: dict | None = None):
        self.feature_dim = feature_dim
        self.hidden_dim = hidden_dim
        self.vocab_size = vocab_size
        self.vocab_hash = vocab_hash
        self.params = params
        self.config = dict(config or {})

    def check_vocab(self, vocab: Vocabulary) -> None:
        if vocab.content_hash() != self.vocab_hash:
            raise VocabMismatchError(
                f"model expects vocabulary {self.vocab_hash}, got {vocab.content_hash()}")

    def copy(self) -> "MappingModel":
        return MappingModel(self.feature_dim, self.hidden_dim, self.vocab_size,
                            self.vocab_hash, {k: v.copy() for k, v in self.params.items()},
                            dict(self.config))

    def forward_batch(self, feats: np.ndarray, cache: bool = False):
        """Forward pass on rows of hashed features; optionally keep activations."""
        p = self.params
        z1 = feats @ p["W1"].T + p["b1"]
        h0 = np.tanh(z1)
        z2 = h0 @ p["W2"].T + p["b2"]
        u = np.tanh(z2)
        h1 = h0 + u @ p["W3"].T + p["b3"]
        out = np.tanh(h1 @ p["W4"].T + p["b4"])
        if cache:
            return out, {"feats": feats, "h0": h0, "u": u, "h1": h1, "out": out}
        return out

    def embed_features(self, feat_vec: np.ndarray) -> np.ndarray:
        return self.forward_batch(feat_vec[None, :])[0]


def init_model(vocab: Vocabulary, feature_dim: int = 4096, hidden_dim: int = 256,
               seed: int = 0, zero_bias: bool = True) -> MappingModel:
    """Random small-scale init; parameters snap to float32 values so a save
    and load round-trip is bit-exact."""
    rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0x6D61706D])
    v = vocab.size

    def lin(n_out, n_in):
        w = rng.normal(0.0, 1.0 / np.sqrt(n_in), size=(n_out, n_in))
        return w.astype(np.float32).astype(np.float64)

    params = {
        "W1": lin(hidden_dim, feature_dim),
        "b1": np.zeros(hidden_dim),
        "W2": lin(hidden_dim, hidden_dim),
        "b2": np.zeros(hidden_dim),
        "W3": lin(hidden_dim, hidden_dim),
        "b3": np.zeros(hidden_dim),
        "W4": lin(v, hidden_dim),
        "b4": np.zeros(v),
    }
    if not zero_bias:
        for name in ("b1", "b2", "b3", "b4"):
            params[name] = rng.normal(0.0, 0.01, size=params[name].shape
                                      ).astype(np.float32).astype(np.float64)
    return MappingModel(feature_dim, hidden_dim, v, vocab.content_hash(), params,
                        {"seed": seed})


def embed(model: MappingModel, seq: TokenSeq | tuple) -> np.ndarray:
    """Deterministic forward pass on one text."""
    return model.embed_features(featurize(seq, model.feature_dim))


def green_list(model: MappingModel, seq: TokenSeq | tuple) -> GreenRedSplit:
    """Strictly positive coordinates are green; zero goes to red."""
    return GreenRedSplit(embed(model, seq) > 0.0)


def save_model(model: MappingModel, path) -> None:
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "feature_dim": model.feature_dim,
        "hidden_dim": model.hidden_dim,
        "vocab_size": model.vocab_size,
        "vocab_hash": model.vocab_hash,
        "param_order": list(PARAM_ORDER),
        "config": model.config,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(meta, sort_keys=True).encode("utf-8") + b"\n")
        for name in PARAM_ORDER:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f4").tobytes())


def _param_shapes(feature_dim: int, hidden_dim: int, vocab_size: int) -> dict[str, tuple]:
    return {
        "W1": (hidden_dim, feature_dim), "b1": (hidden_dim,),
        "W2": (hidden_dim, hidden_dim), "b2": (hidden_dim,),
        "W3": (hidden_dim, hidden_dim), "b3": (hidden_dim,),
        "W4": (vocab_size, hidden_dim), "b4": (vocab_size,),
    }


def load_model(path, vocab: Vocabulary | None = None) -> MappingModel:
    with open(path, "rb") as fh:
        header = fh.readline()
        try:
            meta = json.loads(header.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ModelFormatError(f"unreadable model header in {path}") from exc
        if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format in {path}: {meta.get('format')}")
        shapes = _param_shapes(meta["feature_dim"], meta["hidden_dim"], meta["vocab_size"])
        blob = fh.read()
    expected = sum(int(np.prod(s)) for s in shapes.values()) * 4
    if len(blob) != expected:
        raise ModelFormatError(
            f"model file {path} has {len(blob)} parameter bytes, expected {expected}")
    params = {}
    offset = 0
    for name in meta["param_order"]:
        shape = shapes[name]
        n = int(np.prod(shape)) * 4
        arr = np.frombuffer(blob[offset:offset + n], dtype="<f4").astype(np.float64)
        params[name] = arr.reshape(shape)
        offset += n
    model = MappingModel(meta["feature_dim"], meta["hidden_dim"], meta["vocab_size"],
                         meta["vocab_hash"], params, meta.get("config"))
    if vocab is not None:
        model.check_vocab(vocab)
    return model


def quantize_params(model: MappingModel) -> MappingModel:
    """Snap parameters to the float32 grid used by the file format."""
    out = model.copy()
    for name in PARAM_ORDER:
        out.params[name] = out.params[name].astype(np.float32).astype(np.float64)
    return out
