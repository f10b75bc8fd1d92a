"""Contrastive training of the mapping model.

Objective: mean hinge triplet loss over (anchor, positive, negative) text
embeddings plus two squared balance penalties computed on the anchor
embeddings, one pushing each text's coordinate sum to zero and one pushing
each coordinate's batch sum to zero. Gradients are analytic and checked
against central finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .mapping import MappingModel, PARAM_ORDER, featurize, quantize_params
from .text import TokenSeq
from .util import write_csv

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """Loss became non-finite during optimization."""


class Triplet(NamedTuple):
    anchor: TokenSeq
    positive: TokenSeq
    negative: TokenSeq


@dataclass
class TrainConfig:
    margin: float = 0.3
    lambda_text: float = 1.0
    lambda_token: float = 1.0
    epochs: int = 15
    learning_rate: float = 3e-3
    batch_size: int = 64
    seed: int = 0
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    # Rate appropriate when fine-tuning a large pretrained encoder instead of
    # this package's small randomly initialized one; kept for provenance.
    reference_lr_pretrained: float = 3e-5

    def as_dict(self) -> dict:
        return {
            "margin": self.margin, "lambda_text": self.lambda_text,
            "lambda_token": self.lambda_token, "epochs": self.epochs,
            "learning_rate": self.learning_rate, "batch_size": self.batch_size,
            "seed": self.seed, "reference_lr_pretrained": self.reference_lr_pretrained,
        }


@dataclass
class EpochStats:
    epoch: int
    triplet_loss: float
    l_text: float
    l_token: float
    val_loss: float


def cosine_sim(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero-norm inputs are degenerate and score 0."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        logger.debug("degenerate cosine: zero-norm input")
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def triplet_loss(a: np.ndarray, p: np.ndarray, n: np.ndarray, alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("margin must be > 0")
    return max(0.0, cosine_sim(a, n) - cosine_sim(a, p) + alpha)


def balance_losses(outputs: np.ndarray) -> tuple[float, float]:
    """(per-text sum penalty, per-token batch-sum penalty) for a batch of
    embeddings shaped (batch, vocab)."""
    outputs = np.atleast_2d(outputs)
    if outputs.size == 0:
        raise ValueError("empty batch")
    batch, v_size = outputs.shape
    text_sums = outputs.sum(axis=1)
    l_text = float(np.mean(text_sums ** 2) / v_size)
    token_sums = outputs.sum(axis=0)
    l_token = float(np.mean(token_sums ** 2) / batch)
    return l_text, l_token


def _cos_and_grads(u: np.ndarray, v: np.ndarray):
    """Cosine similarity with gradients w.r.t. both arguments."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0, np.zeros_like(u), np.zeros_like(v)
    s = float(np.dot(u, v) / (nu * nv))
    du = v / (nu * nv) - s * u / (nu * nu)
    dv = u / (nu * nv) - s * v / (nv * nv)
    return s, du, dv


def _batch_forward_loss(model: MappingModel, feats: np.ndarray, config: TrainConfig,
                        want_grads: bool):
    """Loss (and gradients) for stacked [anchors; positives; negatives] rows."""
    n_trip = feats.shape[0] // 3
    out, cache = model.forward_batch(feats, cache=True)
    fa, fp, fn = out[:n_trip], out[n_trip:2 * n_trip], out[2 * n_trip:]

    d_out = np.zeros_like(out) if want_grads else None
    hinge_total = 0.0
    for i in range(n_trip):
        s_an, g_a_n, g_n = _cos_and_grads(fa[i], fn[i])
        s_ap, g_a_p, g_p = _cos_and_grads(fa[i], fp[i])
        margin_val = s_an - s_ap + config.margin
        if margin_val > 0.0:
            hinge_total += margin_val
            if want_grads:
                scale = 1.0 / n_trip
                d_out[i] += scale * (g_a_n - g_a_p)
                d_out[n_trip + i] += -scale * g_p
                d_out[2 * n_trip + i] += scale * g_n
    mean_hinge = hinge_total / n_trip

    l_text, l_token = balance_losses(fa)
    if want_grads:
        v_size = out.shape[1]
        text_sums = fa.sum(axis=1, keepdims=True)
        token_sums = fa.sum(axis=0, keepdims=True)
        d_out[:n_trip] += config.lambda_text * 2.0 * text_sums / (n_trip * v_size)
        d_out[:n_trip] += config.lambda_token * 2.0 * token_sums / (v_size * n_trip)

    total = mean_hinge + config.lambda_text * l_text + config.lambda_token * l_token
    parts = {"triplet": mean_hinge, "l_text": l_text, "l_token": l_token, "total": total}
    if not want_grads:
        return parts, None
    grads = _backward(model, cache, d_out)
    return parts, grads


def _backward(model: MappingModel, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    p = model.params
    feats, h0, u, h1, out = cache["feats"], cache["h0"], cache["u"], cache["h1"], cache["out"]
    dz4 = d_out * (1.0 - out ** 2)
    grads = {"W4": dz4.T @ h1, "b4": dz4.sum(axis=0)}
    dh1 = dz4 @ p["W4"]
    grads["b3"] = dh1.sum(axis=0)
    grads["W3"] = dh1.T @ u
    du = dh1 @ p["W3"]
    dz2 = du * (1.0 - u ** 2)
    grads["W2"] = dz2.T @ h0
    grads["b2"] = dz2.sum(axis=0)
    dh0 = dz2 @ p["W2"] + dh1
    dz1 = dh0 * (1.0 - h0 ** 2)
    grads["W1"] = dz1.T @ feats
    grads["b1"] = dz1.sum(axis=0)
    return grads


def _stack_features(batch: list[Triplet], feature_dim: int) -> np.ndarray:
    rows = ([featurize(t.anchor, feature_dim) for t in batch]
            + [featurize(t.positive, feature_dim) for t in batch]
            + [featurize(t.negative, feature_dim) for t in batch])
    return np.stack(rows)


def batch_loss(model: MappingModel, batch: list[Triplet], config: TrainConfig) -> dict:
    feats = _stack_features(batch, model.feature_dim)
    parts, _ = _batch_forward_loss(model, feats, config, want_grads=False)
    return parts


def grad(config: TrainConfig, batch: list[Triplet], model: MappingModel) -> dict[str, np.ndarray]:
    """Analytic gradient of the total objective for one batch."""
    if not batch:
        raise ValueError("empty batch")
    feats = _stack_features(batch, model.feature_dim)
    _, grads = _batch_forward_loss(model, feats, config, want_grads=True)
    return grads


def finite_diff_check(model: MappingModel, batch: list[Triplet], config: TrainConfig,
                      h: float = 1e-4) -> float:
    """Max relative disagreement between analytic and central-difference
    gradients, relative to the overall gradient scale. Intended for small
    models only."""
    feats = _stack_features(batch, model.feature_dim)
    _, grads = _batch_forward_loss(model, feats, config, want_grads=True)

    worst = 0.0
    scale = max(max(np.abs(g).max() for g in grads.values()), 1e-12)
    for name in PARAM_ORDER:
        param = model.params[name]
        g_an = grads[name]
        it = np.nditer(param, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + h
            plus, _ = _batch_forward_loss(model, feats, config, want_grads=False)
            param[idx] = orig - h
            minus, _ = _batch_forward_loss(model, feats, config, want_grads=False)
            param[idx] = orig
            g_fd = (plus["total"] - minus["total"]) / (2 * h)
            denom = max(scale, abs(g_fd))
            worst = max(worst, abs(g_an[idx] - g_fd) / denom)
            it.iternext()
    return worst


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float, betas, eps: float):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name in sorted(params):
            g = grads[name]
            self.m[name] = self.b1 * self.m[name] + (1 - self.b1) * g
            self.v[name] = self.b2 * self.v[name] + (1 - self.b2) * g * g
            m_hat = self.m[name] / (1 - self.b1 ** self.t)
            v_hat = self.v[name] / (1 - self.b2 ** self.t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _eval_loss(model: MappingModel, feats: np.ndarray, trip_idx: np.ndarray,
               config: TrainConfig, chunk: int = 256) -> dict:
    """Mean loss parts over a fixed triplet set, in chunks."""
    totals = {"triplet": 0.0, "l_text": 0.0, "l_token": 0.0, "total": 0.0}
    n = len(trip_idx)
    for start in range(0, n, chunk):
        rows = trip_idx[start:start + chunk]
        stacked = feats[np.concatenate([rows[:, 0], rows[:, 1], rows[:, 2]])]
        parts, _ = _batch_forward_loss(model, stacked, config, want_grads=False)
        w = len(rows) / n
        for key in totals:
            totals[key] += w * parts[key]
    return totals


def train(train_set: list[Triplet], val_set: list[Triplet], config: TrainConfig,
          model: MappingModel) -> tuple[MappingModel, list[EpochStats]]:
    """Mini-batch Adam over the triplet objective; returns the checkpoint with
    the lowest validation loss (parameters snapped to the file format's
    float32 grid) plus the per-epoch log."""
    if not train_set:
        raise ValueError("empty training set")
    if not val_set:
        raise ValueError("empty validation set")

    feats, train_idx = _featurize_sets(train_set, model.feature_dim)
    val_feats, val_idx = _featurize_sets(val_set, model.feature_dim)

    work = model.copy()
    opt = _Adam(work.params, config.learning_rate, config.adam_betas, config.adam_eps)
    rng = np.random.default_rng([int(config.seed) & 0xFFFFFFFF, 0x7472])

    best_val = np.inf
    best_params = None
    log: list[EpochStats] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_idx))
        sums = {"triplet": 0.0, "l_text": 0.0, "l_token": 0.0}
        n_seen = 0
        for start in range(0, len(order), config.batch_size):
            rows = train_idx[order[start:start + config.batch_size]]
            stacked = feats[np.concatenate([rows[:, 0], rows[:, 1], rows[:, 2]])]
            parts, grads = _batch_forward_loss(work, stacked, config, want_grads=True)
            if not np.isfinite(parts["total"]):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch offset {start}: {parts}")
            opt.step(work.params, grads)
            w = len(rows)
            n_seen += w
            for key in sums:
                sums[key] += w * parts[key]
        val_parts = _eval_loss(work, val_feats, val_idx, config)
        stats = EpochStats(epoch, sums["triplet"] / n_seen, sums["l_text"] / n_seen,
                           sums["l_token"] / n_seen, val_parts["total"])
        log.append(stats)
        logger.info("epoch %d: triplet=%.4f l_text=%.4f l_token=%.4f val=%.4f",
                    epoch, stats.triplet_loss, stats.l_text, stats.l_token, stats.val_loss)
        if stats.val_loss < best_val:
            best_val = stats.val_loss
            best_params = {k: v.copy() for k, v in work.params.items()}

    best = work.copy()
    if best_params is not None:
        best.params = best_params
    best.config.update(config.as_dict())
    return quantize_params(best), log


def _index_triplets(triplets: list[Triplet]):
    """Unique texts (by token ids) and per-triplet row indices."""
    row_of: dict[tuple, int] = {}
    texts: list[TokenSeq] = []

    def row(seq: TokenSeq) -> int:
        key = seq.ids
        if key not in row_of:
            row_of[key] = len(texts)
            texts.append(seq)
        return row_of[key]

    idx = np.array([[row(t.anchor), row(t.positive), row(t.negative)] for t in triplets],
                   dtype=np.int64)
    return texts, idx


def _featurize_sets(triplets: list[Triplet], feature_dim: int):
    texts, idx = _index_triplets(triplets)
    feats = np.stack([featurize(t, feature_dim) for t in texts])
    return feats, idx


def write_training_log(log: list[EpochStats], path, cfg_hash: str | None = None) -> None:
    rows = [(s.epoch, s.triplet_loss, s.l_text, s.l_token, s.val_loss) for s in log]
    write_csv(path, ["epoch", "triplet_loss", "L_text", "L_token", "val_loss"], rows, cfg_hash)
