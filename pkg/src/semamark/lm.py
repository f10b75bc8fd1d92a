"""Count-based n-gram language model: logits, entropy, and nucleus sampling.

Logits are log(count + k) over the table matching the available context
length, so with k >= 1 every logit is non-negative and a multiplicative
green-list perturbation can only raise a token's relative weight. Sequence
log-probabilities (used for perplexity) interpolate across shorter context
tables with a fixed per-level weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .text import Corpus, CorpusError, TokenSeq, Vocabulary

BACKOFF_LAMBDA = 0.4


@dataclass
class NextTokenDist:
    logits: np.ndarray
    probs: np.ndarray
    entropy_nats: float


class NGramLM:
    def __init__(self, order: int, smoothing_k: float, vocab: Vocabulary,
                 tables: list[dict], totals: list[dict], vocab_hash: str):
        self.order = order
        self.smoothing_k = smoothing_k
        self.vocab = vocab
        # tables[m]: context tuple of length m -> {token id: count}
        self.tables = tables
        self.totals = totals
        self.vocab_hash = vocab_hash

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NGramLM)
            and self.order == other.order
            and self.smoothing_k == other.smoothing_k
            and self.vocab_hash == other.vocab_hash
            and self.tables == other.tables
        )

    def counts_for(self, context) -> dict:
        """Count table row for the longest seen context suffix.

        When the full-length context was never observed, back off to shorter
        suffixes; an entirely unseen context yields the empty row.
        """
        ids = _ids(context)
        m = min(len(ids), self.order - 1)
        for level in range(m, -1, -1):
            ctx = tuple(ids[len(ids) - level:]) if level else ()
            row = self.tables[level].get(ctx)
            if row:
                return row
        return {}

    def interp_prob(self, context, token: int) -> float:
        """Smoothed probability interpolated across context lengths."""
        ids = _ids(context)
        m = min(len(ids), self.order - 1)
        k, v_size = self.smoothing_k, self.vocab.size
        prob = 0.0
        weight = 1.0
        for level in range(m, -1, -1):
            ctx = tuple(ids[len(ids) - level:]) if level else ()
            row = self.tables[level].get(ctx)
            total = self.totals[level].get(ctx, 0)
            count = row.get(token, 0) if row else 0
            p_level = (count + k) / (total + k * v_size)
            share = weight if level == 0 else weight * (1.0 - BACKOFF_LAMBDA)
            prob += share * p_level
            weight *= BACKOFF_LAMBDA
        return prob

    def sequence_logprob(self, seq) -> float:
        ids = _ids(seq)
        if not ids:
            raise ValueError("empty sequence")
        total = 0.0
        for t, token in enumerate(ids):
            total += math.log(self.interp_prob(ids[:t], token))
        return total


def _ids(context) -> list[int]:
    if isinstance(context, TokenSeq):
        return list(context.ids)
    return list(context)


def train_lm(corpus: Corpus, order: int = 3, smoothing_k: float = 1.0) -> NGramLM:
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be > 0")
    if not corpus.documents:
        raise CorpusError("empty corpus")
    tables: list[dict] = [dict() for _ in range(order)]
    totals: list[dict] = [dict() for _ in range(order)]
    for doc in corpus.documents:
        ids = doc.ids
        for t, token in enumerate(ids):
            for m in range(min(t, order - 1) + 1):
                ctx = tuple(ids[t - m:t])
                row = tables[m].setdefault(ctx, {})
                row[token] = row.get(token, 0) + 1
                totals[m][ctx] = totals[m].get(ctx, 0) + 1
    return NGramLM(order, smoothing_k, corpus.vocab, tables, totals,
                   corpus.vocab.content_hash())


def next_dist(lm: NGramLM, context) -> NextTokenDist:
    """Logits and smoothed next-token distribution for a context.

    An entirely unseen context yields flat logits, hence uniform probs and
    entropy ln |V|.
    """
    v_size = lm.vocab.size
    counts = np.zeros(v_size, dtype=np.float64)
    for token, c in lm.counts_for(context).items():
        counts[token] = c
    logits = np.log(counts + lm.smoothing_k)
    total = counts.sum() + lm.smoothing_k * v_size
    probs = (counts + lm.smoothing_k) / total
    entropy = float(-np.sum(probs * np.log(probs)))
    return NextTokenDist(logits, probs, entropy)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_entropy(logits: np.ndarray) -> float:
    p = softmax(logits)
    # p > 0 always after softmax of finite logits
    return float(-np.sum(p * np.log(p)))


def sample(dist, temperature: float = 0.7, top_p: float = 0.9,
           rng: np.random.Generator | None = None) -> int:
    """Nucleus sampling: temperature on logits, then smallest prefix of
    probability-sorted tokens with cumulative mass >= top_p, renormalized."""
    if temperature <= 0:
        raise ValueError("temperature must be > 0")
    if not (0 < top_p <= 1):
        raise ValueError("top_p must be in (0, 1]")
    if rng is None:
        rng = np.random.default_rng()
    logits = dist.logits if isinstance(dist, NextTokenDist) else np.asarray(dist, dtype=np.float64)
    probs = softmax(logits / temperature)
    order = np.argsort(-probs, kind="stable")
    csum = np.cumsum(probs[order])
    cut = int(np.searchsorted(csum, top_p - 1e-12))
    cut = min(cut, len(order) - 1)
    nucleus = order[: cut + 1]
    weights = probs[nucleus]
    weights = weights / weights.sum()
    return int(rng.choice(nucleus, p=weights))


def save_lm(lm: NGramLM, path) -> None:
    """Line-based table dump: header `ngram v1`, then one count per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"ngram v1 {lm.order} {lm.smoothing_k!r} {lm.vocab_hash}\n")
        for m, table in enumerate(lm.tables):
            for ctx in sorted(table):
                row = table[ctx]
                ctx_str = " ".join(str(i) for i in ctx)
                for token in sorted(row):
                    fh.write(f"{m}\t{ctx_str}\t{token}\t{row[token]}\n")


def load_lm(path, vocab: Vocabulary) -> NGramLM:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[0] != "ngram" or header[1] != "v1":
            raise CorpusError(f"bad model header in {path}")
        order = int(header[2])
        smoothing_k = float(header[3])
        vocab_hash = header[4]
        if vocab_hash != vocab.content_hash():
            raise CorpusError("model was trained against a different vocabulary")
        tables: list[dict] = [dict() for _ in range(order)]
        totals: list[dict] = [dict() for _ in range(order)]
        for line in fh:
            m_str, ctx_str, token_str, count_str = line.rstrip("\n").split("\t")
            m = int(m_str)
            ctx = tuple(int(x) for x in ctx_str.split()) if ctx_str else ()
            row = tables[m].setdefault(ctx, {})
            row[int(token_str)] = int(count_str)
            totals[m][ctx] = totals[m].get(ctx, 0) + int(count_str)
    return NGramLM(order, smoothing_k, vocab, tables, totals, vocab_hash)
