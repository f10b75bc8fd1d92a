"""Green-list logit watermarking via constrained regeneration.

The target text is resampled token by token: the language model's logits get
a fidelity bonus on the original token and its synonyms, and when the mixed
distribution's entropy clears the gate, green-list logits are scaled up
before nucleus sampling. The split source depends on the scheme: the mapping
model over the whole target (or the generated prefix, in the ablation mode),
a previous-token hash, or a fixed keyed split.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import Lexicons
from .lm import NGramLM, sample, softmax_entropy
from .mapping import GreenRedSplit, MappingModel, green_list
from .text import TokenSeq, Vocabulary, detokenize
from .util import rng_for

SCHEMES = ("semantic", "kgw", "unigram")
CONDITIONINGS = ("global", "prefix")


@dataclass
class WatermarkParams:
    delta: float = 0.13
    entropy_threshold: float = 2.0
    temperature: float = 0.7
    top_p: float = 0.9
    conditioning: str = "global"
    scheme: str = "semantic"
    fidelity_weight: float = 4.0
    additive: bool = False
    gamma: float = 0.5
    key: int = 7
    seed: int = 0

    def validate(self) -> None:
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.conditioning not in CONDITIONINGS:
            raise ValueError(f"unknown conditioning {self.conditioning!r}")
        if not (0 < self.gamma < 1):
            raise ValueError("gamma must be in (0, 1)")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class WatermarkedRecord:
    original: str
    output: str
    scheme: str
    params: dict
    seed: int
    output_ids: tuple[int, ...]
    perturbed: tuple[bool, ...]
    green: tuple[bool, ...]

    def green_fraction(self) -> float:
        return sum(self.green) / len(self.green)

    def as_dict(self) -> dict:
        return {
            "original": self.original, "output": self.output, "scheme": self.scheme,
            "params": self.params, "seed": self.seed,
            "output_ids": list(self.output_ids),
            "flags_rle": _rle_encode(list(zip(self.perturbed, self.green))),
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "WatermarkedRecord":
        flags = _rle_decode(rec["flags_rle"])
        perturbed = tuple(p for p, _ in flags)
        green = tuple(g for _, g in flags)
        return cls(rec["original"], rec["output"], rec["scheme"], rec["params"],
                   rec["seed"], tuple(rec["output_ids"]), perturbed, green)


def _rle_encode(flags: list[tuple[bool, bool]]) -> list[list[int]]:
    runs: list[list[int]] = []
    for pert, green in flags:
        trip = [1, int(pert), int(green)]
        if runs and runs[-1][1] == trip[1] and runs[-1][2] == trip[2]:
            runs[-1][0] += 1
        else:
            runs.append(trip)
    return runs


def _rle_decode(runs: list[list[int]]) -> list[tuple[bool, bool]]:
    flags: list[tuple[bool, bool]] = []
    for count, pert, green in runs:
        flags.extend([(bool(pert), bool(green))] * count)
    return flags


def perturb_logits(logits: np.ndarray, split: GreenRedSplit | np.ndarray, delta: float,
                   additive: bool = False) -> np.ndarray:
    """Scale green logits by (1 + delta); red coordinates are untouched.

    additive=True switches to `logit + delta` on green coordinates, the
    fallback for models with signed logits.
    """
    mask = split.mask if isinstance(split, GreenRedSplit) else np.asarray(split, dtype=bool)
    out = np.array(logits, dtype=np.float64, copy=True)
    if additive:
        out[mask] += delta
    else:
        out[mask] *= (1.0 + delta)
    return out


def kgw_split(vocab_size: int, prev_token: int, key: int, gamma: float = 0.5) -> GreenRedSplit:
    """Keyed pseudo-random split seeded by the previous token."""
    rng = rng_for(key, 0x6B6777, prev_token)
    perm = rng.permutation(vocab_size)
    mask = np.zeros(vocab_size, dtype=bool)
    mask[perm[: int(gamma * vocab_size)]] = True
    return GreenRedSplit(mask)


def unigram_split(vocab_size: int, key: int, gamma: float = 0.5) -> GreenRedSplit:
    """Keyed split that is constant across positions."""
    rng = rng_for(key, 0x756E69)
    perm = rng.permutation(vocab_size)
    mask = np.zeros(vocab_size, dtype=bool)
    mask[perm[: int(gamma * vocab_size)]] = True
    return GreenRedSplit(mask)


def semantic_split_for(params: WatermarkParams, mapper: MappingModel,
                       target: TokenSeq | None, prefix_ids) -> GreenRedSplit:
    """Global conditioning uses the whole target text; prefix conditioning
    recomputes from the generated prefix (the empty prefix maps to the
    encoder's fixed zero-input split)."""
    if params.conditioning == "global":
        if target is None:
            raise ValueError("global conditioning requires a target text")
        return green_list(mapper, target)
    return green_list(mapper, tuple(prefix_ids))


def synonym_id_map(vocab: Vocabulary, lexicons: Lexicons) -> dict[int, tuple[int, ...]]:
    """Token id -> in-vocabulary synonym ids, for the fidelity candidate set."""
    out: dict[int, tuple[int, ...]] = {}
    for word, syns in lexicons.synonyms.items():
        if word not in vocab:
            continue
        ids = tuple(vocab.id_of[s] for s in syns if s in vocab)
        if ids:
            out[vocab.id_of[word]] = ids
    return out


class _SplitSource:
    """Per-position split lookup for one generation run."""

    def __init__(self, params: WatermarkParams, mapper: MappingModel | None,
                 target: TokenSeq | None, vocab_size: int):
        self.params = params
        self.mapper = mapper
        self.target = target
        self.vocab_size = vocab_size
        self._global_split: GreenRedSplit | None = None
        if params.scheme == "semantic":
            if mapper is None:
                raise ValueError("semantic scheme requires a mapping model")
            if params.conditioning == "global":
                self._global_split = semantic_split_for(params, mapper, target, ())
        elif params.scheme == "unigram":
            self._global_split = unigram_split(vocab_size, params.key, params.gamma)
        self._kgw_cache: dict[int, GreenRedSplit] = {}

    def at(self, prefix_ids: list[int]) -> GreenRedSplit:
        if self._global_split is not None:
            return self._global_split
        if self.params.scheme == "kgw":
            prev = prefix_ids[-1] if prefix_ids else Vocabulary.unk_id
            if prev not in self._kgw_cache:
                self._kgw_cache[prev] = kgw_split(self.vocab_size, prev,
                                                  self.params.key, self.params.gamma)
            return self._kgw_cache[prev]
        return semantic_split_for(self.params, self.mapper, self.target, prefix_ids)


def watermark_text(lm: NGramLM, mapper: MappingModel | None, x: TokenSeq,
                   params: WatermarkParams,
                   synonym_ids: dict[int, tuple[int, ...]] | None = None,
                   rng: np.random.Generator | None = None) -> WatermarkedRecord:
    """Constrained regeneration of x with green-list perturbation.

    At position t the candidate set is the original token plus its synonyms;
    mixed logits get `fidelity_weight` added on candidates, the entropy gate
    decides whether to perturb, and nucleus sampling picks the output token.
    The output has exactly len(x) tokens.
    """
    params.validate()
    if len(x) == 0:
        raise ValueError("empty input")
    if rng is None:
        rng = rng_for(params.seed, 0x776D)
    synonym_ids = synonym_ids or {}
    source = _SplitSource(params, mapper, x, lm.vocab.size)

    y_ids: list[int] = []
    perturbed_flags: list[bool] = []
    green_flags: list[bool] = []
    k = lm.smoothing_k
    log_k = math.log(k)
    for t in range(len(x)):
        split = source.at(y_ids)
        logits = np.full(lm.vocab.size, log_k, dtype=np.float64)
        for token, c in lm.counts_for(y_ids).items():
            logits[token] = math.log(c + k)
        candidates = (x.ids[t],) + synonym_ids.get(x.ids[t], ())
        mixed = logits
        mixed[list(candidates)] += params.fidelity_weight
        gate_open = softmax_entropy(mixed) >= params.entropy_threshold
        if gate_open:
            final = perturb_logits(mixed, split, params.delta, params.additive)
        else:
            final = mixed
        y_t = sample(final, params.temperature, params.top_p, rng)
        y_ids.append(y_t)
        perturbed_flags.append(gate_open)
        green_flags.append(split.is_green(y_t))

    return WatermarkedRecord(
        original=x.source_text, output=detokenize(y_ids, lm.vocab),
        scheme=params.scheme, params=params.as_dict(), seed=params.seed,
        output_ids=tuple(y_ids), perturbed=tuple(perturbed_flags),
        green=tuple(green_flags),
    )


def generate_free(lm: NGramLM, prompt_ids, length: int, temperature: float,
                  top_p: float, rng: np.random.Generator) -> list[int]:
    """Plain nucleus sampling continuation without any watermark."""
    from .lm import next_dist

    ids = list(prompt_ids)
    out: list[int] = []
    for _ in range(length):
        dist = next_dist(lm, ids)
        token = sample(dist, temperature, top_p, rng)
        ids.append(token)
        out.append(token)
    return out


def generate_then_watermark(lm: NGramLM, mapper: MappingModel | None, prompt_ids,
                            length: int, params: WatermarkParams,
                            synonym_ids: dict[int, tuple[int, ...]] | None = None
                            ) -> WatermarkedRecord:
    """Stage 1 samples an unwatermarked continuation; stage 2 treats it as the
    target text and watermarks it."""
    if length < 1:
        raise ValueError("length must be >= 1")
    rng_gen = rng_for(params.seed, 0x67656E)
    stage1 = generate_free(lm, prompt_ids, length, params.temperature, params.top_p, rng_gen)
    target = TokenSeq(tuple(stage1), detokenize(stage1, lm.vocab))
    rng_wm = rng_for(params.seed, 0x766D32)
    return watermark_text(lm, mapper, target, params, synonym_ids, rng_wm)


def save_records(records: list[WatermarkedRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.as_dict(), sort_keys=True) + "\n")


def load_records(path) -> list[WatermarkedRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(WatermarkedRecord.from_dict(json.loads(line)))
    return records
