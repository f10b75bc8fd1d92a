"""Triplet dataset construction via local lexicon/template transforms.

One permissible transform (synonym paraphrase) produces positives; three
impermissible transforms (whole-text sentiment reversal, latter-half
sentiment reversal, hate-phrase insertion) produce negatives. Optional
LLM-backed variants of the text transforms run through the chat client.
Records failing verification or the 1.5 length-ratio bound are dropped.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .text import TokenSeq, Vocabulary, tokenize, word_count
from .util import read_jsonl, rng_for, write_jsonl

logger = logging.getLogger(__name__)

KIND_PARAPHRASE = "paraphrase"
KIND_SENTIMENT = "sentiment_reversal"
KIND_SENT_LATTER = "latter_half_reversal"
KIND_HATE = "hate_insertion"
ALL_KINDS = (KIND_PARAPHRASE, KIND_SENTIMENT, KIND_SENT_LATTER, KIND_HATE)
NEGATIVE_KINDS = (KIND_SENTIMENT, KIND_SENT_LATTER, KIND_HATE)

MAX_LENGTH_RATIO = 1.5
GROUP_PLACEHOLDER = "[GROUP]"

_WORD_PARTS = re.compile(r"^([^\w']*)([\w']*)([^\w']*)$")
_SENTENCE_END = re.compile(r"[.!?]+$")


@dataclass(frozen=True)
class TransformSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")

    @property
    def permissible(self) -> bool:
        return self.kind == KIND_PARAPHRASE


@dataclass
class TripletRecord:
    anchor: str
    positive: str
    negative: str
    pos_kind: str
    neg_kind: str
    verification: str
    length_ratio: float

    def as_dict(self) -> dict:
        return {
            "anchor": self.anchor, "positive": self.positive, "negative": self.negative,
            "pos_kind": self.pos_kind, "neg_kind": self.neg_kind,
            "verification": self.verification, "length_ratio": self.length_ratio,
        }


@dataclass
class Lexicons:
    synonyms: dict[str, tuple[str, ...]]
    polarity: dict[str, str]
    antonyms: dict[str, str]
    hate_templates: tuple[str, ...]
    groups: tuple[str, ...]

    def validate(self) -> None:
        for word, anto in self.antonyms.items():
            if self.antonyms.get(anto) != word:
                raise ValueError(f"antonym pair not symmetric: {word!r} / {anto!r}")
            if word not in self.polarity or anto not in self.polarity:
                raise ValueError(f"antonym words missing polarity: {word!r} / {anto!r}")
        for tpl in self.hate_templates:
            if tpl.count(GROUP_PLACEHOLDER) != 1:
                raise ValueError(f"template must contain exactly one placeholder: {tpl!r}")
        if not self.groups:
            raise ValueError("empty group list")


def load_lexicons(directory) -> Lexicons:
    """Load the tab-separated lexicon files from a directory."""
    directory = Path(directory)
    synonyms: dict[str, tuple[str, ...]] = {}
    for line in _lines(directory / "synonyms.tsv"):
        parts = line.split("\t")
        synonyms[parts[0]] = tuple(parts[1:])
    polarity: dict[str, str] = {}
    antonyms: dict[str, str] = {}
    for line in _lines(directory / "polarity.tsv"):
        word, pol, anto = line.split("\t")
        polarity[word] = pol
        antonyms[word] = anto
    templates = tuple(_lines(directory / "hate_templates.txt"))
    groups = tuple(_lines(directory / "groups.txt"))
    lex = Lexicons(synonyms, polarity, antonyms, templates, groups)
    lex.validate()
    return lex


def _lines(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def asset_path(name: str) -> Path:
    return Path(resources.files("semamark") / "assets" / name)


def default_lexicons() -> Lexicons:
    return load_lexicons(asset_path(""))


def bundled_corpus_path() -> Path:
    return asset_path("mini_corpus.jsonl")


def _split_word(word: str) -> tuple[str, str, str]:
    m = _WORD_PARTS.match(word)
    if not m:
        return "", word, ""
    return m.group(1), m.group(2), m.group(3)


def _recase(replacement: str, original_core: str) -> str:
    if original_core[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def length_ratio(original: str, modified: str) -> float:
    a, b = word_count(original), word_count(modified)
    if a == 0 or b == 0:
        return math.inf
    return max(a, b) / min(a, b)


def paraphrase_local(text: str, lexicons: Lexicons, replace_rate: float,
                     rng: np.random.Generator) -> str:
    """Independently swap eligible words for sampled synonyms; word count is
    preserved."""
    words = text.split()
    out = []
    for word in words:
        prefix, core, suffix = _split_word(word)
        options = lexicons.synonyms.get(core.lower())
        if options and rng.random() < replace_rate:
            pick = options[int(rng.integers(len(options)))]
            out.append(prefix + _recase(pick, core) + suffix)
        else:
            out.append(word)
    return " ".join(out)


def classify_sentiment_local(text: str, lexicons: Lexicons) -> str:
    """Sign of (positive word count - negative word count); zero is neutral."""
    score = 0
    for word in text.split():
        _, core, _ = _split_word(word)
        pol = lexicons.polarity.get(core.lower())
        if pol == "positive":
            score += 1
        elif pol == "negative":
            score -= 1
    if score > 0:
        return "positive"
    if score < 0:
        return "negative"
    return "neutral"


def _flip(sentiment: str) -> str:
    return "negative" if sentiment == "positive" else "positive"


def sentiment_flip(text: str, lexicons: Lexicons, max_edits: int,
                   rng: np.random.Generator, region: str = "whole") -> str | None:
    """Swap up to max_edits opposing polarity words for their antonyms inside
    the allowed region, then verify the flip; returns None on rejection.

    region="latter_half" restricts edits to word positions strictly past the
    midpoint ceil(L/2).
    """
    if region not in ("whole", "latter_half"):
        raise ValueError(f"unknown region {region!r}")
    words = text.split()
    if len(words) < 2:
        return None
    original = classify_sentiment_local(text, lexicons)
    if original == "neutral":
        target = ("positive", "negative")[int(rng.integers(2))]
    else:
        target = _flip(original)
    start = math.ceil(len(words) / 2) if region == "latter_half" else 0
    opposing = _flip(target)
    eligible = []
    for i in range(start, len(words)):
        _, core, _ = _split_word(words[i])
        if lexicons.polarity.get(core.lower()) == opposing:
            eligible.append(i)
    if not eligible:
        return None
    picks = rng.permutation(len(eligible))[:max_edits]
    for j in picks:
        i = eligible[int(j)]
        prefix, core, suffix = _split_word(words[i])
        anto = lexicons.antonyms[core.lower()]
        words[i] = prefix + _recase(anto, core) + suffix
    modified = " ".join(words)
    if classify_sentiment_local(modified, lexicons) != target:
        return None
    return modified


def _sentences(text: str) -> list[str]:
    """Chunks ending at terminal punctuation; a trailing fragment is kept."""
    words = text.split()
    chunks: list[list[str]] = []
    current: list[str] = []
    for word in words:
        current.append(word)
        if _SENTENCE_END.search(word):
            chunks.append(current)
            current = []
    if current:
        chunks.append(current)
    return [" ".join(c) for c in chunks]


def instantiate_template(template: str, group: str) -> str:
    phrase = template.replace(GROUP_PLACEHOLDER, group)
    return phrase[:1].upper() + phrase[1:]


def insert_hate(text: str, lexicons: Lexicons, n_phrases: int,
                rng: np.random.Generator) -> str:
    """Insert instantiated hate templates as whole sentences at sentence
    boundaries (after some sentence, or at the very end)."""
    if n_phrases == 0:
        return text
    sentences = _sentences(text)
    phrases = []
    for _ in range(n_phrases):
        tpl = lexicons.hate_templates[int(rng.integers(len(lexicons.hate_templates)))]
        group = lexicons.groups[int(rng.integers(len(lexicons.groups)))]
        phrases.append(instantiate_template(tpl, group))
    # positions index the gap after sentence i; len(sentences) is end of text
    positions = sorted(int(rng.integers(1, len(sentences) + 1)) for _ in phrases)
    out: list[str] = []
    for i, sent in enumerate(sentences, start=1):
        out.append(sent)
        for pos, phrase in zip(positions, phrases):
            if pos == i:
                out.append(phrase)
    return " ".join(out)


def hate_phrases_in(text: str, lexicons: Lexicons) -> list[str]:
    """Exact phrase-presence check over every template/group instantiation."""
    found = []
    for tpl in lexicons.hate_templates:
        for group in lexicons.groups:
            phrase = instantiate_template(tpl, group)
            if phrase in text:
                found.append(phrase)
    return found


def apply_transform(text: str, spec: TransformSpec, lexicons: Lexicons,
                    rng: np.random.Generator) -> str | None:
    """Run one local transform; None signals a verification rejection."""
    params = spec.params
    if spec.kind == KIND_PARAPHRASE:
        return paraphrase_local(text, lexicons, params.get("replace_rate", 0.3), rng)
    if spec.kind == KIND_SENTIMENT:
        return sentiment_flip(text, lexicons, params.get("max_edits", 8), rng, "whole")
    if spec.kind == KIND_SENT_LATTER:
        return sentiment_flip(text, lexicons, params.get("max_edits", 8), rng, "latter_half")
    if spec.kind == KIND_HATE:
        out = insert_hate(text, lexicons, params.get("n_phrases", 1), rng)
        if not hate_phrases_in(out, lexicons):
            return None
        return out
    raise ValueError(f"unknown transform kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# LLM-backed transforms

PARAPHRASE_SYSTEM_PROMPT = (
    "Rewrite the text the user provides so that it keeps the same meaning, tone, "
    "and approximate length. Swap wording where natural, do not add or drop "
    "information, and reply with the rewritten text only, with no introduction "
    "or commentary."
)

SENTIMENT_SYSTEM_PROMPT = (
    "Edit the user's text so that its overall sentiment becomes {target}. Change "
    "as few words as possible (at most {max_edits}), keep the topic and sentence "
    "structure intact, and make the new sentiment unmistakable.{region_note} "
    "Reply strictly in this format:\n"
    "[MODIFIED_SENTIMENT] <sentiment> [/MODIFIED_SENTIMENT]\n"
    "[MODIFICATION_PLAN] <plan> [/MODIFICATION_PLAN]\n"
    "[MODIFIED_TEXT] <text> [/MODIFIED_TEXT]"
)

LATTER_HALF_NOTE = " Only edit the second half of the text; leave the first half unchanged."

_MODIFIED_TEXT_RE = re.compile(r"\[MODIFIED_TEXT\](.*?)\[/MODIFIED_TEXT\]", re.DOTALL)


def llm_transform(client, spec: TransformSpec, text: str,
                  lexicons: Lexicons | None = None) -> str | None:
    """LLM-backed paraphrase or sentiment transform with the same verification
    and length filter as the local versions. Hate insertion stays local."""
    if spec.kind == KIND_HATE:
        raise ValueError("hate insertion is a local transform; use insert_hate")
    if spec.kind == KIND_PARAPHRASE:
        reply = client.chat(PARAPHRASE_SYSTEM_PROMPT, text)
        candidate = reply.strip()
    else:
        lexicons = lexicons or default_lexicons()
        rng = rng_for(spec.params.get("seed", 0))
        original = classify_sentiment_local(text, lexicons)
        if original == "neutral":
            target = ("positive", "negative")[int(rng.integers(2))]
        else:
            target = _flip(original)
        note = LATTER_HALF_NOTE if spec.kind == KIND_SENT_LATTER else ""
        prompt = SENTIMENT_SYSTEM_PROMPT.format(
            target=target, max_edits=spec.params.get("max_edits", 8), region_note=note)
        reply = client.chat(prompt, text)
        m = _MODIFIED_TEXT_RE.search(reply)
        if not m:
            logger.warning("transform response missing [MODIFIED_TEXT]; raw: %r", reply)
            return None
        candidate = m.group(1).strip()
        if lexicons and classify_sentiment_local(candidate, lexicons) != target:
            return None
    if not candidate or length_ratio(text, candidate) > MAX_LENGTH_RATIO:
        return None
    return candidate


# ---------------------------------------------------------------------------
# Triplet assembly

@dataclass
class BuildStats:
    anchors: int = 0
    accepted: dict = field(default_factory=dict)
    rejected: dict = field(default_factory=dict)
    filtered_ratio: int = 0
    records: int = 0

    def as_dict(self) -> dict:
        flat = {"anchors": self.anchors, "records": self.records,
                "filtered_ratio": self.filtered_ratio}
        for kind, n in sorted(self.accepted.items()):
            flat[f"accepted_{kind}"] = n
        for kind, n in sorted(self.rejected.items()):
            flat[f"rejected_{kind}"] = n
        return flat


def build_triplets(anchor_texts: list[str], lexicons: Lexicons, n_positives: int = 4,
                   neg_kinds: tuple[str, ...] = NEGATIVE_KINDS, replace_rate: float = 0.3,
                   max_edits: int = 8, seed: int = 0,
                   max_ratio: float = MAX_LENGTH_RATIO) -> tuple[list[TripletRecord], BuildStats]:
    """Per anchor: n_positives paraphrases and one negative per impermissible
    kind; every surviving cross combination becomes a record."""
    records: list[TripletRecord] = []
    stats = BuildStats(anchors=len(anchor_texts))
    for kind in ALL_KINDS:
        stats.accepted.setdefault(kind, 0)
        stats.rejected.setdefault(kind, 0)
    for i, anchor in enumerate(anchor_texts):
        rng = rng_for(seed, i)
        positives = []
        for _ in range(n_positives):
            cand = paraphrase_local(anchor, lexicons, replace_rate, rng)
            if length_ratio(anchor, cand) > max_ratio:
                stats.filtered_ratio += 1
                continue
            positives.append(cand)
            stats.accepted[KIND_PARAPHRASE] += 1
        negatives = []
        for kind in neg_kinds:
            spec = TransformSpec(kind, {"replace_rate": replace_rate, "max_edits": max_edits})
            cand = apply_transform(anchor, spec, lexicons, rng)
            if cand is None:
                stats.rejected[kind] += 1
                continue
            if length_ratio(anchor, cand) > max_ratio:
                stats.filtered_ratio += 1
                continue
            negatives.append((cand, kind))
            stats.accepted[kind] += 1
        for pos in positives:
            for neg, kind in negatives:
                records.append(TripletRecord(
                    anchor=anchor, positive=pos, negative=neg,
                    pos_kind=KIND_PARAPHRASE, neg_kind=kind,
                    verification="lexicon",
                    length_ratio=max(length_ratio(anchor, pos), length_ratio(anchor, neg)),
                ))
    stats.records = len(records)
    return records, stats


def save_triplets(records: list[TripletRecord], path) -> None:
    write_jsonl(path, [r.as_dict() for r in records])


def load_triplets(path) -> list[TripletRecord]:
    return [TripletRecord(**rec) for rec in read_jsonl(path)]


def tokenize_records(records: list[TripletRecord], vocab: Vocabulary):
    """Records to trainer triples under a vocabulary."""
    from .training import Triplet

    return [Triplet(tokenize(r.anchor, vocab), tokenize(r.positive, vocab),
                    tokenize(r.negative, vocab)) for r in records]


def split_corpus(texts: list[str], n_eval: int, n_val: int, seed: int = 0):
    """Deterministic shuffle-split into (train, val, eval) text lists."""
    if n_eval + n_val >= len(texts):
        raise ValueError("split sizes exceed corpus")
    order = rng_for(seed, 0x5EED).permutation(len(texts))
    eval_idx = order[:n_eval]
    val_idx = order[n_eval:n_eval + n_val]
    train_idx = order[n_eval + n_val:]
    pick = lambda idx: [texts[int(i)] for i in sorted(idx)]
    return pick(train_idx), pick(val_idx), pick(eval_idx)
