"""Word-level tokenization, vocabulary construction, and corpus ingestion."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

UNK = "unk"

# Lowercase words (apostrophes kept inside) plus single punctuation tokens.
_TOKEN_RE = re.compile(r"[\w']+|[^\w\s]")


class CorpusError(ValueError):
    """Unreadable, empty, or malformed corpus input."""


def split_tokens(text: str) -> list[str]:
    """Lowercase word tokens with punctuation split off as separate tokens."""
    return _TOKEN_RE.findall(text.lower())


def word_count(text: str) -> int:
    """Whitespace word count, the unit used by corpus length filters."""
    return len(text.split())


class Vocabulary:
    """Fixed token-id space. Id 0 is the reserved unknown token."""

    unk_id = 0

    def __init__(self, tokens):
        tokens = list(tokens)
        if not tokens or tokens[0] != UNK:
            raise ValueError("vocabulary must start with the reserved unknown token")
        if len(set(tokens)) != len(tokens):
            raise ValueError("vocabulary contains duplicate tokens")
        self.tokens: list[str] = tokens
        self.id_of: dict[str, int] = {t: i for i, t in enumerate(tokens)}

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def id(self, token: str) -> int:
        return self.id_of.get(token, self.unk_id)

    def content_hash(self) -> str:
        payload = "\n".join(self.tokens).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"vocab v1 {self.size}\n")
            for tok in self.tokens:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            parts = header.split()
            if len(parts) != 3 or parts[0] != "vocab" or parts[1] != "v1":
                raise CorpusError(f"bad vocabulary header: {header!r}")
            size = int(parts[2])
            tokens = [line.rstrip("\n") for line in fh]
        if len(tokens) != size:
            raise CorpusError(f"vocabulary truncated: header says {size}, found {len(tokens)}")
        return cls(tokens)


@dataclass(frozen=True)
class TokenSeq:
    """A tokenized text: ids into a vocabulary plus the original string."""

    ids: tuple[int, ...]
    source_text: str = ""

    def __len__(self) -> int:
        return len(self.ids)


def build_vocab(corpus_texts, max_size: int = 2000) -> Vocabulary:
    """Most frequent token types, capped at max_size (unknown token included).

    Frequency ties break lexicographically so builds are byte-identical.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    counts: Counter = Counter()
    for text in corpus_texts:
        counts.update(split_tokens(text))
    counts.pop(UNK, None)  # reserved surface form
    if not counts:
        raise CorpusError("empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, _ in ranked[: max_size - 1]]
    return Vocabulary([UNK] + kept)


def tokenize(text: str, vocab: Vocabulary) -> TokenSeq:
    """Map a string to token ids; unknown words map to the unknown id."""
    return TokenSeq(tuple(vocab.id(t) for t in split_tokens(text)), text)


def detokenize(ids, vocab: Vocabulary) -> str:
    """Render ids back to text with single spaces between tokens."""
    if isinstance(ids, TokenSeq):
        ids = ids.ids
    return " ".join(vocab.tokens[i] for i in ids)


@dataclass
class Corpus:
    documents: list[TokenSeq]
    vocab: Vocabulary
    provenance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def texts(self) -> list[str]:
        return [d.source_text for d in self.documents]


def read_documents(path) -> list[str]:
    """One document per line (.txt) or jsonl records with a `text` field."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus at {path}: {exc}") from exc
    docs: list[str] = []
    if path.suffix == ".jsonl":
        for i, line in enumerate(raw.splitlines()):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"bad jsonl record at line {i + 1}: {exc}") from exc
            if not isinstance(rec, dict) or "text" not in rec:
                raise CorpusError(f"jsonl record at line {i + 1} has no `text` field")
            docs.append(str(rec["text"]))
    else:
        docs = [line for line in raw.splitlines() if line.strip()]
    return docs


def truncate_words(text: str, max_words: int) -> str:
    words = text.split()
    if len(words) <= max_words:
        return text
    return " ".join(words[:max_words])


def ingest_corpus(
    path,
    min_words: int = 200,
    max_words: int | None = 300,
    vocab: Vocabulary | None = None,
    max_vocab: int = 2000,
) -> Corpus:
    """Read, filter, and tokenize a corpus.

    Documents shorter than min_words are dropped; longer ones are truncated
    to max_words (None disables truncation). A vocabulary is built from the
    surviving texts unless one is supplied.
    """
    texts = read_documents(path)
    kept = []
    for t in texts:
        if word_count(t) < min_words:
            continue
        kept.append(t if max_words is None else truncate_words(t, max_words))
    if not kept:
        raise CorpusError(f"no documents in {path} survive the length filters")
    if vocab is None:
        vocab = build_vocab(kept, max_vocab)
    documents = [tokenize(t, vocab) for t in kept]
    provenance = {
        "path": str(path),
        "min_words": min_words,
        "max_words": "none" if max_words is None else max_words,
        "documents": len(documents),
        "vocab_size": vocab.size,
    }
    return Corpus(documents, vocab, provenance)
