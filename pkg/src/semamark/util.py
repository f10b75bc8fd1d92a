"""Shared helpers: seeded RNG streams, stable hashing, jsonl and csv io."""

from __future__ import annotations

import hashlib
import json
import zlib
from pathlib import Path

import numpy as np


def rng_for(seed: int, *stream: int) -> np.random.Generator:
    """Independent, platform-stable generator for a (seed, stream...) key."""
    parts = [int(seed) & 0xFFFFFFFF] + [int(s) & 0xFFFFFFFF for s in stream]
    return np.random.default_rng(parts)


def stream_key(name: str) -> int:
    """Map a label to a stable integer usable as an rng stream component."""
    return zlib.crc32(name.encode("utf-8"))


def stable_bucket(data: bytes, buckets: int) -> int:
    return zlib.crc32(data) % buckets


def config_hash(config: dict) -> str:
    """Short hash over flat key=value lines, order-insensitive."""
    lines = sorted(f"{k}={config[k]}" for k in config)
    digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
    return digest[:16]


def read_jsonl(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_csv(path, header: list[str], rows, cfg_hash: str | None = None) -> None:
    """CSV with an optional provenance header line; floats written via repr."""
    with open(path, "w", encoding="utf-8") as fh:
        if cfg_hash is not None:
            fh.write(f"# config_hash={cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def pmap(fn, items, jobs: int = 1, chunksize: int | None = None) -> list:
    """Ordered map over items, optionally on a process pool.

    `fn` must be picklable (module-level function or partial). Items carry
    everything needed to derive per-item rng state, so results do not depend
    on `jobs`.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    if chunksize is None:
        chunksize = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
