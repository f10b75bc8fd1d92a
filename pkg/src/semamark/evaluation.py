"""Detection statistic, ROC-AUC, the four-condition attack suite, stealing
attack, perplexity proxy, and the strength trade-off sweep."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .dataset import (KIND_HATE, KIND_PARAPHRASE, KIND_SENT_LATTER, KIND_SENTIMENT,
                      Lexicons, insert_hate, paraphrase_local, sentiment_flip)
from .lm import NGramLM
from .mapping import GreenRedSplit, MappingModel, green_list
from .text import TokenSeq, Vocabulary, tokenize
from .util import config_hash, ensure_dir, rng_for, stream_key, write_csv
from .watermark import (WatermarkParams, WatermarkedRecord, kgw_split, synonym_id_map,
                        unigram_split, watermark_text)

CONDITION_DETECT = "detect"
CONDITION_PARAPHRASE = "paraphrase"
CONDITION_SENTIMENT = "sentiment_spoof"
CONDITION_HATE = "hate_spoof"
CONDITION_SENT_LATTER = "sentiment_latter_spoof"
CORE_CONDITIONS = (CONDITION_DETECT, CONDITION_PARAPHRASE, CONDITION_SENTIMENT, CONDITION_HATE)


@dataclass
class DetectionResult:
    green_fraction: float
    z_score: float
    n_tokens: int
    split_source: str


def detect(target, scheme: str = "semantic", *, mapper: MappingModel | None = None,
           vocab: Vocabulary | None = None, key: int = 7, gamma: float = 0.5,
           conditioning: str = "global", split: GreenRedSplit | None = None
           ) -> DetectionResult:
    """Green-token fraction of a text under the scheme's split.

    The semantic scheme computes the split from the scored text itself
    (per-position from its prefix in the `prefix` conditioning mode). The
    z-score uses the balanced-split expectation of one half.
    """
    if isinstance(target, TokenSeq):
        seq = target
    else:
        if vocab is None:
            raise ValueError("detecting on raw text requires a vocabulary")
        seq = tokenize(target, vocab)
    n = len(seq)
    if n == 0:
        raise ValueError("empty text")

    if split is not None:
        greens = sum(1 for i in seq.ids if split.is_green(i))
        source = "override"
    elif scheme == "semantic":
        if mapper is None:
            raise ValueError("semantic scheme requires a mapping model")
        if conditioning == "global":
            mask = green_list(mapper, seq).mask
            greens = int(mask[list(seq.ids)].sum())
            source = "self"
        else:
            greens = 0
            for t in range(n):
                step_split = green_list(mapper, seq.ids[:t])
                greens += int(step_split.is_green(seq.ids[t]))
            source = "prefix"
    elif scheme == "kgw":
        vocab_size = mapper.vocab_size if mapper else (vocab.size if vocab else None)
        if vocab_size is None:
            raise ValueError("kgw detection requires a vocabulary or mapper")
        greens = 0
        cache: dict[int, GreenRedSplit] = {}
        prev = Vocabulary.unk_id
        for token in seq.ids:
            if prev not in cache:
                cache[prev] = kgw_split(vocab_size, prev, key, gamma)
            greens += int(cache[prev].is_green(token))
            prev = token
        source = f"kgw:{key}"
    elif scheme == "unigram":
        vocab_size = mapper.vocab_size if mapper else (vocab.size if vocab else None)
        if vocab_size is None:
            raise ValueError("unigram detection requires a vocabulary or mapper")
        fixed = unigram_split(vocab_size, key, gamma)
        greens = sum(1 for i in seq.ids if fixed.is_green(i))
        source = f"unigram:{key}"
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    fraction = greens / n
    z = (greens - 0.5 * n) / math.sqrt(0.25 * n)
    return DetectionResult(fraction, z, n, source)


def roc_auc(pos_scores, neg_scores) -> float:
    """Probability a random positive outscores a random negative, ties at
    one half, computed from tie-averaged ranks."""
    pos = [float(s) for s in pos_scores]
    neg = [float(s) for s in neg_scores]
    if not pos or not neg:
        raise ValueError("both score lists must be non-empty")
    scores = pos + neg
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    ranks = [0.0] * len(scores)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j + 2) / 2.0  # 1-based average over the tie run
        for t in range(i, j + 1):
            ranks[order[t]] = avg_rank
        i = j + 1
    rank_sum = sum(ranks[: len(pos)])
    n_pos, n_neg = len(pos), len(neg)
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def overall_auc(det: float, para: float, sent: float, hate: float) -> float:
    """All arguments on the 0-100 scale; spoofing conditions enter as
    complements."""
    return (det + para + (100.0 - sent) + (100.0 - hate)) / 4.0


def perplexity(lm: NGramLM, target) -> float:
    """Exp of the mean negative interpolated log-probability."""
    seq = target if isinstance(target, TokenSeq) else TokenSeq(tuple(target))
    n = len(seq)
    if n == 0:
        raise ValueError("empty text")
    return math.exp(-lm.sequence_logprob(seq) / n)


@dataclass
class ConditionScores:
    pos: list[float | None] = field(default_factory=list)
    neg: list[float | None] = field(default_factory=list)
    skip_reasons: dict = field(default_factory=dict)

    def available(self) -> tuple[list[float], list[float]]:
        return ([s for s in self.pos if s is not None],
                [s for s in self.neg if s is not None])

    @property
    def skipped(self) -> int:
        return sum(1 for s in self.pos if s is None) + sum(1 for s in self.neg if s is None)


@dataclass
class EvalReport:
    conditions: dict[str, ConditionScores]
    aucs: dict[str, float]
    overall_auc_pct: float | None
    ppl_watermarked: list[float]
    ppl_original: list[float]
    config: dict
    cfg_hash: str
    n_texts: int
    decryption: dict | None = None

    def summary_rows(self) -> list[tuple]:
        rows = []
        for name in self.conditions:
            cond = self.conditions[name]
            pos, neg = cond.available()
            rows.append((name, self.aucs.get(name), len(pos), len(neg), cond.skipped))
        return rows

    def summary_lines(self) -> list[str]:
        lines = [f"evaluated {self.n_texts} texts (config {self.cfg_hash})"]
        for name, auc, n_pos, n_neg, skipped in self.summary_rows():
            auc_txt = "n/a" if auc is None else f"{auc:.4f}"
            lines.append(f"  {name:<24} AUC={auc_txt}  pos={n_pos} neg={n_neg} skipped={skipped}")
        if self.overall_auc_pct is not None:
            lines.append(f"  overall AUC = {self.overall_auc_pct:.2f}")
        if self.ppl_watermarked:
            lines.append(f"  mean PPL watermarked = {float(np.mean(self.ppl_watermarked)):.2f}"
                         f" original = {float(np.mean(self.ppl_original)):.2f}")
        if self.decryption:
            ks = ", ".join(f"k={k}: {v:.3f}" for k, v in sorted(self.decryption.items()))
            lines.append(f"  decryption rates: {ks}")
        return lines

    def write_outputs(self, outdir, render_plots: bool = True) -> list[str]:
        outdir = ensure_dir(outdir)
        written = []
        summary = outdir / "report.csv"
        rows = [(name, auc, n_pos, n_neg, skipped)
                for name, auc, n_pos, n_neg, skipped in self.summary_rows()]
        if self.overall_auc_pct is not None:
            rows.append(("overall_auc_pct", self.overall_auc_pct, "", "", ""))
        if self.ppl_watermarked:
            rows.append(("mean_ppl_watermarked", float(np.mean(self.ppl_watermarked)), "", "", ""))
            rows.append(("mean_ppl_original", float(np.mean(self.ppl_original)), "", "", ""))
        write_csv(summary, ["condition", "auc", "n_pos", "n_neg", "skipped"], rows, self.cfg_hash)
        written.append(str(summary))
        for name, cond in self.conditions.items():
            path = outdir / f"scores_{name}.csv"
            score_rows = [(i, cond.pos[i], cond.neg[i], cond.skip_reasons.get(i, ""))
                          for i in range(len(cond.pos))]
            write_csv(path, ["index", "pos_score", "neg_score", "skip_reason"],
                      score_rows, self.cfg_hash)
            written.append(str(path))
        if render_plots:
            from .plots import save_roc_svg

            svg = outdir / "roc.svg"
            curves = {}
            for name, cond in self.conditions.items():
                pos, neg = cond.available()
                if pos and neg:
                    curves[name] = (pos, neg)
            if curves:
                save_roc_svg(curves, svg, self.cfg_hash)
                written.append(str(svg))
        return written


# ---------------------------------------------------------------------------
# Suite workers (module level so process pools can pick them up)

_STATE: dict = {}


def _set_state(state: dict) -> None:
    global _STATE
    _STATE = state


def _apply_attack(cond: str, text: str, lexicons: Lexicons, cfg: dict,
                  rng: np.random.Generator) -> str | None:
    if cond == CONDITION_DETECT:
        return text
    if cond == CONDITION_PARAPHRASE:
        return paraphrase_local(text, lexicons, cfg["replace_rate"], rng)
    if cond == CONDITION_SENTIMENT:
        return sentiment_flip(text, lexicons, cfg["max_edits"], rng, "whole")
    if cond == CONDITION_SENT_LATTER:
        return sentiment_flip(text, lexicons, cfg["max_edits"], rng, "latter_half")
    if cond == CONDITION_HATE:
        return insert_hate(text, lexicons, cfg["n_hate_phrases"], rng)
    raise ValueError(f"unknown condition {cond!r}")


def _detect_score(text: str, state: dict) -> float:
    params: WatermarkParams = state["params"]
    return detect(text, params.scheme, mapper=state["mapper"], vocab=state["vocab"],
                  key=params.key, gamma=params.gamma,
                  conditioning=params.conditioning).green_fraction


def _suite_worker(idx: int) -> dict:
    state = _STATE
    params: WatermarkParams = state["params"]
    text = state["texts"][idx]
    seq = tokenize(text, state["vocab"])
    rng = rng_for(state["seed"], stream_key("wm"), idx)
    record = watermark_text(state["lm"], state["mapper"], seq, params,
                            state["synonym_ids"], rng)
    out: dict = {"idx": idx, "scores": {}, "reasons": {}}
    for cond in state["conditions"]:
        pair = []
        for which, base in (("pos", record.output), ("neg", text)):
            rng_a = rng_for(state["seed"], stream_key(cond), idx, 0 if which == "pos" else 1)
            attacked = _apply_attack(cond, base, state["lexicons"], state["attack_cfg"], rng_a)
            if attacked is None or not attacked.strip():
                pair.append(None)
                out["reasons"].setdefault(cond, f"{which}: transform rejected")
                continue
            pair.append(_detect_score(attacked, state))
        out["scores"][cond] = tuple(pair)
    if state["include_ppl"]:
        out["ppl_watermarked"] = perplexity(state["lm"], TokenSeq(record.output_ids))
        out["ppl_original"] = perplexity(state["lm"], seq)
    return out


def run_suite(eval_texts: list[str], vocab: Vocabulary, lm: NGramLM,
              mapper: MappingModel | None, lexicons: Lexicons, params: WatermarkParams,
              *, seed: int = 0, jobs: int = 1, replace_rate: float = 0.15,
              max_edits: int = 8, n_hate_phrases: int = 1,
              conditions: tuple[str, ...] = CORE_CONDITIONS,
              include_ppl: bool = True, extra_config: dict | None = None) -> EvalReport:
    """Watermark every text, attack both classes per condition, and score.

    Positives are (attacked) watermarked texts, negatives the same attack on
    the unwatermarked originals; rejected transforms become per-text skips.
    """
    if not eval_texts:
        raise ValueError("no evaluation texts")
    state = {
        "texts": list(eval_texts), "vocab": vocab, "lm": lm, "mapper": mapper,
        "lexicons": lexicons, "params": params,
        "synonym_ids": synonym_id_map(vocab, lexicons),
        "attack_cfg": {"replace_rate": replace_rate, "max_edits": max_edits,
                       "n_hate_phrases": n_hate_phrases},
        "conditions": tuple(conditions), "seed": seed, "include_ppl": include_ppl,
    }
    results = _run_state_pool(_suite_worker, range(len(eval_texts)), state, jobs)

    cond_scores = {c: ConditionScores() for c in conditions}
    ppl_w: list[float] = []
    ppl_o: list[float] = []
    for res in results:
        for cond in conditions:
            pos, neg = res["scores"][cond]
            cond_scores[cond].pos.append(pos)
            cond_scores[cond].neg.append(neg)
            if cond in res["reasons"]:
                cond_scores[cond].skip_reasons[res["idx"]] = res["reasons"][cond]
        if include_ppl:
            ppl_w.append(res["ppl_watermarked"])
            ppl_o.append(res["ppl_original"])

    aucs = {}
    for cond in conditions:
        pos, neg = cond_scores[cond].available()
        aucs[cond] = roc_auc(pos, neg) if pos and neg else None
    overall = None
    if all(aucs.get(c) is not None for c in CORE_CONDITIONS):
        overall = overall_auc(100 * aucs[CONDITION_DETECT], 100 * aucs[CONDITION_PARAPHRASE],
                              100 * aucs[CONDITION_SENTIMENT], 100 * aucs[CONDITION_HATE])

    config = {"seed": seed, "replace_rate": replace_rate, "max_edits": max_edits,
              "n_hate_phrases": n_hate_phrases, "n_texts": len(eval_texts),
              **{f"wm_{k}": v for k, v in params.as_dict().items()},
              **(extra_config or {})}
    return EvalReport(cond_scores, aucs, overall, ppl_w, ppl_o, config,
                      config_hash(config), len(eval_texts))


def _run_state_pool(worker, items, state: dict, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        _set_state(state)
        try:
            return [worker(x) for x in items]
        finally:
            _set_state({})
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_set_state,
                             initargs=(state,)) as ex:
        return list(ex.map(worker, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# Stealing attack

def _steal_worker(task: tuple[int, int]) -> tuple[int, tuple[int, ...]]:
    state = _STATE
    target_idx, sample_idx = task
    seq = state["seqs"][target_idx]
    rng = rng_for(state["seed"], stream_key("steal"), target_idx, sample_idx)
    record = watermark_text(state["lm"], state["mapper"], seq, state["params"],
                            state["synonym_ids"], rng)
    return target_idx, record.output_ids


def stealing_attack(lm: NGramLM, mapper: MappingModel | None, vocab: Vocabulary,
                    target_texts: list[str], params: WatermarkParams,
                    lexicons: Lexicons, *, n_samples: int = 500,
                    ks: tuple[int, ...] = (50, 100, 200), seed: int = 0,
                    jobs: int = 1) -> dict:
    """Token-frequency key recovery: many watermarked samples of each target,
    rank tokens by frequency, and score the top-k overlap with the true green
    list. The scheme must expose a single ground-truth split per target."""
    if params.scheme == "kgw":
        raise ValueError("kgw has no single per-target split; stealing needs semantic or unigram")
    seqs = [tokenize(t, vocab) for t in target_texts]
    truths = []
    for seq in seqs:
        if params.scheme == "semantic":
            truths.append(green_list(mapper, seq))
        else:
            truths.append(unigram_split(vocab.size, params.key, params.gamma))

    state = {"seqs": seqs, "lm": lm, "mapper": mapper, "params": params,
             "synonym_ids": synonym_id_map(vocab, lexicons), "seed": seed}
    tasks = [(ti, si) for ti in range(len(seqs)) for si in range(n_samples)]
    results = _run_state_pool(_steal_worker, tasks, state, jobs)

    freqs = [Counter() for _ in seqs]
    for target_idx, ids in results:
        freqs[target_idx].update(ids)

    per_target: list[dict[int, float]] = []
    for ti, counter in enumerate(freqs):
        ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        rates = {}
        for k in ks:
            top = [tok for tok, _ in ranked[:k]]
            hits = sum(1 for tok in top if truths[ti].is_green(tok))
            rates[k] = hits / k
        per_target.append(rates)
    means = {k: float(np.mean([r[k] for r in per_target])) for k in ks}
    return {"per_target": per_target, "mean": means, "n_samples": n_samples,
            "scheme": params.scheme}


# ---------------------------------------------------------------------------
# Strength trade-off sweep

def delta_sweep(eval_texts: list[str], vocab: Vocabulary, lm: NGramLM,
                mapper: MappingModel | None, lexicons: Lexicons,
                base_params: WatermarkParams, deltas, *, seed: int = 0, jobs: int = 1,
                replace_rate: float = 0.15, max_edits: int = 8,
                outdir=None) -> list[tuple[float, float, float]]:
    """One suite run per strength value; rows are (delta, overall AUC percent,
    mean watermarked perplexity), sorted ascending by delta."""
    rows = []
    for delta in sorted(float(d) for d in deltas):
        params = WatermarkParams(**{**base_params.as_dict(), "delta": delta})
        report = run_suite(eval_texts, vocab, lm, mapper, lexicons, params, seed=seed,
                           jobs=jobs, replace_rate=replace_rate, max_edits=max_edits)
        rows.append((delta, report.overall_auc_pct,
                     float(np.mean(report.ppl_watermarked))))
    if outdir is not None:
        outdir = ensure_dir(outdir)
        cfg = {"deltas": ",".join(str(r[0]) for r in rows), "seed": seed,
               **{f"wm_{k}": v for k, v in base_params.as_dict().items()}}
        h = config_hash(cfg)
        write_csv(outdir / "sweep.csv", ["delta", "overall_auc_pct", "mean_ppl"], rows, h)
        from .plots import save_tradeoff_svg

        save_tradeoff_svg(rows, outdir / "tradeoff.svg", h)
    return rows
