"""Deterministic SVG figures for the report path.

SVG output omits the creation date and pins the hash salt so reruns with the
same config are byte-identical.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "semamark"


def roc_points(pos_scores, neg_scores):
    """(fpr, tpr) arrays over all score thresholds, endpoints included."""
    pos = np.asarray(sorted(pos_scores))
    neg = np.asarray(sorted(neg_scores))
    thresholds = np.unique(np.concatenate([pos, neg]))
    fpr = [1.0]
    tpr = [1.0]
    for th in thresholds:
        tpr.append(float(np.mean(pos >= th)))
        fpr.append(float(np.mean(neg >= th)))
    fpr.append(0.0)
    tpr.append(0.0)
    return np.array(fpr)[::-1], np.array(tpr)[::-1]


def _finish_svg(fig, path, cfg_hash: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    raw = open(path, "r", encoding="utf-8").read()
    lines = raw.split("\n")
    lines.insert(1, f"<!-- config_hash={cfg_hash} -->")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))


def save_roc_svg(curves: dict[str, tuple[list, list]], path, cfg_hash: str) -> None:
    """One ROC curve per condition; `curves` maps name -> (pos, neg) scores."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for name, (pos, neg) in curves.items():
        fpr, tpr = roc_points(pos, neg)
        ax.plot(fpr, tpr, label=name, linewidth=1.5)
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("detection ROC by condition")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _finish_svg(fig, path, cfg_hash)


def save_tradeoff_svg(rows, path, cfg_hash: str) -> None:
    """Strength sweep scatter: overall AUC against mean perplexity, point size
    grows with the strength value."""
    deltas = [r[0] for r in rows]
    aucs = [r[1] for r in rows]
    ppls = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    sizes = [30 + 40 * i for i in range(len(rows))]
    ax.scatter(ppls, aucs, s=sizes, color="tab:blue", alpha=0.8)
    for d, x, y in zip(deltas, ppls, aucs):
        ax.annotate(f"{d:g}", (x, y), textcoords="offset points", xytext=(6, 4), fontsize=8)
    ax.set_xlabel("mean perplexity of watermarked text")
    ax.set_ylabel("overall AUC (percent)")
    ax.set_title("strength trade-off")
    fig.tight_layout()
    _finish_svg(fig, path, cfg_hash)
