"""Semantic-aware green/red-list text watermarking toolkit.

Embeds watermarks into existing text by constrained regeneration with a
green-list logit bias, where the green/red vocabulary split comes from a
contrastively trained mapping model conditioned on the whole target text.
Ships baseline splits (previous-token hash and fixed split), spoofing and
removal attacks, and an AUC-based evaluation harness with CSV/SVG reports.
"""

__version__ = "0.1.0"
