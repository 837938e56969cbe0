"""Margin-based parallel corpus mining over sentence embeddings."""

from ._core import (
    classify,
    dedup,
    margin_score,
    mine,
    normalize,
    precision_recall,
    read_embeddings,
    search_exact,
    segment,
    write_embeddings,
)

__version__ = "0.1.0"

__all__ = [
    "classify",
    "dedup",
    "margin_score",
    "mine",
    "normalize",
    "precision_recall",
    "read_embeddings",
    "search_exact",
    "segment",
    "write_embeddings",
]
