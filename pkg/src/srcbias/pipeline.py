"""Glue: pooled corpora -> rank tables -> bias report."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .metrics import DEFAULT_KS, BiasEvaluation, evaluate_bias
from .ranking import PooledEmbedding, Pooling, pool_corpus, rank_mixed, rank_relevant
from .store import Corpus, QueryRecord


def project(pooled: Sequence[PooledEmbedding], w: np.ndarray | None) -> list[PooledEmbedding]:
    """Apply a linear scorer projection and renormalize (identity when ``w`` is None)."""
    if w is None:
        return list(pooled)
    out = []
    for p in pooled:
        v = w @ p.vector
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise ValueError(f"degenerate projection for video {p.video_id!r}")
        out.append(PooledEmbedding(p.video_id, p.source, v / n))
    return out


def evaluate_pooled(
    real: Sequence[PooledEmbedding],
    ai: Sequence[PooledEmbedding],
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    seed: int,
    ks=DEFAULT_KS,
    n_seeds: int = 1,
    workers: int = 1,
) -> BiasEvaluation:
    real_t = rank_relevant(real, queries, rel, workers)
    ai_t = rank_relevant(ai, queries, rel, workers)
    mixed_real, mixed_ai = rank_mixed(real, ai, queries, rel, workers)
    return evaluate_bias(real_t, ai_t, mixed_real, mixed_ai, seed, ks, n_seeds)


def evaluate_corpora(
    real: Corpus,
    ai: Corpus,
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    seed: int,
    pooling: Pooling | str = Pooling(),
    frames: int | None = None,
    w: np.ndarray | None = None,
    ks=DEFAULT_KS,
    n_seeds: int = 1,
    workers: int = 1,
) -> BiasEvaluation:
    """Pool both corpora, optionally project with ``w``, and measure source bias."""
    real_p = project(pool_corpus(real, pooling, frames), w)
    ai_p = project(pool_corpus(ai, pooling, frames), w)
    return evaluate_pooled(real_p, ai_p, queries, rel, seed, ks, n_seeds, workers)
