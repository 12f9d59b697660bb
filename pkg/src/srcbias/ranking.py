"""Frame pooling, frame-order ablations and relevant-item ranking."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rng import Xoshiro256
from .store import Corpus, QueryRecord, StoreError, VideoRecord

DEFAULT_FRAMES = 10
SOURCE_ORDER = {"real": 0, "ai": 1}


class DegenerateEmbedding(ValueError):
    pass


@dataclass(frozen=True)
class Pooling:
    """Frame aggregation mode: ``uniform-mean``, ``positional-ramp`` or ``single-frame``.

    For ``single-frame`` a ``k`` of None selects the middle frame ``f // 2``.
    """

    kind: str = "uniform-mean"
    k: int | None = None

    KINDS = ("uniform-mean", "positional-ramp", "single-frame")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown pooling mode {self.kind!r}; expected one of {self.KINDS}")
        if self.k is not None and self.kind != "single-frame":
            raise ValueError("a frame index only applies to single-frame pooling")

    @classmethod
    def parse(cls, text: str) -> "Pooling":
        """Parse ``uniform-mean``, ``positional-ramp``, ``single-frame`` or ``single-frame:K``."""
        kind, _, k = text.partition(":")
        return cls(kind, int(k) if k else None)

    def __str__(self) -> str:
        return self.kind if self.k is None else f"{self.kind}:{self.k}"


@dataclass
class PooledEmbedding:
    video_id: str
    source: str
    vector: np.ndarray


@dataclass
class RankTable:
    ranks: dict[str, int]
    corpus_size: int

    def __len__(self) -> int:
        return len(self.ranks)

    def values(self, order: Sequence[str] | None = None) -> np.ndarray:
        keys = order if order is not None else self.ranks.keys()
        return np.array([self.ranks[q] for q in keys], dtype=np.int64)


def normalize(v: np.ndarray, what: str = "vector") -> np.ndarray:
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise DegenerateEmbedding(f"degenerate embedding for {what}: zero or non-finite norm")
    return v / norm


def sample_indices(n: int, f: int) -> list[int]:
    if f < 1 or n < 1:
        raise ValueError("need f >= 1 and at least one frame")
    if f == 1:
        return [n // 2]
    # round half away from zero so the grid is symmetric
    return [int(np.floor(j * (n - 1) / (f - 1) + 0.5)) for j in range(f)]


def sample_frames(video: VideoRecord, f: int = DEFAULT_FRAMES) -> VideoRecord:
    """Uniformly pick ``f`` frames (repeating when the video is shorter)."""
    return video.with_frames(video.frames[sample_indices(video.n_frames, f)])


def ramp_weights(f: int) -> np.ndarray:
    j = np.arange(1, f + 1, dtype=np.float64)
    return 2.0 * j / (f * (f + 1))


def pool(video: VideoRecord, mode: Pooling | str = Pooling()) -> PooledEmbedding:
    if isinstance(mode, str):
        mode = Pooling.parse(mode)
    frames = video.frames
    if mode.kind == "uniform-mean":
        v = frames.mean(axis=0)
    elif mode.kind == "positional-ramp":
        v = ramp_weights(len(frames)) @ frames
    else:
        k = len(frames) // 2 if mode.k is None else mode.k
        if not 0 <= k < len(frames):
            raise ValueError(f"frame index {k} out of range for video {video.id!r} ({len(frames)} frames)")
        v = frames[k]
    return PooledEmbedding(video.id, video.source, normalize(v, f"video {video.id!r}"))


def pool_corpus(
    corpus: Corpus | Sequence[VideoRecord], mode: Pooling | str = Pooling(), frames: int | None = None
) -> list[PooledEmbedding]:
    """Pool every video, resampling to ``frames`` first when given."""
    out = []
    for video in corpus:
        if frames is not None:
            video = sample_frames(video, frames)
        out.append(pool(video, mode))
    return out


def shuffle_frames(video: VideoRecord, mode: str = "identity", seed: int = 0) -> VideoRecord:
    """Reorder frames: ``identity``, ``reverse`` or ``random`` (seeded Fisher-Yates)."""
    if mode == "identity":
        return video
    if mode == "reverse":
        return video.with_frames(video.frames[::-1].copy())
    if mode == "random":
        order = Xoshiro256(seed).permutation(video.n_frames)
        return video.with_frames(video.frames[order])
    raise ValueError(f"unknown shuffle mode {mode!r}")


def shuffle_corpus(corpus: Corpus, mode: str, seed: int) -> Corpus:
    """Shuffle every video with a stream keyed on (seed, id, source), independent of file order."""
    return corpus.map(
        lambda v: shuffle_frames(v, mode, Xoshiro256.from_path(seed, "shuffle", v.source, v.id).next_u64())
    )


def _query_matrix(queries: Sequence[QueryRecord], dim: int) -> np.ndarray:
    rows = []
    for q in queries:
        if q.dim != dim:
            raise StoreError(f"query {q.id!r} has dimension {q.dim}, corpus has {dim}")
        rows.append(normalize(q.embedding, f"query {q.id!r}"))
    return np.array(rows)


def _similarities(qmat: np.ndarray, vmat: np.ndarray, chunk: int = 64) -> np.ndarray:
    # elementwise product + last-axis sum: each entry reduces the same way wherever it sits,
    # so equal vectors always get bit-equal scores (BLAS kernels do not promise that)
    out = np.empty((len(qmat), len(vmat)))
    for start in range(0, len(qmat), chunk):
        block = qmat[start : start + chunk]
        out[start : start + chunk] = (block[:, None, :] * vmat[None, :, :]).sum(axis=-1)
    return out


def _tie_keys(pooled: Sequence[PooledEmbedding]) -> np.ndarray:
    """Position of each item under (id, source) lexicographic order."""
    order = sorted(range(len(pooled)), key=lambda i: (pooled[i].video_id, SOURCE_ORDER[pooled[i].source]))
    keys = np.empty(len(pooled), dtype=np.int64)
    keys[order] = np.arange(len(pooled))
    return keys


def _ranks_of(sims: np.ndarray, target: np.ndarray, keys: np.ndarray) -> np.ndarray:
    rows = np.arange(len(sims))
    s_t = sims[rows, target][:, None]
    k_t = keys[target][:, None]
    ahead = (sims > s_t) | ((sims == s_t) & (keys[None, :] < k_t))
    return 1 + ahead.sum(axis=1)


def _rank_pool(
    pooled: Sequence[PooledEmbedding],
    queries: Sequence[QueryRecord],
    targets: list[np.ndarray],
    workers: int,
) -> list[np.ndarray]:
    vmat = np.array([p.vector for p in pooled])
    qmat = _query_matrix(queries, vmat.shape[1])
    keys = _tie_keys(pooled)
    chunk = max(1, -(-len(queries) // max(1, workers)))
    spans = [(s, min(s + chunk, len(queries))) for s in range(0, len(queries), chunk)]

    def work(span):
        lo, hi = span
        sims = _similarities(qmat[lo:hi], vmat)
        return [_ranks_of(sims, t[lo:hi], keys) for t in targets]

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(work, spans))
    else:
        parts = [work(s) for s in spans]
    # spans are merged in query order, never completion order
    return [np.concatenate([p[i] for p in parts]) for i in range(len(targets))]


def _index_targets(pooled, queries, rel, source=None) -> np.ndarray:
    where = {
        (p.video_id if source is None else (p.video_id, p.source)): i for i, p in enumerate(pooled)
    }
    out = []
    for q in queries:
        vid = rel.get(q.id)
        key = vid if source is None else (vid, source)
        if key not in where:
            raise StoreError(f"relevant video {vid!r} for query {q.id!r} is not in the corpus")
        out.append(where[key])
    return np.array(out, dtype=np.int64)


def rank_relevant(
    pooled: Sequence[PooledEmbedding],
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    workers: int = 1,
) -> RankTable:
    """1-based rank of each query's relevant video by cosine similarity.

    Ties go to the lexicographically smaller video id.
    """
    target = _index_targets(pooled, queries, rel)
    (ranks,) = _rank_pool(pooled, queries, [target], workers)
    return RankTable({q.id: int(r) for q, r in zip(queries, ranks)}, len(pooled))


def rank_mixed(
    real_pooled: Sequence[PooledEmbedding],
    ai_pooled: Sequence[PooledEmbedding],
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    workers: int = 1,
) -> tuple[RankTable, RankTable]:
    """Ranks of the real and the AI relevant item within the union of both corpora."""
    pooled = list(real_pooled) + list(ai_pooled)
    if {p.source for p in real_pooled} - {"real"} or {p.source for p in ai_pooled} - {"ai"}:
        raise StoreError("rank_mixed expects a real-only and an ai-only corpus")
    real_t = _index_targets(pooled, queries, rel, "real")
    ai_t = _index_targets(pooled, queries, rel, "ai")
    r_real, r_ai = _rank_pool(pooled, queries, [real_t, ai_t], workers)
    n = len(pooled)
    return (
        RankTable({q.id: int(r) for q, r in zip(queries, r_real)}, n),
        RankTable({q.id: int(r) for q, r in zip(queries, r_ai)}, n),
    )
