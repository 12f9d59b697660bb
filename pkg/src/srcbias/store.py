"""JSONL persistence for video corpora, queries and relevance pairs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

SOURCES = ("real", "ai")


class StoreError(ValueError):
    """Raised for malformed or inconsistent embedding files."""


@dataclass
class VideoRecord:
    id: str
    source: str
    frames: np.ndarray  # (f, d) float64

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if not self.id:
            raise StoreError("video id must be nonempty")
        if self.source not in SOURCES:
            raise StoreError(f"video {self.id!r}: source must be 'real' or 'ai', got {self.source!r}")
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise StoreError(f"video {self.id!r}: frames must be a nonempty list of vectors")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames: np.ndarray) -> "VideoRecord":
        return VideoRecord(self.id, self.source, frames)

    def __eq__(self, other):
        if not isinstance(other, VideoRecord):
            return NotImplemented
        return (
            self.id == other.id
            and self.source == other.source
            and self.frames.shape == other.frames.shape
            and bool(np.array_equal(self.frames, other.frames))
        )


@dataclass
class QueryRecord:
    id: str
    embedding: np.ndarray

    def __post_init__(self):
        self.embedding = np.asarray(self.embedding, dtype=np.float64)
        if not self.id:
            raise StoreError("query id must be nonempty")
        if self.embedding.ndim != 1 or self.embedding.size == 0:
            raise StoreError(f"query {self.id!r}: embedding must be a nonempty vector")

    @property
    def dim(self) -> int:
        return self.embedding.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QueryRecord):
            return NotImplemented
        return self.id == other.id and bool(np.array_equal(self.embedding, other.embedding))


@dataclass
class Corpus:
    videos: list[VideoRecord]
    dim: int
    frame_count: int | None = None  # fixed f, or None for variable
    _index: dict[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._index = {}
        for pos, video in enumerate(self.videos):
            if video.id in self._index:
                raise StoreError(f"duplicate video id {video.id!r}")
            if video.dim != self.dim:
                raise StoreError(
                    f"dimension mismatch in video {video.id!r}: expected {self.dim}, got {video.dim}"
                )
            if self.frame_count is not None and video.n_frames != self.frame_count:
                raise StoreError(
                    f"video {video.id!r} has {video.n_frames} frames, corpus requires {self.frame_count}"
                )
            self._index[video.id] = pos

    @classmethod
    def from_videos(cls, videos: Iterable[VideoRecord]) -> "Corpus":
        """Build a corpus, inferring dim and a fixed frame count when uniform."""
        videos = list(videos)
        if not videos:
            raise StoreError("corpus is empty")
        counts = {v.n_frames for v in videos}
        return cls(videos, videos[0].dim, counts.pop() if len(counts) == 1 else None)

    def __len__(self) -> int:
        return len(self.videos)

    def __iter__(self) -> Iterator[VideoRecord]:
        return iter(self.videos)

    def __contains__(self, video_id: str) -> bool:
        return video_id in self._index

    def get(self, video_id: str) -> VideoRecord:
        return self.videos[self._index[video_id]]

    @property
    def ids(self) -> list[str]:
        return [v.id for v in self.videos]

    def subset(self, ids: Iterable[str]) -> "Corpus":
        return Corpus([self.get(i) for i in ids], self.dim, self.frame_count)

    def map(self, fn) -> "Corpus":
        return Corpus.from_videos(fn(v) for v in self.videos)


RelevanceMap = dict  # query id -> video id


def _parse_lines(path: Path) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise StoreError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise StoreError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _numeric_matrix(value, where: str) -> list[list[float]]:
    if not isinstance(value, list) or not value:
        raise StoreError(f"{where}: 'frames' must be a nonempty list")
    rows = []
    for row in value:
        if not isinstance(row, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in row
        ):
            raise StoreError(f"{where}: every frame must be a list of numbers")
        rows.append(row)
    return rows


def load_corpus(path) -> Corpus:
    """Read a video JSONL file; the first record fixes the dimension."""
    path = Path(path)
    videos: list[VideoRecord] = []
    seen: set[str] = set()
    dim = None
    for lineno, obj in _parse_lines(path):
        where = f"{path}:{lineno}"
        vid = obj.get("id")
        if not isinstance(vid, str) or not vid:
            raise StoreError(f"{where}: missing or empty 'id'")
        if vid in seen:
            raise StoreError(f"{where}: duplicate video id {vid!r}")
        rows = _numeric_matrix(obj.get("frames"), where)
        lengths = {len(r) for r in rows}
        if dim is None:
            dim = len(rows[0])
        if lengths != {dim}:
            raise StoreError(f"{where}: dimension mismatch in video {vid!r} (expected {dim})")
        try:
            videos.append(VideoRecord(vid, obj.get("source"), np.array(rows, dtype=np.float64)))
        except StoreError as exc:
            raise StoreError(f"{where}: {exc}") from None
        seen.add(vid)
    if not videos:
        raise StoreError(f"{path}: no video records")
    return Corpus.from_videos(videos)


def load_queries(path) -> list[QueryRecord]:
    path = Path(path)
    queries: list[QueryRecord] = []
    seen: set[str] = set()
    for lineno, obj in _parse_lines(path):
        qid, emb = obj.get("id"), obj.get("embedding")
        if not isinstance(qid, str) or not qid:
            raise StoreError(f"{path}:{lineno}: missing or empty 'id'")
        if qid in seen:
            raise StoreError(f"{path}:{lineno}: duplicate query id {qid!r}")
        if not isinstance(emb, list) or not emb or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in emb
        ):
            raise StoreError(f"{path}:{lineno}: 'embedding' must be a nonempty list of numbers")
        if queries and len(emb) != queries[0].dim:
            raise StoreError(f"{path}:{lineno}: dimension mismatch in query {qid!r}")
        queries.append(QueryRecord(qid, emb))
        seen.add(qid)
    if not queries:
        raise StoreError(f"{path}: no query records")
    return queries


def load_relevance(path) -> dict[str, str]:
    path = Path(path)
    rel: dict[str, str] = {}
    for lineno, obj in _parse_lines(path):
        q, v = obj.get("query_id"), obj.get("video_id")
        if not isinstance(q, str) or not isinstance(v, str) or not q or not v:
            raise StoreError(f"{path}:{lineno}: need string 'query_id' and 'video_id'")
        if q in rel:
            raise StoreError(f"{path}:{lineno}: query {q!r} has more than one relevant video")
        rel[q] = v
    if not rel:
        raise StoreError(f"{path}: no relevance pairs")
    return rel


def _dump_lines(path, objs: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, separators=(",", ":")))
            fh.write("\n")


def save_corpus(corpus: Corpus, path) -> None:
    # json writes floats with repr(), the shortest string that round-trips exactly
    _dump_lines(
        path,
        ({"id": v.id, "source": v.source, "frames": v.frames.tolist()} for v in corpus),
    )


def save_queries(queries: Iterable[QueryRecord], path) -> None:
    _dump_lines(path, ({"id": q.id, "embedding": q.embedding.tolist()} for q in queries))


def save_relevance(rel: dict[str, str], path) -> None:
    _dump_lines(path, ({"query_id": q, "video_id": v} for q, v in rel.items()))


def validate_relevance(queries: list[QueryRecord], rel: dict[str, str], *corpora: Corpus) -> None:
    """Check the relevance map is total over queries and resolvable in every corpus."""
    missing_q = [q.id for q in queries if q.id not in rel]
    if missing_q:
        raise StoreError(f"queries without a relevant video: {', '.join(missing_q[:10])}")
    for corpus in corpora:
        if corpus.dim != queries[0].dim:
            raise StoreError(f"query dimension {queries[0].dim} != corpus dimension {corpus.dim}")
        absent = sorted({rel[q.id] for q in queries} - set(corpus.ids))
        if absent:
            raise StoreError(f"relevant videos missing from corpus: {', '.join(absent[:10])}")


def join_triplets(
    real: Corpus, ai: Corpus, queries: list[QueryRecord], rel: dict[str, str]
) -> list[tuple[VideoRecord, VideoRecord, QueryRecord]]:
    """Pair each query with its real video and the AI counterpart sharing the same id."""
    unmatched = []
    for q in queries:
        vid = rel.get(q.id)
        if vid is None or vid not in real or vid not in ai:
            unmatched.append(f"{q.id}->{vid}")
    if unmatched:
        raise StoreError(f"missing counterpart for: {', '.join(unmatched)}")
    return [(real.get(rel[q.id]), ai.get(rel[q.id]), q) for q in queries]
