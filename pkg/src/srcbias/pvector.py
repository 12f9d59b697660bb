"""Per-video debiasing shifts ``p = h_debiased - h_original`` and what they do.

The shift vectors come from two scorer parameter sets applied to the same
pooled corpus. Their mean ``p_avg`` can be added to other embeddings and the
bias re-measured; ``cluster_stats`` and ``pca_project_2d`` describe how tightly
the shifts group compared with the embeddings themselves.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .metrics import DEFAULT_KS, BiasEvaluation, shift_delta_report
from .pipeline import evaluate_pooled, project
from .ranking import DegenerateEmbedding, PooledEmbedding, Pooling, pool_corpus, shuffle_corpus
from .rng import Xoshiro256, derive_seed
from .store import Corpus, QueryRecord
from .trainer import ScorerParams

__all__ = [
    "PVectorSet",
    "ClusterStats",
    "ShiftResult",
    "Projection2D",
    "extract_p",
    "extract_p_random",
    "apply_shift",
    "shift_delta_report",
    "cluster_stats",
    "pca_project_2d",
    "p_debias",
    "rank_improved_fraction",
    "write_pvectors",
    "read_pvectors",
]

VARIANTS = ("standard", "random")
SPACES = ("projected", "raw")


@dataclass
class PVectorSet:
    ids: list[str]
    p: np.ndarray
    p_avg: np.ndarray = field(default=None)
    variant: str = "standard"

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.p.ndim != 2 or self.p.shape[0] != len(self.ids):
            raise ValueError(f"need one p vector per id (got {self.p.shape} for {len(self.ids)} ids)")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        mean = self.p.mean(axis=0)
        if self.p_avg is None:
            self.p_avg = mean
        else:
            self.p_avg = np.asarray(self.p_avg, dtype=np.float64)
            if self.p_avg.shape != mean.shape:
                raise ValueError("p_avg dimension differs from the p vectors")

    @property
    def dim(self) -> int:
        return self.p.shape[1]

    def __len__(self) -> int:
        return len(self.ids)


def _transform(w: np.ndarray, v: np.ndarray, normalized: bool) -> np.ndarray:
    u = v @ w.T
    if not normalized:
        return u
    n = np.linalg.norm(u, axis=1, keepdims=True)
    if np.any(n == 0.0):
        raise DegenerateEmbedding("scorer maps a pooled embedding to zero")
    return u / n


def extract_p(
    original: ScorerParams,
    debiased: ScorerParams,
    corpus: Corpus | Sequence[PooledEmbedding],
    pooling: Pooling | str = "positional-ramp",
    frames: int | None = None,
    space: str = "projected",
    variant: str = "standard",
) -> PVectorSet:
    """Shift of each video's embedding between the original and the debiased scorer.

    ``space="projected"`` compares unit-normalized projections; ``"raw"``
    compares the projections before normalization.
    """
    if space not in SPACES:
        raise ValueError(f"space must be one of {SPACES}, got {space!r}")
    if original.dim != debiased.dim:
        raise ValueError(f"scorer dimensions differ: {original.dim} vs {debiased.dim}")
    pooled = pool_corpus(corpus, pooling, frames) if isinstance(corpus, Corpus) else list(corpus)
    if not pooled:
        raise ValueError("no videos to extract shifts from")
    v = np.array([e.vector for e in pooled])
    if v.shape[1] != original.dim:
        raise ValueError(f"embedding dimension {v.shape[1]} does not match scorer dimension {original.dim}")
    normalized = space == "projected"
    if original.w is debiased.w or np.array_equal(original.w, debiased.w):
        p = np.zeros_like(v)
    else:
        p = _transform(debiased.w, v, normalized) - _transform(original.w, v, normalized)
    return PVectorSet([e.video_id for e in pooled], p, variant=variant)


def extract_p_random(
    original: ScorerParams,
    debiased: ScorerParams,
    corpus: Corpus,
    seed: int,
    pooling: Pooling | str = "positional-ramp",
    frames: int | None = None,
    space: str = "projected",
) -> PVectorSet:
    """Same as ``extract_p`` but over a copy of ``corpus`` with shuffled frame order."""
    shuffled = shuffle_corpus(corpus, "random", derive_seed(seed, "pvector", "random"))
    return extract_p(original, debiased, shuffled, pooling, frames, space, variant="random")


def apply_shift(embeddings: Sequence[PooledEmbedding], p_avg: np.ndarray) -> list[PooledEmbedding]:
    p_avg = np.asarray(p_avg, dtype=np.float64)
    out = []
    for e in embeddings:
        if e.vector.shape != p_avg.shape:
            raise ValueError(f"shift dimension {p_avg.shape} does not match video {e.video_id!r}")
        v = e.vector + p_avg
        n = np.linalg.norm(v)
        if n == 0.0 or not np.isfinite(n):
            raise DegenerateEmbedding(f"shifted embedding of {e.video_id!r} is zero")
        out.append(PooledEmbedding(e.video_id, e.source, v / n))
    return out


@dataclass
class ClusterStats:
    mean_pairwise_cos_p: float
    mean_pairwise_cos_h: float
    silhouette: float


def _cos_matrix(x: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(x, axis=1)
    safe = np.where(n == 0.0, 1.0, n)
    u = x / safe[:, None]
    c = np.clip(u @ u.T, -1.0, 1.0)
    # zero vectors have no direction; count them as orthogonal to everything
    c[n == 0.0, :] = 0.0
    c[:, n == 0.0] = 0.0
    return c


def _mean_pairwise(c: np.ndarray) -> float:
    n = c.shape[0]
    iu = np.triu_indices(n, k=1)
    return float(np.clip(c[iu].mean(), -1.0, 1.0))


def _silhouette(c: np.ndarray, labels: np.ndarray) -> float:
    dist = 1.0 - c
    scores = np.empty(len(labels))
    for i in range(len(labels)):
        own = labels == labels[i]
        own_count = own.sum() - 1
        a = (dist[i, own].sum() - dist[i, i]) / own_count
        b = dist[i, ~own].mean()
        m = max(a, b)
        scores[i] = 0.0 if m == 0.0 else (b - a) / m
    return float(np.clip(scores.mean(), -1.0, 1.0))


def cluster_stats(p_set: PVectorSet, raw: Sequence[PooledEmbedding]) -> ClusterStats:
    """Within-group mean pairwise cosine and a two-group cosine silhouette."""
    h = np.array([e.vector for e in raw]) if raw else np.empty((0, p_set.dim))
    if len(p_set) < 2 or len(h) < 2:
        raise ValueError("cluster statistics need at least two vectors per group")
    if h.shape[1] != p_set.dim:
        raise ValueError("p vectors and embeddings have different dimensions")
    both = np.vstack([p_set.p, h])
    labels = np.array([0] * len(p_set) + [1] * len(h))
    c = _cos_matrix(both)
    n_p = len(p_set)
    return ClusterStats(
        _mean_pairwise(c[:n_p, :n_p]),
        _mean_pairwise(c[n_p:, n_p:]),
        _silhouette(c, labels),
    )


@dataclass
class Projection2D:
    points: list[tuple[float, float, str]]
    components: np.ndarray
    variances: tuple[float, float]
    warnings: list[str] = field(default_factory=list)

    @property
    def rank_deficient(self) -> bool:
        return bool(self.warnings)


def _top_eigvec(cov: np.ndarray, start: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float]:
    v = start / np.linalg.norm(start)
    for _ in range(max_iter):
        w = cov @ v
        n = np.linalg.norm(w)
        if n == 0.0:
            return v, 0.0
        w /= n
        if w @ v < 0:
            w = -w
        if np.linalg.norm(w - v) < tol:
            v = w
            break
        v = w
    return v, float(v @ cov @ v)


def pca_project_2d(
    vectors,
    labels: Sequence[str],
    tol: float = 1e-10,
    max_iter: int = 1000,
    seed: int = 0,
) -> Projection2D:
    """Project onto the top two principal axes (power iteration with deflation).

    A component whose variance is negligible is zeroed and reported in
    ``warnings``; each axis is sign-fixed so its largest-magnitude loading is
    positive.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise ValueError("PCA projection needs at least three vectors")
    if len(labels) != x.shape[0]:
        raise ValueError("need one label per vector")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    scale = max(float(np.trace(cov)), 1.0)
    rng = Xoshiro256.from_path(seed, "pca")
    comps, variances, notes = [], [], []
    for axis in range(2):
        v, lam = _top_eigvec(cov, rng.normals(x.shape[1]), tol, max_iter)
        if lam <= 1e-12 * scale:
            notes.append(f"component {axis + 1} has zero variance; set to 0")
            comps.append(np.zeros(x.shape[1]))
            variances.append(0.0)
            continue
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        comps.append(v)
        variances.append(lam)
        cov = cov - lam * np.outer(v, v)
    for note in notes:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    comp = np.array(comps)
    xy = centered @ comp.T
    points = [(float(a), float(b), str(lbl)) for (a, b), lbl in zip(xy, labels)]
    return Projection2D(points, comp, (variances[0], variances[1]), notes)


@dataclass
class ShiftResult:
    before: BiasEvaluation
    after: BiasEvaluation
    delta: dict[str, float]
    target: str


def p_debias(
    params: ScorerParams,
    p_avg: np.ndarray,
    real: Corpus,
    ai: Corpus,
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    seed: int,
    pooling: Pooling | str = "positional-ramp",
    frames: int | None = None,
    target: str = "real",
    sign: float = 1.0,
    ks=DEFAULT_KS,
    n_seeds: int = 1,
) -> ShiftResult:
    """Re-measure bias after adding ``sign * p_avg`` to one side's embeddings.

    Both sides are embedded with ``params`` (the original scorer); only the
    ``target`` side is shifted. The delta is after minus before, per metric.
    """
    if target not in ("real", "ai"):
        raise ValueError("target must be 'real' or 'ai'")
    real_p = project(pool_corpus(real, pooling, frames), params.w)
    ai_p = project(pool_corpus(ai, pooling, frames), params.w)
    before = evaluate_pooled(real_p, ai_p, queries, rel, seed, ks, n_seeds)
    shift = sign * np.asarray(p_avg, dtype=np.float64)
    if target == "real":
        real_p = apply_shift(real_p, shift)
    else:
        ai_p = apply_shift(ai_p, shift)
    after = evaluate_pooled(real_p, ai_p, queries, rel, seed, ks, n_seeds)
    return ShiftResult(before, after, shift_delta_report(before.report, after.report), target)


def rank_improved_fraction(result: ShiftResult) -> float:
    """Share of queries whose mixed rank on the shifted side did not get worse."""
    key = "mixed-REAL" if result.target == "real" else "mixed-AI"
    before = result.before.tables[key].ranks
    after = result.after.tables[key].ranks
    return sum(after[q] <= before[q] for q in before) / len(before)


def write_pvectors(path, p_set: PVectorSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for vid, row in zip(p_set.ids, p_set.p):
            fh.write(json.dumps({"id": vid, "p": row.tolist()}, separators=(",", ":")) + "\n")
        fh.write(
            json.dumps({"p_avg": p_set.p_avg.tolist(), "variant": p_set.variant}, separators=(",", ":"))
            + "\n"
        )


def read_pvectors(path) -> PVectorSet:
    ids, rows, p_avg, variant = [], [], None, "standard"
    with open(path, encoding="utf-8") as fh:
        lines: Iterable[str] = fh
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if "p_avg" in obj:
                p_avg = obj["p_avg"]
                variant = obj.get("variant", "standard")
            elif "id" in obj and "p" in obj:
                ids.append(str(obj["id"]))
                rows.append(obj["p"])
            else:
                raise ValueError(f"{path}:{lineno}: expected an id/p record or a p_avg record")
    if not ids:
        raise ValueError(f"{path}: no p vectors")
    p_set = PVectorSet(ids, np.array(rows, dtype=np.float64), variant=variant)
    if p_avg is not None:
        p_set.p_avg = np.asarray(p_avg, dtype=np.float64)
    return p_set
