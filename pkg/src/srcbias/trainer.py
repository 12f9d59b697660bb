"""Linear retrieval scorer trained with InfoNCE plus a hinged real-vs-AI penalty.

The scorer projects a pooled video embedding ``v`` with a matrix ``W`` and
scores it against a normalized query ``t`` as ``cos(W v, t) / tau``. Training
minimizes

    J = InfoNCE(batch) + lambda * mean_i max(0, score(ai_i, t_i) - score(real_i, t_i))

with hand-derived gradients and Adam.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .metrics import DEFAULT_KS
from .pipeline import evaluate_pooled, project
from .ranking import PooledEmbedding, Pooling, pool_corpus
from .rng import Xoshiro256, derive_seed
from .store import Corpus, QueryRecord, join_triplets

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class ScorerParams:
    w: np.ndarray
    tau: float = 0.05

    def __post_init__(self):
        self.w = np.array(self.w, dtype=np.float64)
        if self.w.ndim != 2 or self.w.shape[0] != self.w.shape[1]:
            raise ValueError(f"W must be square, got shape {self.w.shape}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not np.all(np.isfinite(self.w)):
            raise ValueError("W has non-finite entries")

    @classmethod
    def identity(cls, dim: int, tau: float = 0.05) -> "ScorerParams":
        return cls(np.eye(dim), tau)

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def to_json(self) -> str:
        return json.dumps({"w": self.w.tolist(), "tau": self.tau})

    @classmethod
    def from_json(cls, text: str) -> "ScorerParams":
        obj = json.loads(text)
        return cls(np.array(obj["w"], dtype=np.float64), float(obj["tau"]))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def _project_rows(w: np.ndarray, v: np.ndarray):
    u = v @ w.T
    n = np.linalg.norm(u, axis=1)
    if np.any(n == 0.0):
        raise ValueError("degenerate projection: W maps a video embedding to zero")
    return u / n[:, None], n


def score(params: ScorerParams, video: PooledEmbedding | np.ndarray, query: QueryRecord | np.ndarray) -> float:
    v = video.vector if isinstance(video, PooledEmbedding) else np.asarray(video, dtype=np.float64)
    t = query.embedding if isinstance(query, QueryRecord) else np.asarray(query, dtype=np.float64)
    if v.shape != (params.dim,) or t.shape != (params.dim,):
        raise ValueError("dimension mismatch between scorer, video and query")
    u = params.w @ v
    n = np.linalg.norm(u)
    if n == 0.0:
        raise ValueError("degenerate projection: W v = 0")
    return float(np.dot(u / n, t / np.linalg.norm(t))) / params.tau


def _cos_grad(w_shape, v, u_hat, n, t, coef):
    """Sum over i of coef_i * d cos(W v_i, t_i) / dW, with t matched row by row."""
    c = np.einsum("ij,ij->i", u_hat, t)
    g = (t - c[:, None] * u_hat) * (coef / n)[:, None]
    return g.T @ v


def _logsumexp(x: np.ndarray, axis: int) -> np.ndarray:
    m = x.max(axis=axis, keepdims=True)
    return (m + np.log(np.exp(x - m).sum(axis=axis, keepdims=True))).squeeze(axis)


def base_loss(params: ScorerParams, videos: np.ndarray, queries: np.ndarray, grad: bool = False):
    """Symmetric in-batch InfoNCE over positive pairs ``(videos[i], queries[i])``.

    Returns the loss, or ``(loss, dJ/dW)`` when ``grad`` is true.
    """
    videos = np.asarray(videos, dtype=np.float64)
    t = _unit_rows(np.asarray(queries, dtype=np.float64))
    b = len(videos)
    if b < 2:
        raise ValueError("InfoNCE needs a batch of at least two pairs")
    u_hat, n = _project_rows(params.w, videos)
    cos = u_hat @ t.T
    s = cos / params.tau
    diag = np.diag(s)
    l_v2t = float(np.mean(_logsumexp(s, axis=1) - diag))
    l_t2v = float(np.mean(_logsumexp(s, axis=0) - diag))
    loss = 0.5 * (l_v2t + l_t2v)
    if not grad:
        return loss
    p_row = np.exp(s - _logsumexp(s, axis=1)[:, None])
    p_col = np.exp(s - _logsumexp(s, axis=0)[None, :])
    eye = np.eye(b)
    d_cos = 0.5 * ((p_row - eye) + (p_col - eye)) / (b * params.tau)
    # d cos_ij / d u_i = (t_j - cos_ij u_hat_i) / n_i
    g = (d_cos @ t - (d_cos * cos).sum(axis=1)[:, None] * u_hat) / n[:, None]
    return loss, g.T @ videos


def delta_r(params: ScorerParams, real: np.ndarray, ai: np.ndarray, query: np.ndarray) -> float:
    """score(ai, query) - score(real, query) for one triplet."""
    return score(params, ai, query) - score(params, real, query)


def _hinge(params: ScorerParams, real: np.ndarray, ai: np.ndarray, queries: np.ndarray, grad: bool):
    t = _unit_rows(queries)
    ur, nr = _project_rows(params.w, real)
    ug, ng = _project_rows(params.w, ai)
    dr = (np.einsum("ij,ij->i", ug, t) - np.einsum("ij,ij->i", ur, t)) / params.tau
    active = dr > 0
    value = float(np.where(active, dr, 0.0).mean())
    if not grad:
        return value, dr
    coef = active / (len(dr) * params.tau)
    g = _cos_grad(params.w.shape, ai, ug, ng, t, coef) - _cos_grad(params.w.shape, real, ur, nr, t, coef)
    return value, dr, g


def debias_objective(
    params: ScorerParams,
    videos: np.ndarray,
    queries: np.ndarray,
    triplets: tuple[np.ndarray, np.ndarray, np.ndarray],
    lam: float = 1.0,
    grad: bool = False,
):
    """``base_loss + lam * mean(max(0, delta_r))`` over the given triplets ``(real, ai, query)``."""
    real, ai, tq = (np.asarray(x, dtype=np.float64) for x in triplets)
    if grad:
        base, g_base = base_loss(params, videos, queries, grad=True)
        if lam == 0:
            return base, g_base
        hinge, _, g_hinge = _hinge(params, real, ai, tq, grad=True)
        return base + lam * hinge, g_base + lam * g_hinge
    base = base_loss(params, videos, queries)
    if lam == 0:
        return base
    return base + lam * _hinge(params, real, ai, tq, grad=False)[0]


def mix_training_set(real: Corpus, ai: Corpus, rho: float, seed: int) -> Corpus:
    """Swap ``floor(rho * N)`` seeded-random real videos for their AI counterparts."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    missing = [vid for vid in real.ids if vid not in ai]
    if missing:
        raise ValueError(f"no AI counterpart for: {', '.join(missing[:10])}")
    n = len(real)
    k = math.floor(rho * n)
    chosen = set(Xoshiro256(seed).sample(n, k))
    return Corpus(
        [ai.get(v.id) if i in chosen else v for i, v in enumerate(real.videos)],
        real.dim,
        real.frame_count if real.frame_count == ai.frame_count else None,
    )


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 32
    seed: int = 42
    mix_ratio: float = 0.0
    debias_weight: float = 1.0
    pooling: str = "positional-ramp"
    frames: int | None = None
    tau: float = 0.05
    holdout: float = 0.2
    eval_seeds: int = 1
    ks: tuple = DEFAULT_KS

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.epochs < 0 or self.batch_size < 2:
            raise ValueError("epochs must be >= 0 and batch_size >= 2")
        if not 0.0 <= self.mix_ratio <= 1.0:
            raise ValueError("mix_ratio must lie in [0, 1]")
        if self.debias_weight < 0:
            raise ValueError("debias_weight must be nonnegative")
        if not 0.0 < self.holdout < 1.0:
            raise ValueError("holdout must lie in (0, 1)")
        Pooling.parse(self.pooling)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ks"] = list(self.ks)
        return d


@dataclass
class TrainHistory:
    base_loss: list[float] = field(default_factory=list)
    debias_loss: list[float] = field(default_factory=list)
    normalized_delta_r1: list[float] = field(default_factory=list)
    initial_normalized_delta_r1: float = float("nan")
    initial_objective: float = float("nan")
    final_objective: float = float("nan")

    def __len__(self) -> int:
        return len(self.base_loss)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "base_loss", "debias_loss", "normalized_delta_r1"])
        for i, row in enumerate(zip(self.base_loss, self.debias_loss, self.normalized_delta_r1), 1):
            w.writerow([i, *map(repr, row)])
        return buf.getvalue()


@dataclass
class TrainingData:
    """Pooled arrays for one training run, split into train and held-out parts."""

    train_videos: np.ndarray
    train_real: np.ndarray
    train_ai: np.ndarray
    train_queries: np.ndarray
    test_real: list[PooledEmbedding]
    test_ai: list[PooledEmbedding]
    test_queries: list[QueryRecord]
    rel: dict[str, str]


def split_queries(n: int, holdout: float, seed: int) -> tuple[list[int], list[int]]:
    """Seeded train/held-out split of query positions (both returned sorted)."""
    order = Xoshiro256.from_path(seed, "train", "split").permutation(n)
    n_test = max(1, math.ceil(holdout * n))
    if n - n_test < 2:
        raise ValueError("too few queries left for training")
    return sorted(order[n_test:]), sorted(order[:n_test])


def prepare_training(
    config: TrainConfig, real: Corpus, ai: Corpus, queries: Sequence[QueryRecord], rel: dict[str, str]
) -> TrainingData:
    triplets = join_triplets(real, ai, list(queries), rel)
    train_idx, test_idx = split_queries(len(triplets), config.holdout, config.seed)
    pooling = Pooling.parse(config.pooling)

    real_tr = Corpus([triplets[i][0] for i in train_idx], real.dim)
    ai_tr = Corpus([triplets[i][1] for i in train_idx], ai.dim)
    mixed = mix_training_set(real_tr, ai_tr, config.mix_ratio, derive_seed(config.seed, "train", "mix"))

    def vecs(corpus):
        return np.array([p.vector for p in pool_corpus(corpus, pooling, config.frames)])

    real_te = Corpus([triplets[i][0] for i in test_idx], real.dim)
    ai_te = Corpus([triplets[i][1] for i in test_idx], ai.dim)
    test_q = [triplets[i][2] for i in test_idx]
    return TrainingData(
        train_videos=vecs(mixed),
        train_real=vecs(real_tr),
        train_ai=vecs(ai_tr),
        train_queries=_unit_rows(np.array([triplets[i][2].embedding for i in train_idx])),
        test_real=pool_corpus(real_te, pooling, config.frames),
        test_ai=pool_corpus(ai_te, pooling, config.frames),
        test_queries=test_q,
        rel={q.id: rel[q.id] for q in test_q},
    )


def heldout_normalized_delta(params: ScorerParams, data: TrainingData, config: TrainConfig) -> dict:
    ev = evaluate_pooled(
        project(data.test_real, params.w),
        project(data.test_ai, params.w),
        data.test_queries,
        data.rel,
        derive_seed(config.seed, "train", "eval"),
        config.ks,
        config.eval_seeds,
    )
    return ev.report.normalized


def full_objective(params: ScorerParams, data: TrainingData, config: TrainConfig) -> float:
    return debias_objective(
        params,
        data.train_videos,
        data.train_queries,
        (data.train_real, data.train_ai, data.train_queries),
        config.debias_weight,
    )


class Adam:
    def __init__(self, shape, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def step(self, param: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def train(
    config: TrainConfig,
    real: Corpus,
    ai: Corpus,
    queries: Sequence[QueryRecord],
    rel: dict[str, str],
    data: TrainingData | None = None,
) -> tuple[ScorerParams, TrainHistory]:
    """Fit the scorer from ``W = I``; history is evaluated on a held-out query split."""
    if data is None:
        data = prepare_training(config, real, ai, queries, rel)
    params = ScorerParams.identity(real.dim, config.tau)
    history = TrainHistory()
    history.initial_normalized_delta_r1 = heldout_normalized_delta(params, data, config)["R@1"]
    history.initial_objective = full_objective(params, data, config)

    rng = Xoshiro256.from_path(config.seed, "train", "batches")
    opt = Adam(params.w.shape, config.learning_rate)
    n = len(data.train_videos)
    lam = config.debias_weight
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        base_sum = hinge_sum = 0.0
        batches = 0
        for bi, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            if len(idx) < 2:
                continue
            base, g = base_loss(params, data.train_videos[idx], data.train_queries[idx], grad=True)
            hinge, _, g_h = _hinge(
                params, data.train_real[idx], data.train_ai[idx], data.train_queries[idx], grad=True
            )
            if not (math.isfinite(base) and math.isfinite(hinge)):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {bi}: base={base}, debias={hinge}"
                )
            w_new = opt.step(params.w, g + lam * g_h)
            if not np.all(np.isfinite(w_new)):
                raise TrainingDiverged(f"non-finite weights after epoch {epoch}, batch {bi}")
            params.w = w_new
            base_sum += base
            hinge_sum += hinge
            batches += 1
        history.base_loss.append(base_sum / max(batches, 1))
        history.debias_loss.append(hinge_sum / max(batches, 1))
        history.normalized_delta_r1.append(heldout_normalized_delta(params, data, config)["R@1"])
        log.debug(
            "epoch %d base %.4f debias %.4f nd@1 %.2f",
            epoch,
            history.base_loss[-1],
            history.debias_loss[-1],
            history.normalized_delta_r1[-1],
        )
    history.final_objective = full_objective(params, data, config)
    return params, history
