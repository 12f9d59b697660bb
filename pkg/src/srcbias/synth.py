"""Synthetic real/AI corpora with a planted source-bias direction.

Each item has a latent unit vector ``z``. Its query is ``normalize(z + gamma b)``;
its real frames are ``normalize(alpha z + (1 - alpha) eps + drift)`` and its AI
frames additionally carry ``beta * g_j * b`` for a corpus-wide unit direction
``b``. The per-frame weight ``g_j`` ramps up with frame position when
``temporal_bias > 0``, so part of the planted signal lives in frame order.
Per-frame noise ``eps`` has expected norm close to ``noise_sigma``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .rng import Xoshiro256
from .store import Corpus, QueryRecord, VideoRecord


@dataclass
class SynthConfig:
    n_items: int = 200
    dim: int = 32
    frames: int = 10
    alpha: float = 0.5
    beta: float = 0.5
    gamma: float = 0.2
    noise_sigma: float = 6.0
    seed: int = 42
    drift: float = 0.1
    temporal_bias: float = 0.7

    def __post_init__(self):
        if self.n_items < 1 or self.dim < 2 or self.frames < 1:
            raise ValueError("n_items, frames must be >= 1 and dim >= 2")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.beta < 0 or self.gamma < 0 or self.drift < 0:
            raise ValueError("beta, gamma and drift must be nonnegative")
        if self.noise_sigma <= 0:
            raise ValueError("noise_sigma must be positive")
        if not 0.0 <= self.temporal_bias <= 1.0:
            raise ValueError("temporal_bias must lie in [0, 1]")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SyntheticData:
    real: Corpus
    ai: Corpus
    queries: list[QueryRecord]
    rel: dict[str, str]
    bias_direction: np.ndarray


def _rows_normalized(m: np.ndarray) -> np.ndarray:
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def bias_profile(f: int, temporal_bias: float) -> np.ndarray:
    """Per-frame weight of the planted direction.

    A constant part ``1 - temporal_bias`` plus a zero-mean linear ramp scaled so
    that positional-ramp pooling of the ordered frames recovers a total weight
    of exactly 1. Uniform-mean pooling (or a shuffled order) only sees the
    constant part.
    """
    if f == 1:
        return np.ones(1)
    centered = 2.0 * np.arange(f) / (f - 1) - 1.0
    # sum_j ramp_weight_j * centered_j == 1/3 for every f > 1
    return (1.0 - temporal_bias) + 3.0 * temporal_bias * centered


def _frames(cfg: SynthConfig, rng: Xoshiro256, z: np.ndarray, drift: float, bias: np.ndarray | None):
    f, d = cfg.frames, cfg.dim
    u = rng.unit_vector(d)
    eps = rng.normals((f, d)) * (cfg.noise_sigma / np.sqrt(d))
    pos = (np.arange(f) / f)[:, None]
    frames = cfg.alpha * z[None, :] + (1.0 - cfg.alpha) * eps + drift * pos * u[None, :]
    if bias is not None:
        frames = frames + bias
    return _rows_normalized(frames)


def generate_synthetic(cfg: SynthConfig) -> SyntheticData:
    d = cfg.dim
    b = Xoshiro256.from_path(cfg.seed, "synth", "bias-direction").unit_vector(d)
    latent_rng = Xoshiro256.from_path(cfg.seed, "synth", "latent")
    latents = [latent_rng.unit_vector(d) for _ in range(cfg.n_items)]
    width = len(str(cfg.n_items - 1))
    ids = [f"v{i:0{width}d}" for i in range(cfg.n_items)]
    qids = [f"q{i:0{width}d}" for i in range(cfg.n_items)]

    queries = []
    for qid, z in zip(qids, latents):
        q = z + cfg.gamma * b
        queries.append(QueryRecord(qid, q / np.linalg.norm(q)))

    planted = cfg.beta * bias_profile(cfg.frames, cfg.temporal_bias)[:, None] * b[None, :]
    corpora = {}
    for source, drift, bias in (("real", cfg.drift, None), ("ai", cfg.drift / 4.0, planted)):
        rng = Xoshiro256.from_path(cfg.seed, "synth", "frames", source)
        corpora[source] = Corpus(
            [VideoRecord(vid, source, _frames(cfg, rng, z, drift, bias)) for vid, z in zip(ids, latents)],
            d,
            cfg.frames,
        )
    return SyntheticData(corpora["real"], corpora["ai"], queries, dict(zip(qids, ids)), b)


def synthetic_flows(
    n_pairs: int, spread_ratio: float = 4.0, shape=(16, 16), seed: int = 0, base: float = 1.0
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Paired flow-magnitude grids: ``base + spread * |N(0,1)|``.

    Real grids use ``spread_ratio`` times the AI spread, so their histograms on
    ``[0, max]`` occupy more bins.
    """
    rng = Xoshiro256.from_path(seed, "synth", "flow")
    real, ai = [], []
    for _ in range(n_pairs):
        real.append(base + 0.25 * spread_ratio * np.abs(rng.normals(shape)))
        ai.append(base + 0.25 * np.abs(rng.normals(shape)))
    return real, ai
