"""Retrieval metric bundles and the source-bias deltas built on them.

A delta is signed so that negative values mean AI-generated items are favoured:
``2 s (M_real - M_ai) / (M_real + M_ai) * 100`` with ``s = +1`` for recall
metrics and ``s = -1`` for rank metrics (lower is better).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .ranking import RankTable
from .rng import Xoshiro256, derive_seed

DEFAULT_KS = (1, 5, 10)
MIXR_PARTS = ("R@1", "MedR", "MeanR")


def metric_names(ks=DEFAULT_KS) -> list[str]:
    return [f"R@{k}" for k in ks] + ["MedR", "MeanR"]


def metric_sign(name: str) -> int:
    return 1 if name.startswith("R@") else -1


@dataclass
class MetricBundle:
    r_at: dict[int, float]
    med_r: float
    mean_r: float

    def as_dict(self) -> dict[str, float]:
        out = {f"R@{k}": v for k, v in sorted(self.r_at.items())}
        out["MedR"] = self.med_r
        out["MeanR"] = self.mean_r
        return out


def metric_bundle(ranks: RankTable | np.ndarray | list, ks=DEFAULT_KS) -> MetricBundle:
    """R@k as a percentage, midpoint MedR, and MeanR over a rank table."""
    values = ranks.values() if isinstance(ranks, RankTable) else np.asarray(ranks)
    if values.size == 0:
        raise ValueError("cannot compute metrics of an empty rank table")
    n = values.size
    r_at = {k: 100.0 * int(np.count_nonzero(values <= k)) / n for k in ks}
    ordered = np.sort(values)
    mid = n // 2
    med = float(ordered[mid]) if n % 2 else (float(ordered[mid - 1]) + float(ordered[mid])) / 2.0
    return MetricBundle(r_at, med, float(values.sum()) / n)


def relative_formula(m_real: float, m_ai: float, sign: int) -> float:
    denom = m_real + m_ai
    if denom == 0:
        return 0.0
    return 2.0 * sign * (m_real - m_ai) / denom * 100.0


def relative_delta(real: MetricBundle | dict, ai: MetricBundle | dict) -> dict[str, float]:
    """Per-metric relative gap between the real and the AI side of a comparison."""
    real_d = real.as_dict() if isinstance(real, MetricBundle) else real
    ai_d = ai.as_dict() if isinstance(ai, MetricBundle) else ai
    return {m: relative_formula(real_d[m], ai_d[m], metric_sign(m)) for m in real_d if m in ai_d}


def simulate_interleaved(
    real_ranks: RankTable, ai_ranks: RankTable, seed: int
) -> tuple[RankTable, RankTable]:
    """Merge two standalone rankings as if the corpora alternated.

    One fair coin ``c`` per query, drawn in sorted query-id order, decides which
    source takes the odd slot: mixed-real = 2r - c, mixed-AI = 2a - (1 - c).
    """
    if real_ranks.ranks.keys() != ai_ranks.ranks.keys():
        raise ValueError("interleaving needs rank tables over the same query set")
    rng = Xoshiro256(seed)
    mixed_real, mixed_ai = {}, {}
    for qid in sorted(real_ranks.ranks):
        c = rng.bit()
        mixed_real[qid] = 2 * real_ranks.ranks[qid] - c
        mixed_ai[qid] = 2 * ai_ranks.ranks[qid] - (1 - c)
    size = real_ranks.corpus_size + ai_ranks.corpus_size
    # restore the caller's query order
    order = list(real_ranks.ranks)
    return (
        RankTable({q: mixed_real[q] for q in order}, size),
        RankTable({q: mixed_ai[q] for q in order}, size),
    )


def location_delta(
    real_ranks: RankTable, ai_ranks: RankTable, seed: int, ks=DEFAULT_KS, n_seeds: int = 1
) -> dict[str, float]:
    """Relative delta of the simulated interleaving; averaged over ``n_seeds`` draws.

    With ``n_seeds == 1`` the draw uses ``seed`` itself; otherwise draw ``i``
    uses ``derive_seed(seed, "interleave", i)``.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    seeds = [seed] if n_seeds == 1 else [derive_seed(seed, "interleave", i) for i in range(n_seeds)]
    total: dict[str, float] = {}
    for s in seeds:
        mr, ma = simulate_interleaved(real_ranks, ai_ranks, s)
        d = relative_delta(metric_bundle(mr, ks), metric_bundle(ma, ks))
        for m, v in d.items():
            total[m] = total.get(m, 0.0) + v
    return {m: v / len(seeds) for m, v in total.items()}


def normalized_delta(relative: dict[str, float], location: dict[str, float]) -> dict[str, float]:
    if relative.keys() != location.keys():
        raise ValueError("relative and location deltas cover different metrics")
    return {m: relative[m] - location[m] for m in relative}


def mixr(deltas: dict[str, float]) -> float:
    missing = [m for m in MIXR_PARTS if m not in deltas]
    if missing:
        raise KeyError(f"MixR needs {', '.join(missing)}")
    return (deltas["R@1"] + deltas["MedR"] + deltas["MeanR"]) / 3.0


@dataclass
class DeltaReport:
    relative: dict[str, float]
    location: dict[str, float]
    normalized: dict[str, float] = field(default=None)
    mixr: dict[str, float] = field(default=None)

    def __post_init__(self):
        if self.normalized is None:
            self.normalized = normalized_delta(self.relative, self.location)
        if self.mixr is None:
            self.mixr = {
                "relative": mixr(self.relative),
                "location": mixr(self.location),
                "normalized": mixr(self.normalized),
            }

    @property
    def metrics(self) -> list[str]:
        return list(self.relative)

    def to_json(self) -> str:
        return json.dumps(
            {
                "relative": self.relative,
                "location": self.location,
                "normalized": self.normalized,
                "mixr": self.mixr,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "DeltaReport":
        obj = json.loads(text)
        return cls(obj["relative"], obj["location"], obj["normalized"], obj["mixr"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "relative", "location", "normalized"])
        for m in self.metrics:
            w.writerow([m, repr(self.relative[m]), repr(self.location[m]), repr(self.normalized[m])])
        w.writerow(["MixR", repr(self.mixr["relative"]), repr(self.mixr["location"]), repr(self.mixr["normalized"])])
        return buf.getvalue()


@dataclass
class BiasEvaluation:
    """Everything computed from one real/AI/mixed ranking experiment."""

    bundles: dict[str, MetricBundle]
    report: DeltaReport
    tables: dict[str, RankTable]


def evaluate_bias(
    real: RankTable,
    ai: RankTable,
    mixed_real: RankTable,
    mixed_ai: RankTable,
    seed: int,
    ks=DEFAULT_KS,
    n_seeds: int = 1,
) -> BiasEvaluation:
    bundles = {
        "REAL": metric_bundle(real, ks),
        "AI": metric_bundle(ai, ks),
        "mixed-REAL": metric_bundle(mixed_real, ks),
        "mixed-AI": metric_bundle(mixed_ai, ks),
    }
    rel = relative_delta(bundles["mixed-REAL"], bundles["mixed-AI"])
    loc = location_delta(real, ai, seed, ks, n_seeds)
    tables = {"REAL": real, "AI": ai, "mixed-REAL": mixed_real, "mixed-AI": mixed_ai}
    return BiasEvaluation(bundles, DeltaReport(rel, loc), tables)


def bundles_csv(bundles: dict[str, MetricBundle]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = list(next(iter(bundles.values())).as_dict())
    w.writerow(["corpus", *names])
    for label, b in bundles.items():
        d = b.as_dict()
        w.writerow([label, *(repr(d[m]) for m in names)])
    return buf.getvalue()


def shift_delta_report(before: DeltaReport, after: DeltaReport) -> dict[str, float]:
    """Change in Normalized delta (per metric and MixR) caused by an embedding shift."""
    out = {m: after.normalized[m] - before.normalized[m] for m in before.normalized}
    out["MixR"] = after.mixr["normalized"] - before.mixr["normalized"]
    return out
