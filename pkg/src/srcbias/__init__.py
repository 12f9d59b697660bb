"""Measuring and correcting source bias in mixed real/AI-generated video retrieval."""

__version__ = "0.1.0"

from .metrics import DeltaReport, MetricBundle, metric_bundle, mixr, relative_delta  # noqa: E402
from .ranking import Pooling, rank_mixed, rank_relevant  # noqa: E402
from .store import Corpus, QueryRecord, VideoRecord  # noqa: E402

__all__ = [
    "Corpus",
    "DeltaReport",
    "MetricBundle",
    "Pooling",
    "QueryRecord",
    "VideoRecord",
    "metric_bundle",
    "mixr",
    "rank_mixed",
    "rank_relevant",
    "relative_delta",
]
