import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from srcbias.store import Corpus, QueryRecord, VideoRecord
from srcbias.synth import SynthConfig, generate_synthetic

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def synth200():
    return generate_synthetic(SynthConfig(seed=42))


def make_corpus(rows_by_id, source="real"):
    return Corpus.from_videos(VideoRecord(vid, source, np.asarray(f, dtype=float)) for vid, f in rows_by_id.items())


def make_queries(vectors):
    return [QueryRecord(qid, np.asarray(v, dtype=float)) for qid, v in vectors.items()]


ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(label, ok, detail=""):
        ACCEPTANCE[label] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: (int(s.split()[0].rstrip("abcdefghijklmnopqrstuvwxyz")), s)):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
