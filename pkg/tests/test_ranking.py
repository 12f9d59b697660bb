import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from srcbias.ranking import (
    DegenerateEmbedding,
    PooledEmbedding,
    Pooling,
    pool,
    pool_corpus,
    rank_mixed,
    rank_relevant,
    ramp_weights,
    sample_frames,
    sample_indices,
    shuffle_corpus,
    shuffle_frames,
)
from srcbias.rng import Xoshiro256
from srcbias.store import QueryRecord, StoreError, VideoRecord

from conftest import make_corpus


def _video(frames, vid="v", source="real"):
    return VideoRecord(vid, source, np.asarray(frames, dtype=float))


def test_sample_indices_examples():
    assert sample_indices(10, 10) == list(range(10))
    assert sample_indices(9, 3) == [0, 4, 8]
    assert sample_indices(1, 3) == [0, 0, 0]
    assert sample_indices(7, 1) == [3]
    v = _video([[1.0, 2.0]])
    assert np.array_equal(sample_frames(v, 3).frames, np.array([[1.0, 2.0]] * 3))


def test_pool_examples():
    v = _video([[1.0, 0.0], [0.0, 1.0]])
    assert np.allclose(pool(v, "uniform-mean").vector, [2**-0.5, 2**-0.5], atol=1e-15)
    ramp = pool(v, "positional-ramp").vector
    assert np.allclose(ramp, np.array([1.0, 2.0]) / np.sqrt(5.0), atol=1e-15)
    assert np.round(ramp, 4).tolist() == [0.4472, 0.8944]
    assert np.allclose(pool(v, "single-frame:0").vector, [1.0, 0.0])


def test_ramp_weights_sum_to_one():
    for f in range(1, 30):
        w = ramp_weights(f)
        assert abs(w.sum() - 1.0) < 1e-12
        assert np.all(np.diff(w) > 0)


def test_pooling_parse_and_errors():
    assert Pooling.parse("single-frame:3") == Pooling("single-frame", 3)
    assert str(Pooling.parse("single-frame:3")) == "single-frame:3"
    with pytest.raises(ValueError):
        Pooling.parse("median")
    with pytest.raises(ValueError):
        Pooling("uniform-mean", 2)
    with pytest.raises(ValueError):
        pool(_video([[1.0, 0.0]]), "single-frame:4")


def test_degenerate_embedding_names_video():
    with pytest.raises(DegenerateEmbedding, match="zz"):
        pool(_video([[1.0, 0.0], [-1.0, 0.0]], vid="zz"), "uniform-mean")


frames_strategy = arrays(
    np.float64, st.tuples(st.integers(2, 8), st.integers(2, 6)), elements=st.floats(-5, 5, allow_nan=False)
).filter(lambda a: np.linalg.norm(a.mean(axis=0)) > 1e-3)


@given(frames_strategy, st.integers(0, 2**32))
def test_uniform_mean_permutation_invariant(frames, seed):
    v = _video(frames)
    a = pool(v, "uniform-mean").vector
    b = pool(shuffle_frames(v, "random", seed), "uniform-mean").vector
    assert np.max(np.abs(a - b)) <= 1e-12


@given(frames_strategy)
def test_ramp_is_order_sensitive(frames):
    # with two non-parallel frames, some reordering (reverse or an adjacent swap) moves the output
    norms = np.linalg.norm(frames, axis=1, keepdims=True)
    if np.any(norms < 1e-3):
        return
    u = frames / norms
    if not np.any(np.abs(np.abs(u @ u.T) - 1.0) > 1e-6):
        return
    v = _video(frames)
    base = pool(v, "positional-ramp").vector
    candidates = [frames[::-1]] + [np.concatenate([frames[:i], frames[i + 1 : i + 2], frames[i : i + 1], frames[i + 2 :]]) for i in range(len(frames) - 1)]
    moved = False
    for c in candidates:
        try:
            moved |= not np.allclose(pool(_video(c), "positional-ramp").vector, base, atol=1e-9)
        except DegenerateEmbedding:
            moved = True
    assert moved


def test_reverse_changes_ramp_pooling():
    v = _video([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    assert not np.allclose(pool(v, "positional-ramp").vector, pool(shuffle_frames(v, "reverse"), "positional-ramp").vector)


@given(frames_strategy, st.data())
def test_single_frame_ignores_other_frames(frames, data):
    k = data.draw(st.integers(0, len(frames) - 1))
    if np.linalg.norm(frames[k]) < 1e-9:
        return
    other = frames.copy()
    other[np.arange(len(frames)) != k] += 3.0
    assert np.array_equal(pool(_video(frames), Pooling("single-frame", k)).vector, pool(_video(other), Pooling("single-frame", k)).vector)


def test_shuffle_modes():
    v = _video([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    assert shuffle_frames(v, "reverse").frames[:, 0].tolist() == [3.0, 2.0, 1.0]
    assert shuffle_frames(v, "identity") is v
    a, b = shuffle_frames(v, "random", 9), shuffle_frames(v, "random", 9)
    assert a == b
    assert sorted(a.frames[:, 0]) == [1.0, 2.0, 3.0]


def _brute_force_rank(pooled, q, rel_id, rel_source=None):
    # full sort by (-similarity, id, source) using plain Python dot products
    t = np.asarray(q, dtype=float)
    t = t / np.sqrt(sum(x * x for x in t))
    order = {"real": 0, "ai": 1}
    keyed = sorted(
        pooled,
        key=lambda p: (-sum(float(a) * float(b) for a, b in zip(p.vector, t)), p.video_id, order[p.source]),
    )
    for i, p in enumerate(keyed, 1):
        if p.video_id == rel_id and (rel_source is None or p.source == rel_source):
            return i
    raise AssertionError


def test_trivial_rank_examples():
    one = [PooledEmbedding("v", "real", np.array([1.0, 0.0]))]
    q = [QueryRecord("q", [1.0, 0.0])]
    assert rank_relevant(one, q, {"q": "v"}).ranks == {"q": 1}
    two = one + [PooledEmbedding("w", "real", np.array([0.0, 1.0]))]
    assert rank_relevant(two, q, {"q": "v"}).ranks == {"q": 1}
    with pytest.raises(StoreError, match="'q'"):
        rank_relevant(two, q, {"q": "nope"})


def test_ties_break_by_id():
    same = np.array([0.6, 0.8])
    pooled = [PooledEmbedding(i, "real", same) for i in ("b", "a", "c")]
    q = [QueryRecord("q", [1.0, 0.0])]
    assert rank_relevant(pooled, q, {"q": "a"}).ranks["q"] == 1
    assert rank_relevant(pooled, q, {"q": "c"}).ranks["q"] == 3


def test_mixed_examples():
    q = [QueryRecord("q", [1.0, 0.0])]
    real = [PooledEmbedding("v", "real", np.array([1.0, 0.0]))]
    ai = [PooledEmbedding("v", "ai", np.array([0.6, 0.8]))]
    mr, ma = rank_mixed(real, ai, q, {"q": "v"})
    assert (mr.ranks["q"], ma.ranks["q"]) == (1, 2)
    ai_same = [PooledEmbedding("v", "ai", np.array([1.0, 0.0]))]
    mr, ma = rank_mixed(real, ai_same, q, {"q": "v"})
    assert mr.ranks["q"] < ma.ranks["q"]
    assert mr.corpus_size == 2


def test_ranks_match_sort_oracle(synth200):
    d = synth200
    ids = d.real.ids[:50]
    real = pool_corpus(d.real.subset(ids), "positional-ramp")
    ai = pool_corpus(d.ai.subset(ids), "positional-ramp")
    queries = [q for q in d.queries if d.rel[q.id] in set(ids)]
    rel = {q.id: d.rel[q.id] for q in queries}
    t_real = rank_relevant(real, queries, rel)
    mr, ma = rank_mixed(real, ai, queries, rel)
    for q in queries:
        assert t_real.ranks[q.id] == _brute_force_rank(real, q.embedding, rel[q.id])
        assert mr.ranks[q.id] == _brute_force_rank(real + ai, q.embedding, rel[q.id], "real")
        assert ma.ranks[q.id] == _brute_force_rank(real + ai, q.embedding, rel[q.id], "ai")


@given(st.integers(0, 2**32), st.integers(2, 40))
def test_rank_tables_valid_and_worker_independent(seed, n):
    rng = Xoshiro256(seed)
    real = [PooledEmbedding(f"v{i}", "real", rng.unit_vector(4)) for i in range(n)]
    ai = [PooledEmbedding(f"v{i}", "ai", rng.unit_vector(4)) for i in range(n)]
    queries = [QueryRecord(f"q{i}", rng.normals(4)) for i in range(n)]
    rel = {f"q{i}": f"v{i}" for i in range(n)}
    t1 = rank_relevant(real, queries, rel)
    assert all(1 <= r <= n for r in t1.ranks.values())
    assert rank_relevant(real, queries, rel, workers=3).ranks == t1.ranks
    mr, ma = rank_mixed(real, ai, queries, rel)
    mr3, ma3 = rank_mixed(real, ai, queries, rel, workers=4)
    assert mr.ranks == mr3.ranks and ma.ranks == ma3.ranks
    for q in rel:
        assert mr.ranks[q] != ma.ranks[q]
        assert 1 <= mr.ranks[q] <= 2 * n and 1 <= ma.ranks[q] <= 2 * n


def test_shuffle_corpus_is_keyed_by_id(synth200):
    c = synth200.ai.subset(synth200.ai.ids[:10])
    a = shuffle_corpus(c, "random", 1)
    b = shuffle_corpus(c.subset(list(reversed(c.ids))), "random", 1)
    for vid in c.ids:
        assert a.get(vid) == b.get(vid)
