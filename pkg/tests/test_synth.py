import numpy as np
import pytest

from srcbias.pipeline import evaluate_corpora
from srcbias.ranking import pool_corpus, ramp_weights
from srcbias.synth import SynthConfig, bias_profile, generate_synthetic
from srcbias.trainer import ScorerParams, delta_r


def test_determinism():
    a = generate_synthetic(SynthConfig(n_items=20, seed=3))
    b = generate_synthetic(SynthConfig(n_items=20, seed=3))
    assert a.real.videos == b.real.videos and a.ai.videos == b.ai.videos
    assert a.queries == b.queries and np.array_equal(a.bias_direction, b.bias_direction)


def test_shapes_and_norms():
    d = generate_synthetic(SynthConfig(n_items=15, dim=8, frames=4, seed=1))
    assert len(d.real) == len(d.ai) == len(d.queries) == 15
    assert d.real.frame_count == 4 and d.real.dim == 8
    for v in d.ai:
        assert np.allclose(np.linalg.norm(v.frames, axis=1), 1.0)
    assert abs(np.linalg.norm(d.bias_direction) - 1.0) < 1e-12
    assert set(d.rel.values()) == set(d.real.ids) == set(d.ai.ids)


def test_bias_profile_recovers_unit_weight_under_ramp():
    for f in range(2, 16):
        for kappa in (0.0, 0.3, 0.7, 1.0):
            g = bias_profile(f, kappa)
            assert ramp_weights(f) @ g == pytest.approx(1.0, abs=1e-12)
            assert g.mean() == pytest.approx(1.0 - kappa, abs=1e-12)
    assert bias_profile(1, 0.5).tolist() == [1.0]


def test_config_validation():
    for bad in ({"alpha": 0.0}, {"beta": -1.0}, {"noise_sigma": 0.0}, {"n_items": 0}, {"temporal_bias": 2.0}):
        with pytest.raises(ValueError):
            SynthConfig(**bad)


def test_beta_zero_gives_exchangeable_generators():
    # with no planted direction both corpora are drawn from the same law: mean delta_r near 0
    d = generate_synthetic(SynthConfig(n_items=400, beta=0.0, gamma=0.0, drift=0.0, seed=11))
    p = ScorerParams.identity(d.real.dim, 1.0)
    real = {e.video_id: e.vector for e in pool_corpus(d.real, "positional-ramp")}
    ai = {e.video_id: e.vector for e in pool_corpus(d.ai, "positional-ramp")}
    dr = [delta_r(p, real[d.rel[q.id]], ai[d.rel[q.id]], q.embedding) for q in d.queries]
    assert abs(np.mean(dr)) < 3 * np.std(dr) / np.sqrt(len(dr))


def test_biased_corpus_has_positive_mean_delta_r(synth200):
    d = synth200
    p = ScorerParams.identity(d.real.dim)
    real = {e.video_id: e.vector for e in pool_corpus(d.real, "positional-ramp")}
    ai = {e.video_id: e.vector for e in pool_corpus(d.ai, "positional-ramp")}
    dr = [delta_r(p, real[d.rel[q.id]], ai[d.rel[q.id]], q.embedding) for q in d.queries]
    assert np.mean(dr) > 0


def test_biased_corpus_negative_normalized_r1(synth200):
    d = synth200
    ev = evaluate_corpora(d.real, d.ai, d.queries, d.rel, 42, "positional-ramp")
    assert ev.report.normalized["R@1"] < -20
