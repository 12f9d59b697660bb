import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given
from hypothesis import strategies as st

from srcbias.stats import betainc, flow_entropy, flow_summary, paired_t_test, t_cdf, t_two_sided_p
from srcbias.synth import synthetic_flows


def test_hand_fixture():
    # differences 1..5: mean 3, sd sqrt(2.5), t = 3 / (sqrt(2.5) / sqrt(5)) = 3 sqrt(2)
    res = paired_t_test([2, 4, 6, 8, 10], [1, 2, 3, 4, 5])
    assert res.t_statistic == pytest.approx(3 * math.sqrt(2), abs=1e-12)
    assert res.degrees_of_freedom == 4
    assert res.p_value == pytest.approx(0.0132, abs=1e-3)
    assert res.p_value == pytest.approx(scipy.stats.ttest_rel([2, 4, 6, 8, 10], [1, 2, 3, 4, 5]).pvalue, abs=1e-10)


def test_degenerate_variance():
    assert paired_t_test([1, 2, 3], [1, 2, 3]).p_value == 1.0
    res = paired_t_test([2, 3, 4], [1, 2, 3])
    assert res.t_statistic == math.inf and res.p_value == 0.0
    assert paired_t_test([1, 2, 3], [2, 3, 4]).t_statistic == -math.inf


def test_errors():
    with pytest.raises(ValueError):
        paired_t_test([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        paired_t_test([1], [2])


@given(st.floats(0.05, 50), st.floats(0.05, 50), st.floats(0, 1))
def test_betainc_matches_scipy(a, b, x):
    assert betainc(a, b, x) == pytest.approx(float(scipy.special.betainc(a, b, x)), abs=1e-10)


@given(st.floats(-30, 30), st.integers(1, 200))
def test_t_distribution_matches_scipy(t, df):
    assert t_cdf(t, df) == pytest.approx(float(scipy.stats.t.cdf(t, df)), abs=1e-10)
    assert t_two_sided_p(t, df) == pytest.approx(float(2 * scipy.stats.t.sf(abs(t), df)), abs=1e-10)


def test_t_reference_points():
    for k in (1, 2, 5, 30):
        assert t_two_sided_p(0.0, k) == 1.0
        assert t_cdf(0.0, k) == pytest.approx(0.5, abs=1e-12)
        assert t_cdf(2.0, k) == pytest.approx(1.0 - t_cdf(-2.0, k), abs=1e-6)


samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=30)


@given(samples, st.data())
def test_t_antisymmetric(a, data):
    b = data.draw(st.lists(st.floats(-100, 100, allow_nan=False), min_size=len(a), max_size=len(a)))
    x, y = paired_t_test(a, b), paired_t_test(b, a)
    assert x.t_statistic == -y.t_statistic or (math.isnan(x.t_statistic) and math.isnan(y.t_statistic))
    assert x.p_value == y.p_value
    assert 0.0 <= x.p_value <= 1.0


def test_p_decreases_with_abs_t():
    ts = np.linspace(0, 10, 50)
    ps = [t_two_sided_p(t, 7) for t in ts]
    assert all(p1 >= p2 for p1, p2 in zip(ps, ps[1:]))


def test_entropy_examples():
    assert flow_entropy(np.full((4, 4), 2.5)) == 0.0
    assert flow_entropy(np.zeros((3, 3))) == 0.0
    # one magnitude per bin centre fills all 16 bins equally
    grid = ((np.arange(16) + 0.5) / 16).reshape(4, 4)
    assert flow_entropy(grid, 16) == 4.0


def _entropy_oracle(grid, bins):
    top = grid.max()
    counts = [0] * bins
    for x in grid.ravel():
        i = min(int(x / top * bins), bins - 1)
        counts[i] += 1
    return -sum(c / grid.size * math.log2(c / grid.size) for c in counts if c)


def test_entropy_matches_direct_recompute():
    rng = np.random.default_rng(0)
    for _ in range(20):
        grid = rng.gamma(2.0, size=(16, 16))
        assert flow_entropy(grid, 16) == pytest.approx(_entropy_oracle(grid, 16), abs=1e-12)


@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=60), st.integers(2, 40))
def test_entropy_bounds(values, bins):
    h = flow_entropy(np.array(values).reshape(-1, 1), bins)
    assert 0.0 <= h <= math.log2(bins) + 1e-12


def test_entropy_rejects_bad_input():
    with pytest.raises(ValueError):
        flow_entropy([[-1.0]])
    with pytest.raises(ValueError):
        flow_entropy([[1.0]], bins=1)


def test_flow_summary_examples():
    same = [np.arange(16.0).reshape(4, 4)] * 3
    s = flow_summary(same, same)
    assert (s.higher_count_real, s.higher_count_ai) == (0, 0)
    assert s.mean_entropy_real == s.mean_entropy_ai
    real = [((np.arange(4) + 0.5) / 4).reshape(2, 2)]  # 2 bits with 4 bins
    ai = [np.array([[0.1, 0.1], [0.9, 0.9]])]  # 1 bit
    s = flow_summary(real, ai, bins=4)
    assert (s.mean_entropy_real, s.mean_entropy_ai) == (2.0, 1.0)
    assert (s.higher_count_real, s.higher_count_ai) == (1, 0)
    with pytest.raises(ValueError):
        flow_summary(real, ai + ai)


def test_synthetic_flow_direction():
    real, ai = synthetic_flows(100, spread_ratio=4.0, seed=42)
    s = flow_summary(real, ai)
    assert s.higher_count_real >= 90
    assert s.higher_count_real + s.higher_count_ai <= s.n_pairs
