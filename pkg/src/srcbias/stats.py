"""Paired t-tests and optical-flow entropy summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_TINY = 1e-300


def _betacf(a: float, b: float, x: float, tol: float = 1e-15, max_iter: int = 10_000) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _two_tail(t: float, df: float) -> float:
    """P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    t2 = t * t
    if t2 < df:
        # near t = 0 the argument is close to 1; use the complement to keep precision
        return 1.0 - betainc(0.5, df / 2.0, t2 / (df + t2))
    return betainc(df / 2.0, 0.5, df / (df + t2))


def t_cdf(t: float, df: float) -> float:
    """Student-t cumulative distribution function."""
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * _two_tail(t, df)
    return 1.0 - tail if t > 0 else tail


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return min(1.0, _two_tail(t, df))


@dataclass
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_value: float


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test on ``a - b``.

    Zero-variance differences give ``t = +-inf, p = 0`` when the mean differs
    from zero, and ``t = 0, p = 1`` otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples must have equal length (got {a.shape} and {b.shape})")
    n = a.size
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    diff = a - b
    mean = float(diff.mean())
    sd = float(diff.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, df, 1.0)
        return TTestResult(math.copysign(math.inf, mean), df, 0.0)
    t = mean / (sd / math.sqrt(n))
    return TTestResult(t, df, t_two_sided_p(t, df))


def flow_entropy(magnitudes, bins: int = 16) -> float:
    """Shannon entropy (bits) of a flow-magnitude histogram on ``[0, max]``."""
    grid = np.asarray(magnitudes, dtype=np.float64)
    if bins < 2:
        raise ValueError("need at least two bins")
    if grid.size == 0:
        raise ValueError("flow grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("flow magnitudes must be finite and nonnegative")
    top = float(grid.max())
    if top == 0.0:
        return 0.0
    # scale first: numpy cannot split a subnormal range into bins
    counts, _ = np.histogram(grid / top, bins=bins, range=(0.0, 1.0))
    p = counts[counts > 0] / grid.size
    return float(-(p * np.log2(p)).sum()) + 0.0


@dataclass
class FlowEntropySummary:
    mean_entropy_real: float
    mean_entropy_ai: float
    higher_count_real: int
    higher_count_ai: int
    n_pairs: int


def flow_summary(real_flows, ai_flows, bins: int = 16) -> FlowEntropySummary:
    if len(real_flows) != len(ai_flows):
        raise ValueError(f"need paired flow lists (got {len(real_flows)} real, {len(ai_flows)} ai)")
    if not real_flows:
        raise ValueError("no flow pairs")
    h_real = np.array([flow_entropy(g, bins) for g in real_flows])
    h_ai = np.array([flow_entropy(g, bins) for g in ai_flows])
    return FlowEntropySummary(
        float(h_real.mean()),
        float(h_ai.mean()),
        int(np.count_nonzero(h_real > h_ai)),
        int(np.count_nonzero(h_ai > h_real)),
        len(h_real),
    )
