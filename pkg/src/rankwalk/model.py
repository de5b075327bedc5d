"""Problem data and score weights.

A problem instance is a design matrix with one row per observation plus a
response vector.  The loss downstream pairs the sorted residuals with a
nondecreasing weight vector, so weights are carried in a container that
enforces the sort order at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SCORE_KINDS = ("sign", "wilcoxon", "van_der_waerden")


def _frozen_array(values, dtype=float, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RegressionData:
    """Design matrix ``x`` (n rows, p columns) and response ``y`` (length n)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise ValueError(f"design matrix must be 2-dimensional, got shape {x.shape}")
        y = np.array(self.y, dtype=float).ravel()
        n, p = x.shape
        if n < 1 or p < 1:
            raise ValueError(f"need at least one row and one column, got {n}x{p}")
        if y.shape[0] != n:
            raise ValueError(f"response length {y.shape[0]} does not match {n} rows")
        if not np.isfinite(x).all() or not np.isfinite(y).all():
            raise ValueError("data must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class ScoreVector:
    """Weight vector sorted ascending; rejected otherwise."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float).ravel()
        if a.size < 1:
            raise ValueError("need at least one weight")
        if not np.isfinite(a).all():
            raise ValueError("weights must be finite")
        if np.any(np.diff(a) < 0):
            raise ValueError("weights must be nondecreasing; use normalize_scores to sort raw weights")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]


def normalize_scores(raw: Iterable[float]) -> ScoreVector:
    """Sort raw weights ascending.  The loss never depends on their input order."""
    a = np.array(list(raw), dtype=float).ravel()
    if a.size < 1:
        raise ValueError("need at least one weight")
    if not np.isfinite(a).all():
        raise ValueError("weights must be finite")
    return ScoreVector(np.sort(a))


def standard_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def inverse_normal_cdf(u: float) -> float:
    """Quantile of the standard normal, accurate to |cdf(result) - u| < 1e-12.

    Safeguarded bisection on the erf-based cdf; a few Newton polish steps at
    the end sharpen the bracket midpoint.
    """
    if not (0.0 < u < 1.0):
        raise ValueError(f"quantile argument must lie strictly in (0, 1), got {u}")
    lo, hi = -40.0, 40.0
    x = 0.0
    for _ in range(200):
        x = 0.5 * (lo + hi)
        fx = standard_normal_cdf(x)
        if abs(fx - u) < 5e-14:
            break
        if fx < u:
            lo = x
        else:
            hi = x
        if hi - lo < 1e-15 * max(1.0, abs(lo)):
            break
    for _ in range(3):
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        if pdf <= 0.0:
            break
        step = (standard_normal_cdf(x) - u) / pdf
        if not math.isfinite(step):
            break
        x -= step
    return x


def _phi(kind: str, xi: float) -> float:
    if kind == "sign":
        if xi > 0.5:
            return 1.0
        if xi < 0.5:
            return -1.0
        return 0.0
    if kind == "wilcoxon":
        return math.sqrt(12.0) * (xi - 0.5)
    if kind == "van_der_waerden":
        return inverse_normal_cdf(xi)
    raise ValueError(f"unknown score kind {kind!r}; expected one of {SCORE_KINDS} or a custom table")


def make_scores(kind: str | Sequence[float], n: int) -> ScoreVector:
    """Build the weight vector for n observations.

    ``kind`` is one of the named generators in SCORE_KINDS, each evaluating a
    nondecreasing function at i/(n+1) for i = 1..n, or an explicit table of n
    values.  Tables must already be nondecreasing (normalize_scores sorts raw
    ones).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if isinstance(kind, str):
        return ScoreVector(np.array([_phi(kind, i / (n + 1)) for i in range(1, n + 1)]))
    table = np.array(list(kind), dtype=float).ravel()
    if table.size != n:
        raise ValueError(f"custom table has {table.size} entries, expected {n}")
    return ScoreVector(table)


def as_score_vector(alpha) -> ScoreVector:
    """Coerce an already-sorted sequence (or pass through a ScoreVector)."""
    if isinstance(alpha, ScoreVector):
        return alpha
    return ScoreVector(np.array(alpha, dtype=float))
