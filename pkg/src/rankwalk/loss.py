"""Residuals, residual orderings, and the sorted-weight loss.

The loss of a coefficient vector is the maximum over all pairings of weights
with residuals; since the weights are sorted ascending the maximum is attained
by pairing them with the residuals sorted ascending.  Permutations are tuples
``pi`` with ``pi[i] = j`` meaning observation j holds rank i (0-based
throughout; the CLI converts to 1-based on output).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import RegressionData, ScoreVector, as_score_vector

BRUTE_FORCE_LIMIT = 8


@dataclass(frozen=True)
class Residuals:
    """Residual vector ``e`` at the point ``beta`` it was computed at."""

    e: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        e = np.array(self.e, dtype=float).ravel()
        beta = np.array(self.beta, dtype=float).ravel()
        e.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return self.e.shape[0]


@dataclass(frozen=True)
class TieBlock:
    """Observations whose residuals are indistinguishable within the tie
    tolerance, holding the contiguous rank range [lo, hi]."""

    lo: int
    hi: int
    observations: tuple[int, ...]


@dataclass(frozen=True)
class ActivePairs:
    """All (rank, observation) pairs realizable by some tolerance-consistent
    ordering, grouped into tie blocks."""

    pairs: frozenset[tuple[int, int]]
    blocks: tuple[TieBlock, ...]
    block_of: tuple[int, ...]


def residuals(data: RegressionData, beta) -> Residuals:
    """e_i = y_i - x_i . beta, with the dot product summed left to right so the
    result is bit-reproducible."""
    b = np.array(beta, dtype=float).ravel()
    if b.shape[0] != data.p:
        raise ValueError(f"beta has {b.shape[0]} entries, expected {data.p}")
    if not np.isfinite(b).all():
        raise ValueError("beta must be finite")
    x = data.x
    e = np.empty(data.n)
    for i in range(data.n):
        acc = 0.0
        for k in range(data.p):
            acc += x[i, k] * b[k]
        e[i] = data.y[i] - acc
    return Residuals(e, b)


def default_tie_tol(res: Residuals) -> float:
    return 1e-9 * (1.0 + float(np.max(np.abs(res.e))))


def _tie_blocks(e: np.ndarray, tie_tol: float) -> list[list[int]]:
    # Transitive closure of |e_a - e_b| <= tie_tol over the value-sorted order.
    order = sorted(range(e.shape[0]), key=lambda i: (e[i], i))
    blocks: list[list[int]] = [[order[0]]]
    for prev, cur in zip(order, order[1:]):
        if e[cur] - e[prev] > tie_tol:
            blocks.append([cur])
        else:
            blocks[-1].append(cur)
    return blocks


def consistent_permutation(res: Residuals, tie_tol: float, tie_break: str = "asc") -> tuple[int, ...]:
    """An ordering putting residuals in nondecreasing order, deterministic
    under ties: within a tie block observations are listed by index (ascending
    by default; ``tie_break="desc"`` flips it, any block order is valid)."""
    if tie_tol < 0.0:
        raise ValueError("tie tolerance must be nonnegative")
    if tie_break not in ("asc", "desc"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    pi: list[int] = []
    for block in _tie_blocks(res.e, tie_tol):
        pi.extend(sorted(block, reverse=(tie_break == "desc")))
    return tuple(pi)


def active_pairs(res: Residuals, tie_tol: float) -> ActivePairs:
    """Pairs (i, j) such that observation j can hold rank i in some ordering
    consistent with the residuals at this point."""
    if tie_tol < 0.0:
        raise ValueError("tie tolerance must be nonnegative")
    blocks: list[TieBlock] = []
    pairs: set[tuple[int, int]] = set()
    block_of = [0] * res.n
    lo = 0
    for b, members in enumerate(_tie_blocks(res.e, tie_tol)):
        obs = tuple(sorted(members))
        hi = lo + len(obs) - 1
        blocks.append(TieBlock(lo, hi, obs))
        for i in range(lo, hi + 1):
            for j in obs:
                pairs.add((i, j))
        for j in obs:
            block_of[j] = b
        lo = hi + 1
    return ActivePairs(frozenset(pairs), tuple(blocks), tuple(block_of))


def eval_loss(data: RegressionData, alpha, beta) -> float:
    """Loss at beta: sorted residuals paired with the sorted weights."""
    a = as_score_vector(alpha)
    if a.n != data.n:
        raise ValueError(f"{a.n} weights for {data.n} observations")
    e = residuals(data, beta).e
    return float(np.sort(e) @ a.alpha)


@lru_cache(maxsize=8)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def eval_loss_bruteforce(data: RegressionData, alpha, beta) -> float:
    """Maximum over all n! pairings, by exhaustion.  Testing oracle only."""
    if data.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {data.n}")
    a = as_score_vector(alpha)
    if a.n != data.n:
        raise ValueError(f"{a.n} weights for {data.n} observations")
    e = residuals(data, beta).e
    return float(np.max(e[_perm_table(data.n)] @ a.alpha))
