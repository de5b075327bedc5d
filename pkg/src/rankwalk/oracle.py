"""Independent ground truths for small instances.

The loss is the upper envelope of one linear function per pairing of weights
with observations, so for tiny n it can be minimized directly as a linear
program with one row per pairing.  Region enumeration walks all orderings and
keeps those whose region is nonempty.  Both are deliberately exhaustive; they
exist to check the walk, not to compete with it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .loss import _perm_table
from .lp import LinearProgram, LpInfeasible, LpNumericError, LpOptimal, LpUnbounded, find_feasible, solve_lp
from .model import RegressionData, ScoreVector, as_score_vector

ORACLE_LIMIT = 7
ENUMERATION_LIMIT = 6


@dataclass(frozen=True)
class OracleResult:
    unbounded: bool
    value: float | None
    point: np.ndarray | None


def oracle_minimize(data: RegressionData, alpha, lp_tol: float = 1e-9) -> OracleResult:
    """Exact minimum by the one-row-per-pairing envelope program (n <= 7).

    Rows sharing the same coefficient vector are collapsed to the one with the
    largest threshold, which leaves the feasible set untouched.
    """
    if data.n > ORACLE_LIMIT:
        raise ValueError(f"envelope oracle limited to n <= {ORACLE_LIMIT}, got {data.n}")
    a = as_score_vector(alpha)
    if a.n != data.n:
        raise ValueError(f"{a.n} weights for {data.n} observations")
    perms = _perm_table(data.n)
    grads = np.einsum("i,kip->kp", a.alpha, data.x[perms])
    consts = data.y[perms] @ a.alpha
    dominant: dict[tuple, float] = {}
    keep: dict[tuple, int] = {}
    for k in range(perms.shape[0]):
        key = tuple(np.round(grads[k], 9))
        if key not in dominant or consts[k] > dominant[key]:
            dominant[key] = consts[k]
            keep[key] = k
    rows = []
    for key, k in keep.items():
        coeffs = np.concatenate([[1.0], -grads[k]])
        rows.append((coeffs, ">=", dominant[key]))
    objective = np.zeros(1 + data.p)
    objective[0] = 1.0
    out = solve_lp(LinearProgram(objective, tuple(rows)), lp_tol=lp_tol)
    if isinstance(out, LpOptimal):
        return OracleResult(False, out.value, out.point[1:].copy())
    if isinstance(out, LpUnbounded):
        return OracleResult(True, None, None)
    raise LpNumericError("envelope program reported infeasible, which is impossible")


def enumerate_nonempty_cells(data: RegressionData, lp_tol: float = 1e-9) -> tuple[tuple[int, ...], ...]:
    """All orderings whose region is nonempty (n <= 6)."""
    if data.n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration limited to n <= {ENUMERATION_LIMIT}, got {data.n}")
    found = []
    for pi in itertools.permutations(range(data.n)):
        xp = data.x[list(pi)]
        yp = data.y[list(pi)]
        rows = tuple((xp[k + 1] - xp[k], "<=", yp[k + 1] - yp[k]) for k in range(data.n - 1))
        if find_feasible(rows, nvars=data.p, lp_tol=lp_tol) is not None:
            found.append(tuple(pi))
    return tuple(found)


def random_instance(rng: np.random.Generator, n_range=(2, 6), p_range=(1, 3),
                    value_range=(-3, 3)) -> tuple[RegressionData, ScoreVector]:
    """Small-integer instance with sorted integer weights, for sweep tests."""
    lo, hi = value_range
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = int(rng.integers(p_range[0], p_range[1] + 1))
    x = rng.integers(lo, hi + 1, size=(n, p)).astype(float)
    y = rng.integers(lo, hi + 1, size=n).astype(float)
    alpha = np.sort(rng.integers(lo, hi + 1, size=n).astype(float))
    return RegressionData(x, y), ScoreVector(alpha)
