"""Descent across the residual-order arrangement.

The loss is linear on each region where the residual ordering is fixed, so
minimizing proceeds region by region: solve the linear program of the current
ordering, test the realizable pairs at its minimum for an improving direction,
and if one exists step along it to the smallest loss among the points where
the ordering changes.  Absence of an improving direction is equivalent to the
existence of a bistochastic certificate, which is then produced, decomposed,
and verified before the minimizer is returned.

The walk strictly decreases the region minima and never revisits an ordering;
both facts are asserted at runtime and a violation (only possible through
inconsistent tolerances) raises WalkInvariantError rather than looping.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .certificate import OptimalityCertificate, birkhoff_decompose, solve_certificate, verify_certificate
from .loss import ActivePairs, active_pairs, consistent_permutation, default_tie_tol, eval_loss, residuals
from .lp import LinearProgram, LpInfeasible, LpNumericError, LpOptimal, LpOutcome, LpUnbounded, find_feasible, solve_lp
from .model import RegressionData, ScoreVector, normalize_scores

log = logging.getLogger(__name__)

DIRECTION_STRATEGIES = ("first_feasible", "steepest_inf_norm")


class WalkError(Exception):
    pass


class WalkInvariantError(WalkError):
    """A runtime assertion of the descent theory failed; this indicates a
    numerical tolerance problem, never a valid terminal state."""

    def __init__(self, message: str, trace: "WalkTrace | None" = None):
        super().__init__(message)
        self.trace = trace


class IterationBudgetError(WalkError):
    def __init__(self, message: str, trace: "WalkTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class WoaConfig:
    """Tolerances and the freedoms the method leaves open: which solution of
    the direction system to take, and how orderings break ties."""

    tie_tol: float | None = None  # None: 1e-9 * (1 + max |residual|), per point
    lp_tol: float = 1e-9
    max_iter: int | None = None  # None: min(1e6, region-count bound)
    direction_strategy: str = "first_feasible"
    tie_break: str = "asc"

    def __post_init__(self):
        if self.tie_tol is not None and self.tie_tol < 0.0:
            raise ValueError("tie_tol must be nonnegative")
        if self.lp_tol <= 0.0:
            raise ValueError("lp_tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.direction_strategy not in DIRECTION_STRATEGIES:
            raise ValueError(f"unknown direction strategy {self.direction_strategy!r}")
        if self.tie_break not in ("asc", "desc"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")


class ImprovingDirection(NamedTuple):
    ell: np.ndarray
    r: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class Breakpoints:
    """Positive step lengths at which some residual pair ties along a ray."""

    entries: tuple[tuple[tuple[int, int], float], ...]


@dataclass(frozen=True)
class WalkIteration:
    pi: tuple[int, ...]
    beta_star: np.ndarray
    f_star: float
    direction: np.ndarray | None
    d_star: float | None


@dataclass(frozen=True)
class WalkTrace:
    iterations: tuple[WalkIteration, ...]


@dataclass(frozen=True)
class Minimizer:
    beta_opt: np.ndarray
    f_opt: float
    certificate: OptimalityCertificate
    trace: WalkTrace


@dataclass(frozen=True)
class Unbounded:
    point: np.ndarray
    ray: np.ndarray
    trace: WalkTrace


def region_bound(n: int, p: int) -> int:
    """Upper bound on the number of full-dimensional ordering regions cut out
    of p-space by the n(n-1)/2 pairwise tie hyperplanes."""
    big_n = n * (n - 1) // 2
    return sum(math.comb(big_n, i) for i in range(0, p + 1))


def _sorted_scores(alpha, n: int) -> ScoreVector:
    a = alpha if isinstance(alpha, ScoreVector) else normalize_scores(np.array(alpha, dtype=float).ravel())
    if a.n != n:
        raise ValueError(f"{a.n} weights for {n} observations")
    return a


def cell_lp(data: RegressionData, alpha, pi, lp_tol: float = 1e-9) -> LpOutcome:
    """Minimize the loss restricted to the region of ordering ``pi``.

    Optimal outcomes carry the full loss value (response constant included);
    an unbounded outcome means the loss itself is unbounded below.
    """
    a = _sorted_scores(alpha, data.n)
    pi = tuple(pi)
    if sorted(pi) != list(range(data.n)):
        raise ValueError(f"{pi} is not a permutation of 0..{data.n - 1}")
    xp = data.x[list(pi)]
    yp = data.y[list(pi)]
    grad = a.alpha @ xp
    const = float(a.alpha @ yp)
    rows = tuple((xp[k + 1] - xp[k], "<=", yp[k + 1] - yp[k]) for k in range(data.n - 1))
    out = solve_lp(LinearProgram(-grad, rows), lp_tol=lp_tol)
    if isinstance(out, LpOptimal):
        return LpOptimal(out.point, const + out.value, out.dual)
    return out


def improving_direction(data: RegressionData, alpha, ap: ActivePairs,
                        lp_tol: float = 1e-9,
                        strategy: str = "first_feasible") -> ImprovingDirection | None:
    """A direction of strict descent built from the realizable pairs, or None
    when none exists (which certifies optimality)."""
    a = _sorted_scores(alpha, data.n)
    n, p = data.n, data.p
    nv = p + 2 * n
    rows = []
    for i, j in sorted(ap.pairs):
        coeffs = np.zeros(nv)
        coeffs[:p] = a.alpha[i] * data.x[j]
        coeffs[p + i] = 1.0
        coeffs[p + n + j] = 1.0
        rows.append((coeffs, ">=", 0.0))
    if strategy == "first_feasible":
        anchor = np.zeros(nv)
        anchor[p:] = 1.0
        rows.append((anchor, "==", -1.0))
        point = find_feasible(rows, nvars=nv, lp_tol=lp_tol)
        if point is None:
            return None
    elif strategy == "steepest_inf_norm":
        for k in range(p):
            box = np.zeros(nv)
            box[k] = 1.0
            rows.append((box, "<=", 1.0))
            rows.append((box, ">=", -1.0))
        objective = np.zeros(nv)
        objective[p:] = 1.0
        out = solve_lp(LinearProgram(objective, tuple(rows)), lp_tol=lp_tol)
        if not isinstance(out, LpOptimal):
            raise LpNumericError(f"direction probe returned {type(out).__name__}, expected an optimum")
        if out.value >= -1e-7:
            return None
        point = out.point
    else:
        raise ValueError(f"unknown direction strategy {strategy!r}")
    return ImprovingDirection(point[:p].copy(), point[p + n:].copy(), point[p:p + n].copy())


def breakpoints(data: RegressionData, beta_star, direction, tie_tol: float,
                lp_tol: float = 1e-9) -> Breakpoints:
    """Step lengths d > tie_tol at which residual pairs tie along the ray
    beta_star + d * direction.  Pairs whose residuals move in parallel within
    lp_tol never tie and are skipped."""
    ell = np.array(direction, dtype=float).ravel()
    if ell.shape[0] != data.p or not np.isfinite(ell).all():
        raise ValueError("direction must be a finite vector of width p")
    if float(np.abs(ell).max()) == 0.0:
        raise ValueError("direction must be nonzero")
    e = residuals(data, beta_star).e
    sigma = data.x @ ell
    entries = []
    n = data.n
    for i in range(n):
        for j in range(i + 1, n):
            den = sigma[j] - sigma[i]
            if abs(den) <= lp_tol:
                continue
            d = (e[j] - e[i]) / den
            if d > tie_tol:
                entries.append(((i, j), float(d)))
    return Breakpoints(tuple(entries))


def line_search(data: RegressionData, alpha, beta_star, direction, bps: Breakpoints) -> float:
    """Smallest minimizer of the loss along the ray, over the breakpoint grid.
    The restriction is convex, so the scan stops at the first rise."""
    if not bps.entries:
        raise ValueError("no breakpoints to search")
    a = _sorted_scores(alpha, data.n)
    beta0 = np.array(beta_star, dtype=float).ravel()
    ell = np.array(direction, dtype=float).ravel()
    best_d = None
    best_f = math.inf
    prev_f = None
    for (_, _), d in sorted(bps.entries, key=lambda entry: (entry[1], entry[0])):
        f = eval_loss(data, a, beta0 + d * ell)
        if f < best_f:
            best_f = f
            best_d = d
        if prev_f is not None and f > prev_f:
            break
        prev_f = f
    return float(best_d)


def _require_descending_ray(data, alpha, point, ray, trace):
    f_prev = eval_loss(data, alpha, point)
    for t in (1.0, 10.0, 100.0):
        f_t = eval_loss(data, alpha, point + t * ray)
        if not f_t < f_prev:
            raise WalkInvariantError(f"claimed ray fails to decrease the loss at step {t}", trace)
        f_prev = f_t


def minimize(data: RegressionData, alpha, beta0=None,
             config: WoaConfig | None = None) -> Minimizer | Unbounded:
    """Walk the arrangement from ``beta0`` (origin by default) to a verified
    minimizer, or detect that the loss is unbounded below.

    Weights are sorted on entry; their input order never matters.  Raises
    IterationBudgetError if the iteration cap is hit and WalkInvariantError if
    a runtime descent assertion fails.
    """
    cfg = config or WoaConfig()
    a = _sorted_scores(normalize_scores(alpha.alpha if isinstance(alpha, ScoreVector) else alpha), data.n)
    if beta0 is None:
        beta = np.zeros(data.p)
    else:
        beta = np.array(beta0, dtype=float).ravel()
        if beta.shape[0] != data.p or not np.isfinite(beta).all():
            raise ValueError("beta0 must be a finite vector of width p")
    cap = cfg.max_iter if cfg.max_iter is not None else min(10 ** 6, region_bound(data.n, data.p))
    iterations: list[WalkIteration] = []
    visited: set[tuple[int, ...]] = set()

    for it in range(cap):
        res = residuals(data, beta)
        tt = cfg.tie_tol if cfg.tie_tol is not None else default_tie_tol(res)
        pi = consistent_permutation(res, tt, tie_break=cfg.tie_break)
        trace_now = WalkTrace(tuple(iterations))
        if pi in visited:
            raise WalkInvariantError(f"ordering {pi} revisited at iteration {it}", trace_now)
        visited.add(pi)
        out = cell_lp(data, a, pi, lp_tol=cfg.lp_tol)
        if isinstance(out, LpInfeasible):
            raise WalkInvariantError(f"region of the current ordering {pi} came back empty", trace_now)
        if isinstance(out, LpUnbounded):
            _require_descending_ray(data, a, out.point, out.ray, trace_now)
            log.info("unbounded within region %s at iteration %d", pi, it)
            return Unbounded(out.point, out.ray, trace_now)
        beta_star, f_star = out.point, out.value
        if iterations and not (f_star < iterations[-1].f_star):
            raise WalkInvariantError(
                f"region minimum {f_star} did not improve on {iterations[-1].f_star}", trace_now)
        res_star = residuals(data, beta_star)
        tts = cfg.tie_tol if cfg.tie_tol is not None else default_tie_tol(res_star)
        ap = active_pairs(res_star, tts)
        found = improving_direction(data, a, ap, lp_tol=cfg.lp_tol, strategy=cfg.direction_strategy)
        if found is None:
            G = solve_certificate(data, a, ap, lp_tol=cfg.lp_tol)
            if G is None:
                raise WalkInvariantError("no improving direction, yet no certificate either", trace_now)
            cert = OptimalityCertificate(G, tuple(birkhoff_decompose(G)))
            report = verify_certificate(data, a, beta_star, cert, tie_tol=tts)
            if not report.ok:
                raise WalkInvariantError(f"certificate failed verification: {report.failures}", trace_now)
            iterations.append(WalkIteration(pi, beta_star, f_star, None, None))
            log.info("minimizer found after %d iterations, loss %.12g", len(iterations), f_star)
            return Minimizer(beta_star, f_star, cert, WalkTrace(tuple(iterations)))
        ell = found.ell
        bps = breakpoints(data, beta_star, ell, tts, lp_tol=cfg.lp_tol)
        if not bps.entries:
            iterations.append(WalkIteration(pi, beta_star, f_star, ell, None))
            ray = ell / float(np.abs(ell).max())
            trace_now = WalkTrace(tuple(iterations))
            _require_descending_ray(data, a, beta_star, ray, trace_now)
            log.info("descent ray never changes the ordering; unbounded at iteration %d", it)
            return Unbounded(beta_star, ray, trace_now)
        d_star = line_search(data, a, beta_star, ell, bps)
        iterations.append(WalkIteration(pi, beta_star, f_star, ell, d_star))
        log.debug("iteration %d: ordering %s, region minimum %.12g, step %.6g", it, pi, f_star, d_star)
        beta = beta_star + d_star * ell

    raise IterationBudgetError(f"no terminal state within {cap} iterations", WalkTrace(tuple(iterations)))
