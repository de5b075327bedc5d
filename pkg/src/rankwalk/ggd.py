"""Generalized gradient descent baseline.

Follows the exact negative gradient inside a smooth region with an exact line
search over the ordering-change points, and nudges off tie points where the
loss is not differentiable.  Candidate steps that fail to improve the best
loss are rejected, so the recorded loss values only ever decrease.  The method
carries no optimality test: it stops on stall, budget, flatness, or an
unbounded ray, and reports which.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .loss import _tie_blocks, consistent_permutation, default_tie_tol, eval_loss, residuals
from .model import RegressionData, ScoreVector, normalize_scores
from .woa import breakpoints, line_search

PERTURBATIONS = ("random", "prolong")


@dataclass(frozen=True)
class GgdConfig:
    perturbation: str = "random"
    magnitude: float = 1e-4
    seed: int = 0
    max_iter: int = 1000
    stop_tol: float = 1e-9
    stall_window: int = 8
    tie_tol: float | None = None
    lp_tol: float = 1e-9

    def __post_init__(self):
        if self.perturbation not in PERTURBATIONS:
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if self.magnitude <= 0.0 or self.stop_tol <= 0.0 or self.lp_tol <= 0.0:
            raise ValueError("magnitude, stop_tol and lp_tol must be positive")
        if self.max_iter < 1 or self.stall_window < 1:
            raise ValueError("max_iter and stall_window must be positive")


@dataclass(frozen=True)
class GgdTrace:
    points: tuple[np.ndarray, ...]
    f_values: tuple[float, ...]
    stop_reason: str
    n_iterations: int
    n_perturbations: int


@dataclass(frozen=True)
class GgdResult:
    beta: np.ndarray
    f: float
    trace: GgdTrace


def cell_gradient(data: RegressionData, alpha, beta, tie_tol: float | None = None) -> np.ndarray | None:
    """Gradient of the loss where it is smooth, None on a tie point."""
    a = alpha if isinstance(alpha, ScoreVector) else normalize_scores(alpha)
    if a.n != data.n:
        raise ValueError(f"{a.n} weights for {data.n} observations")
    res = residuals(data, beta)
    tt = default_tie_tol(res) if tie_tol is None else tie_tol
    blocks = _tie_blocks(res.e, tt)
    if any(len(b) > 1 for b in blocks):
        return None
    pi = consistent_permutation(res, tt)
    return -(a.alpha @ data.x[list(pi)])


def _nudge(beta, last_dir, scale, rng, cfg) -> np.ndarray:
    size = cfg.magnitude * (1.0 + float(np.linalg.norm(beta))) * scale
    if cfg.perturbation == "prolong":
        d = last_dir if last_dir is not None else np.ones_like(beta)
        return beta + size * d / float(np.linalg.norm(d))
    u = rng.standard_normal(beta.shape[0])
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        u = np.ones_like(beta)
        norm = float(np.linalg.norm(u))
    return beta + size * u / norm


def ggd_minimize(data: RegressionData, alpha, beta0=None,
                 config: GgdConfig | None = None) -> GgdResult:
    """Best point found by perturbed exact-line-search gradient descent.

    No optimality claim is made for the result; the trace records the strictly
    decreasing losses of the accepted steps and why the loop stopped.
    """
    cfg = config or GgdConfig()
    a = normalize_scores(alpha.alpha if isinstance(alpha, ScoreVector) else alpha)
    if a.n != data.n:
        raise ValueError(f"{a.n} weights for {data.n} observations")
    beta = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float).ravel()
    if beta.shape[0] != data.p or not np.isfinite(beta).all():
        raise ValueError("beta0 must be a finite vector of width p")
    rng = np.random.default_rng(cfg.seed)

    f_best = eval_loss(data, a, beta)
    points = [beta.copy()]
    f_values = [f_best]
    last_dir: np.ndarray | None = None
    stall = 0
    n_perturb = 0
    n_iter = 0
    stop_reason = "max_iter"

    for _ in range(cfg.max_iter):
        n_iter += 1
        start = beta
        grad = cell_gradient(data, a, start, cfg.tie_tol)
        if grad is None:
            scale = 1.0
            for _attempt in range(16):
                n_perturb += 1
                start = _nudge(beta, last_dir, scale, rng, cfg)
                grad = cell_gradient(data, a, start, cfg.tie_tol)
                if grad is not None:
                    break
                scale *= 1.7
            if grad is None:
                stop_reason = "stuck_on_ties"
                break
        if float(np.abs(grad).max()) == 0.0:
            stop_reason = "zero_gradient"
            break
        direction = -grad
        res = residuals(data, start)
        tt = default_tie_tol(res) if cfg.tie_tol is None else cfg.tie_tol
        bps = breakpoints(data, start, direction, tt, lp_tol=cfg.lp_tol)
        if not bps.entries:
            stop_reason = "unbounded_direction"
            break
        d = line_search(data, a, start, direction, bps)
        candidate = start + d * direction
        f_cand = eval_loss(data, a, candidate)
        if f_cand < f_best:
            improvement = f_best - f_cand
            beta = candidate
            f_best = f_cand
            last_dir = direction
            points.append(candidate.copy())
            f_values.append(f_cand)
        else:
            improvement = 0.0
        if improvement < cfg.stop_tol:
            stall += 1
            if stall >= cfg.stall_window:
                stop_reason = "stalled"
                break
        else:
            stall = 0

    trace = GgdTrace(tuple(points), tuple(f_values), stop_reason, n_iter, n_perturb)
    return GgdResult(beta, f_best, trace)
