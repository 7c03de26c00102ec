"""Greedy solution paths (OMP / OLS) and the classical stopping rules.

The full path to k_max steps is computed once per observation; every stopping
rule and selector then reads the stored residual statistics, so all rules see
identical randomness at zero extra cost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .designs import DesignMatrix
from .errors import DimensionMismatchError, RankDeficientError
from .linalg import RANK_TOL, OrthoBasisState

RULES = ("omp", "ols")

STATUS_OK = "ok"
STATUS_EMPTY = "empty_selection"
STATUS_EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SupportEstimate:
    """An estimated support with how it was terminated."""

    support: frozenset[int]
    k_selected: int
    status: str  # "ok" | "empty_selection" | "exhausted"


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """Greedy selections t^1..t^K with per-step residual statistics.

    residual_norms[k] = ||r^k||_2 and residual_corr_inf[k] = ||X^T r^k||_inf
    for k = 0..K (index 0 is the raw observation). Supports are nested:
    the estimate after k steps is the first k selected indices.
    """

    rule: str
    selected: tuple[int, ...]
    residual_norms: np.ndarray
    residual_corr_inf: np.ndarray
    coeffs_final: np.ndarray
    K: int
    status: str  # "complete" | "rank_deficient"

    def support_at(self, k: int) -> frozenset[int]:
        if not 0 <= k <= self.K:
            raise ValueError(f"k={k} outside [0, K={self.K}]")
        return frozenset(self.selected[:k])

    def estimate(self, k: int | None) -> SupportEstimate:
        """SupportEstimate for model order k; None marks an empty selection."""
        if k is None:
            return SupportEstimate(frozenset(), 0, STATUS_EMPTY)
        return SupportEstimate(self.support_at(k), k, STATUS_OK)


def default_kmax(n: int) -> int:
    """Largest sparsity any recovery scheme can hope to identify: floor((n+1)/2)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return (n + 1) // 2


def solution_path(design: DesignMatrix, y: np.ndarray, k_max: int, rule: str = "omp") -> SolutionPath:
    """Run k_max greedy steps and record the residual statistics of each.

    OMP picks the column with the largest absolute residual correlation; OLS
    picks the column whose inclusion maximally decreases the residual energy.
    Ties go to the smallest column index. A rank-deficient candidate stops the
    path early with status "rank_deficient" (K < k_max), never with an error.
    """
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")
    x = design.matrix.values
    n, p = x.shape
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise DimensionMismatchError(f"y has shape {y.shape}, expected ({n},)")
    if not 1 <= k_max <= min(n - 1, p):
        raise ValueError(f"k_max={k_max} must lie in [1, min(n-1, p)={min(n - 1, p)}]")

    state = OrthoBasisState(n, capacity=k_max)
    r = y.copy()
    corr = x.T @ r
    norms = [float(np.linalg.norm(r))]
    corr_inf = [float(np.max(np.abs(corr)))]
    selected: list[int] = []
    taken = np.zeros(p, dtype=bool)
    status = "complete"
    if rule == "ols":
        col_sq = np.einsum("ij,ij->j", x, x)
        res_col_sq = col_sq.copy()

    for k in range(k_max):
        if rule == "omp":
            score = np.abs(corr)
            score[taken] = -1.0
            t = int(np.argmax(score))
            if score[t] < 0.0:  # every column already selected (p exhausted)
                status = "rank_deficient"
                break
        else:
            admissible = ~taken & (res_col_sq > (RANK_TOL * RANK_TOL) * col_sq)
            if not admissible.any():
                status = "rank_deficient"
                break
            score = np.where(admissible, corr * corr / np.where(admissible, res_col_sq, 1.0), -1.0)
            t = int(np.argmax(score))
        try:
            state.append(design.matrix, t)
        except RankDeficientError:
            status = "rank_deficient"
            break
        selected.append(t)
        taken[t] = True
        q = state.orthonormal_basis[:, k]
        r -= q * (q @ r)
        # The exact residual norm is nonincreasing; clamp out rounding jitter
        # at machine-noise level so downstream ratios stay in [0,1].
        norms.append(min(float(np.linalg.norm(r)), norms[-1]))
        corr = x.T @ r
        corr_inf.append(float(np.max(np.abs(corr))))
        if rule == "ols":
            qx = q @ x
            np.maximum(res_col_sq - qx * qx, 0.0, out=res_col_sq)

    coeffs = state.least_squares_coeffs(y) if selected else np.zeros(0)
    return SolutionPath(
        rule=rule,
        selected=tuple(selected),
        residual_norms=np.array(norms),
        residual_corr_inf=np.array(corr_inf),
        coeffs_final=coeffs,
        K=len(selected),
        status=status,
    )


def _first_below(path: SolutionPath, values: np.ndarray, tau: float) -> SupportEstimate:
    hits = np.nonzero(values <= tau)[0]
    if len(hits):
        return path.estimate(int(hits[0]))
    return SupportEstimate(path.support_at(path.K), path.K, STATUS_EXHAUSTED)


def rpsc_threshold(sigma: float, n: int, eta: float | None = None) -> float:
    """Residual-power stopping level sigma*sqrt(n + 2 sqrt(n ln n)), with the
    optional high-SNR-consistent scaling by sigma^-eta."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    tau = sigma * math.sqrt(n + 2.0 * math.sqrt(n * math.log(n)))
    if eta is not None:
        tau *= sigma ** (-eta)
    return tau


def rcsc_threshold(sigma: float, p: int, eta: float | None = None) -> float:
    """Residual-correlation stopping level sigma*sqrt(2 ln p) (optional sigma^-eta)."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    tau = sigma * math.sqrt(2.0 * math.log(p))
    if eta is not None:
        tau *= sigma ** (-eta)
    return tau


def stop_fixed(path: SolutionPath, k0: int) -> SupportEstimate:
    """Keep exactly the first k0 selections."""
    if k0 > path.K:
        raise ValueError(f"k0={k0} exceeds path length K={path.K}")
    return path.estimate(k0)


def stop_rpsc(path: SolutionPath, sigma: float, n: int, eta: float | None = None) -> SupportEstimate:
    """Smallest k with ||r^k||_2 <= rpsc_threshold; exhausted if none qualifies."""
    return _first_below(path, path.residual_norms, rpsc_threshold(sigma, n, eta))


def stop_rcsc(path: SolutionPath, sigma: float, p: int, eta: float | None = None) -> SupportEstimate:
    """Smallest k with ||X^T r^k||_inf <= rcsc_threshold; exhausted if none qualifies."""
    return _first_below(path, path.residual_corr_inf, rcsc_threshold(sigma, p, eta))
