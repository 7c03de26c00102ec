"""Regularized incomplete Beta CDF, its inverse, and the residual-ratio
threshold sequence Gamma(k) used by the RRT/RRTA selectors.

Everything here is scalar and dependency-free (math module only): the
selectors drive the inverse CDF at probabilities as small as 1e-300, a regime
where library wrappers that do not work in the log domain underflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

# Probabilities below this floor are clamped up before threshold evaluation so
# log-domain arithmetic stays finite while "threshold -> 0" behavior survives.
ALPHA_FLOOR = 1e-300

_CF_EPS = 1e-15
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


def _check_ab(a: float, b: float) -> None:
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"beta parameters must be positive, got a={a}, b={b}")


def log_beta_fn(a: float, b: float) -> float:
    """ln B(a,b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a+b)."""
    _check_ab(a, b)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the standard continued fraction for the
    # incomplete beta; converges quickly for x < (a+1)/(a+b+2).
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return h


def beta_cdf(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a,b), i.e. the Beta(a,b) CDF at x."""
    _check_ab(a, b)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = a * math.log(x) + b * math.log1p(-x) - log_beta_fn(a, b)
    front = math.exp(ln_front) if ln_front > -745.0 else 0.0
    if x < (a + 1.0) / (a + b + 2.0):
        val = front * _beta_continued_fraction(a, b, x) / a
    else:
        val = 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b
    return min(max(val, 0.0), 1.0)


def _beta_pdf(a: float, b: float, x: float, ln_beta: float) -> float:
    if not 0.0 < x < 1.0:
        return 0.0
    ln_pdf = (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - ln_beta
    return math.exp(ln_pdf) if ln_pdf > -745.0 else 0.0


def _beta_inv_core(a: float, b: float, z: float) -> float:
    # Bracketed Newton with bisection safeguard. For tiny z the leading-order
    # quantile x ~ (a z B(a,b))^(1/a), evaluated in the log domain, seeds the
    # iteration; otherwise start from the middle of the bracket.
    ln_beta = log_beta_fn(a, b)
    if z < 1e-8:
        ln_seed = (math.log(a) + math.log(z) + ln_beta) / a
        x = math.exp(ln_seed) if ln_seed > -745.0 else 0.0
        if x == 0.0:
            # True quantile is below the smallest positive double; 0 is the
            # closest representable point and satisfies |F(0) - z| = z.
            return 0.0
        x = min(x, 1.0 - 1e-16)
    else:
        x = 0.5
    lo, hi = 0.0, 1.0
    for _ in range(200):
        f = beta_cdf(a, b, x) - z
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        else:
            return x
        if abs(f) <= 1e-13 * z or abs(f) < 1e-16:
            return x
        pdf = _beta_pdf(a, b, x, ln_beta)
        x_new = x - f / pdf if pdf > 0.0 else -1.0
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            return x
        x = x_new
    return x


def beta_cdf_inv(a: float, b: float, z: float) -> float:
    """Inverse of beta_cdf in its first argument: x with I_x(a,b) = z.

    Accurate to |beta_cdf(a, b, x) - z| <= 1e-10; for z -> 1 the achievable
    accuracy is limited by the spacing of doubles near x = 1.
    """
    _check_ab(a, b)
    if not 0.0 <= z <= 1.0:
        raise DomainError(f"z must lie in [0,1], got {z}")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return 1.0
    if z > 0.75:
        # Work on the reflected tail for accuracy near 1 (1 - z is exact here).
        return 1.0 - _beta_inv_core(b, a, 1.0 - z)
    return _beta_inv_core(a, b, z)


def rrt_threshold(n: int, p: int, k_max: int, alpha: float, k: int) -> float:
    """Threshold Gamma(k) = sqrt(F^-1_{(n-k)/2, 1/2}(alpha / (k_max (p-k+1)))).

    The residual ratio at step k of a greedy path, conditioned on the true
    support being covered, is stochastically bounded by a Beta((n-k)/2, 1/2)
    variable; Gamma(k) is the quantile that puts total level alpha across all
    steps and candidate columns.
    """
    if k >= n:
        raise DomainError(f"k={k} must be < n={n} (beta parameter would be <= 0)")
    if not 1 <= k <= k_max:
        raise DomainError(f"k={k} must lie in [1, k_max={k_max}]")
    if k_max >= n:
        raise DomainError(f"k_max={k_max} must be < n={n}")
    if p < k:
        raise DomainError(f"p={p} must be >= k={k}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0,1), got {alpha}")
    alpha = max(alpha, ALPHA_FLOOR)
    z = alpha / (k_max * (p - k + 1))
    if z == 0.0:  # denominator huge enough to underflow the clamped alpha
        z = 5e-324
    return math.sqrt(beta_cdf_inv((n - k) / 2.0, 0.5, z))


@dataclass(frozen=True, eq=False)
class ThresholdTable:
    """Thresholds Gamma(1..len(values)) for fixed (n, p, k_max, alpha).

    k_max is the parameter entering the per-step level alpha/(k_max (p-k+1));
    values normally has k_max entries but may be truncated for paths that
    terminated early.
    """

    n: int
    p: int
    k_max: int
    alpha: float
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def truncated(self, m: int) -> "ThresholdTable":
        """First m thresholds, unchanged (same k_max in the level)."""
        if m > len(self.values):
            raise ValueError(f"cannot extend table of length {len(self.values)} to {m}")
        return ThresholdTable(self.n, self.p, self.k_max, self.alpha, self.values[:m])


@lru_cache(maxsize=512)
def _threshold_values(n: int, p: int, k_max: int, alpha: float) -> tuple[float, ...]:
    return tuple(rrt_threshold(n, p, k_max, alpha, k) for k in range(1, k_max + 1))


def build_threshold_table(n: int, p: int, k_max: int, alpha: float) -> ThresholdTable:
    """Evaluate rrt_threshold for k = 1..k_max (cached on the parameters)."""
    values = np.array(_threshold_values(n, p, k_max, float(alpha)))
    values.flags.writeable = False
    return ThresholdTable(n, p, k_max, float(alpha), values)
