"""Self-contained two-sample testing kernel.

Implements Welch's unequal-variance t-test with two-sided p-values. The
Student-t CDF is evaluated through the regularized incomplete beta
function I_x(a, b), computed with the standard continued-fraction
expansion (modified Lentz iteration) plus the symmetry
I_x(a, b) = 1 - I_{1-x}(b, a). Everything here is plain double-precision
Python; sums use math.fsum so results are exact-rounded and independent
of sample ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, InsufficientDataError

_MAX_ITER = 20000
_EPS = 3e-16
_TINY = 1e-300


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta integral (Lentz form).

    Valid and fast for x < (a + 1) / (a + b + 2); the caller applies the
    symmetry transform for the other half of the domain.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        # even step
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + coeff / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + coeff / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise DomainError(
        f"incomplete beta continued fraction did not converge "
        f"(a={a}, b={b}, x={x})"
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    """CDF of Student's t distribution with `df` degrees of freedom."""
    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * reg_inc_beta(df / (df + t * t), 0.5 * df, 0.5)
    return 1.0 - tail if t > 0 else tail


@dataclass(frozen=True)
class TestResult:
    """Welch's t-test outcome for samples a (baseline) and b.

    `mean_diff` is mean_b - mean_a, so positive values mean b sits above
    a. `degenerate` marks the pathological case of two zero-variance
    samples with different means, where p is reported as 0 instead of
    aborting a sweep.
    """

    t: float
    df: float
    p: float
    mean_a: float
    mean_b: float
    n_a: int
    n_b: int
    mean_diff: float
    degenerate: bool = False


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _sample_var(xs: Sequence[float], mean: float) -> float:
    return math.fsum((x - mean) ** 2 for x in xs) / (len(xs) - 1)


def welch_t(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Welch's unequal-variance t-test of b against a, two-sided.

    t = (mean_b - mean_a) / sqrt(s2_a/n_a + s2_b/n_b) with n-1 sample
    variances; degrees of freedom by Welch-Satterthwaite; p two-sided via
    the Student-t CDF. Requires at least two observations per sample.
    """
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise InsufficientDataError(
            f"need at least 2 observations per sample, got {n_a} and {n_b}"
        )
    mean_a = _mean(a)
    mean_b = _mean(b)
    var_a = _sample_var(a, mean_a)
    var_b = _sample_var(b, mean_b)
    diff = mean_b - mean_a
    fallback_df = float(n_a + n_b - 2)
    sa = var_a / n_a
    sb = var_b / n_b
    se2 = sa + sb
    if se2 == 0.0:
        # Zero (or underflowed) variance on both sides.
        if diff == 0.0:
            return TestResult(
                0.0, fallback_df, 1.0, mean_a, mean_b, n_a, n_b, 0.0
            )
        return TestResult(
            math.copysign(math.inf, diff),
            fallback_df,
            0.0,
            mean_a,
            mean_b,
            n_a,
            n_b,
            diff,
            degenerate=True,
        )
    t = diff / math.sqrt(se2)
    df_denom = sa * sa / (n_a - 1) + sb * sb / (n_b - 1)
    # Subnormal variances can square to zero; fall back rather than divide.
    df = se2 * se2 / df_denom if df_denom > 0.0 else fallback_df
    p = 2.0 * (1.0 - student_t_cdf(abs(t), df))
    return TestResult(t, df, p, mean_a, mean_b, n_a, n_b, diff)
