"""Concentration bounds and confidence radii for the sampled estimators.

Chernoff expressions run under mpmath at 120-bit precision because the
interesting exponents underflow doubles long before they reach zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

PRECISION_BITS = 120


@dataclass(frozen=True)
class ChernoffParams:
    """Parameters of P(X >= E[X] + lam) <= exp(-lam^2 / (2(Var + M*lam/3)))."""

    variance: float
    m_bound: float
    lam: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


@dataclass(frozen=True)
class ChernoffBound:
    value: mpmath.mpf
    degenerate: bool  # denominator vanished with lam > 0: exact 0 limit

    def __float__(self) -> float:
        return float(self.value)


def chernoff_bound(params: ChernoffParams) -> ChernoffBound:
    """exp(-lam^2 / (2(Var + M*lam/3))) in extended precision."""
    with mpmath.workprec(PRECISION_BITS):
        lam = mpmath.mpf(params.lam)
        if lam == 0:
            return ChernoffBound(mpmath.mpf(1), False)
        denom = 2 * (mpmath.mpf(params.variance) + mpmath.mpf(params.m_bound) * lam / 3)
        if denom <= 0:
            return ChernoffBound(mpmath.mpf(0), True)
        return ChernoffBound(mpmath.exp(-(lam * lam) / denom), False)


def hoeffding_radius(samples: int, confidence: float) -> float:
    """Two-sided Hoeffding radius for a mean of [0,1] samples."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0,1)")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * samples))


def chernoff_radius(samples: int, confidence: float, variance_hat: float) -> float:
    """Two-sided Bernstein-style radius from the sum-form inequality.

    Solves N r^2 / (2(v + r/3)) = ln(2/(1-confidence)) for r, using the
    empirical per-sample variance v.
    """
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0,1)")
    big_l = math.log(2.0 / (1.0 - confidence))
    a = 2.0 * big_l / (3.0 * samples)
    return 0.5 * (a + math.sqrt(a * a + 8.0 * big_l * max(variance_hat, 0.0) / samples))
