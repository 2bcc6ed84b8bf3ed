"""Closed-form parameter algebra for random Fibonacci sign processes.

A random Fibonacci sequence draws i.i.d. signs (+ with probability p, - with
probability 1-p) and iterates either the signed recurrence F'' = F' +- F
(linear case) or its absolute-value variant F'' = |F' +- F| (non-linear
case).  Everything downstream is governed by a handful of scalar constants
derived from p:

  c      probability that the letter appended right after a suffix deletion
         is an R; c = 1-p in the linear case (the letter is flipped after a
         deletion), c = p in the non-linear case.
  p_R    probability that a freshly appended R survives all later suffix
         deletions; the unique non-negative root of
         c^2 x^2 + (p^2 + 2c(1-p-c)) x + (1-c-2p)(1-c) = 0.
  p_1    probability that a surviving R is immediately followed by another
         surviving R.
  alpha  transition probability P(next = R | current = R) of the survivor
         chain; equals p_1 / p_R, lies in [1/2, 1].
  mu_R   stationary frequency of R among survivors, mu_R = 1/(2-alpha).
  sigma  compression rate: limiting ratio of surviving letters to drawn
         letters, sigma = (2 alpha - 1)(2 - alpha) / (alpha^2 - alpha + 1).

All maps here are pure closed forms.  Fraction inputs are propagated exactly
through the square-root-free formulas (p_from_alpha, compression_rate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union

Real = Union[float, Fraction]

PHI = (1 + math.sqrt(5)) / 2
INV_PHI = 2 / (1 + math.sqrt(5))

NONLINEAR_CRITICAL_P = Fraction(1, 3)


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelCase(Enum):
    LINEAR = "linear"
    NONLINEAR = "nonlinear"

    @classmethod
    def parse(cls, text: str) -> "ModelCase":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError(f"unknown model case {text!r}; use 'linear' or 'nonlinear'")


@dataclass(frozen=True)
class CaseParams:
    """All scalar parameters of one model instance."""

    p: float
    case: ModelCase
    c: float
    alpha: float
    p_R: float
    p_1: float
    sigma: float
    mu_R: float
    mu_L: float
    phi: float = PHI


def _check_p(p: Real) -> None:
    if not (0 < p <= 1):
        raise DomainError(f"sign probability p must lie in (0, 1], got {p}")


def _check_alpha(alpha: Real) -> None:
    if not (Fraction(1, 2) <= alpha <= 1):
        raise DomainError(f"alpha must lie in [1/2, 1], got {alpha}")


def append_prob_after_deletion(p: Real, case: ModelCase) -> Real:
    """Probability c of appending an R right after a suffix deletion."""
    _check_p(p)
    return (1 - p) if case is ModelCase.LINEAR else p


def alpha_from_p(p: Real, case: ModelCase) -> float:
    """Survivor-chain R->R transition probability as a function of p.

    Linear case: (3p - 2 + sqrt(5p^2 - 8p + 4)) / (2p).
    Non-linear case: 2p / (p + sqrt(p(4 - 3p))) for p > 1/3, and the limit
    value 1/2 for p <= 1/3 (the survivor chain degenerates there).
    """
    _check_p(p)
    p = float(p)
    if case is ModelCase.LINEAR:
        disc = 5 * p * p - 8 * p + 4
        return (3 * p - 2 + math.sqrt(disc)) / (2 * p)
    if p <= NONLINEAR_CRITICAL_P:
        return 0.5
    return 2 * p / (p + math.sqrt(p * (4 - 3 * p)))


def p_from_alpha(alpha: Real, case: ModelCase) -> Real:
    """Exact inverse of alpha_from_p on its range.

    Linear: p = (2 alpha - 1) / (3 alpha - alpha^2 - 1).
    Non-linear: p = alpha^2 / (alpha^2 - alpha + 1).
    Exact for Fraction input.
    """
    _check_alpha(alpha)
    if case is ModelCase.LINEAR:
        return (2 * alpha - 1) / (3 * alpha - alpha * alpha - 1)
    return alpha * alpha / (alpha * alpha - alpha + 1)


def survival_probability(p: Real, case: ModelCase) -> float:
    """Probability p_R that a freshly appended R survives.

    The unique non-negative root of
      c^2 x^2 + (p^2 + 2c(1-p-c)) x + (1-c-2p)(1-c) = 0.
    Returns 0 in the non-linear case for p <= 1/3 (the closed form is
    non-positive there) and 1 when c = 0 (linear, p = 1), where the
    quadratic degenerates to x - 1 = 0 and no deletion can ever occur.
    """
    _check_p(p)
    p = float(p)
    c = float(append_prob_after_deletion(p, case))
    if case is ModelCase.NONLINEAR and p <= NONLINEAR_CRITICAL_P:
        return 0.0
    if c == 0.0:
        return 1.0
    num = -p * p - 2 * c * (1 - p - c) + p * math.sqrt(p * p + 4 * c * (1 - p))
    return num / (2 * c * c)


def stationary_r_frequency(alpha: Real) -> Real:
    """Stationary frequency mu_R = 1/(2 - alpha) of R in the survivor chain."""
    _check_alpha(alpha)
    return 1 / (2 - alpha)


def compression_rate(alpha: Real) -> Real:
    """Limiting surviving-to-drawn letter ratio sigma(alpha).

    sigma = (2 alpha - 1)(2 - alpha) / (alpha^2 - alpha + 1); 0 at alpha=1/2
    (every letter is eventually deleted in the limit) and 1 at alpha=1 (no
    deletions at all).  Exact for Fraction input.
    """
    _check_alpha(alpha)
    return (2 * alpha - 1) * (2 - alpha) / (alpha * alpha - alpha + 1)


def build_params(p: Real, case: ModelCase) -> CaseParams:
    """Aggregate every derived constant for one (p, case) instance."""
    _check_p(p)
    p = float(p)
    c = float(append_prob_after_deletion(p, case))
    alpha = alpha_from_p(p, case)
    p_r = survival_probability(p, case)
    p_1 = alpha * p_r
    sigma = float(compression_rate(alpha))
    mu_r = float(stationary_r_frequency(alpha))
    return CaseParams(
        p=p,
        case=case,
        c=c,
        alpha=alpha,
        p_R=p_r,
        p_1=p_1,
        sigma=sigma,
        mu_R=mu_r,
        mu_L=1 - mu_r,
    )


def survival_quadratic_residual(p: Real, case: ModelCase, p_r: float) -> float:
    """Value of the defining quadratic at p_r (0 iff p_r is a root)."""
    p = float(p)
    c = float(append_prob_after_deletion(p, case))
    return c * c * p_r * p_r + (p * p + 2 * c * (1 - p - c)) * p_r + (1 - c - 2 * p) * (1 - c)
