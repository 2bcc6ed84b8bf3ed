"""Growth-rate computations: gamma(alpha), gamma(p), derivative, cross-checks.

The almost-sure exponential growth rate equals the integral of log x against
the alternating Stern-Brocot measure nu_alpha.  Evaluating that singular
integral directly converges slowly, so gamma_of_alpha uses an exact
reformulation with a smooth bounded kernel: the measure is stationary for
the random piece maps x -> 1 + 1/x (probability alpha) and x -> 1/(1 + x)
(probability 1-alpha), and its image under x -> 1/x is nu_{1-alpha}.
Chasing log x through those two exact facts gives

    gamma(alpha) = (2 alpha - 1)/(alpha^2 - alpha + 1) * (J(alpha) + J(1-alpha)),
    J(beta)      = integral of log(1 + x) over [0, 1] against nu_beta,

where the integrand of J is analytic and monotone on a compact interval, so
the certified leaf quadrature converges fast enough for 1e-8 tolerances in
seconds.  The identity is antisymmetric under alpha -> 1-alpha by
construction, consistent with gamma(alpha) = -gamma(1-alpha).

Independent routes kept deliberately separate from the formula above:
gamma_split_check integrates log x over [0,1] and [1,inf] by the direct
mediant-node quadrature, and gamma_via_nu_f integrates log|m| over the
two-sided stationary measure; both must agree with gamma_of_alpha within
their reported bounds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measure import (
    LeafMeasure,
    RefinePolicy,
    SignedLineMeasure,
    _INT64_RANK_CAP,
    _log_tail_bound,
    _refine_arrays,
    _refine_chunks,
    _tau_guess,
    _tau_update,
    integrate_log,
    integrate_split,
    nu_f_build,
    refine_for_log_tol,
)
from .params import PHI, DomainError, ModelCase, NONLINEAR_CRITICAL_P, alpha_from_p

METHOD_QUADRATURE = "quadrature"
METHOD_DIRAC = "dirac"
METHOD_ZERO = "zero_regime"
METHOD_FURSTENBERG = "furstenberg"

LOG_PHI = math.log(PHI)


@dataclass(frozen=True)
class GammaResult:
    gamma: float
    error_bound: float
    alpha: float
    p: float | None
    case: ModelCase | None
    method: str

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "case": self.case.value if self.case is not None else None,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "error_bound": self.error_bound,
            "method": self.method,
        }


def _gamma_coefficient(alpha: float) -> float:
    return (2 * alpha - 1) / (alpha * alpha - alpha + 1)


def _smooth_unit_integral(beta: float, target: float, max_attempts: int = 12):
    """Certified integral of log(1+x) over [0, 1] against nu_beta.

    Adaptive refinement of the [0, 1] subtree; each leaf contributes
    mass * (log1p(lo) + log1p(hi))/2 with certified error
    mass * (log1p(hi) - log1p(lo))/2 (the integrand is increasing).  Streams
    over retirement chunks so memory stays at the frontier size.
    """
    if not (0 <= beta < 1):
        raise DomainError(f"smooth unit integral needs beta in [0, 1), got {beta}")
    start = (0, 1, 1, 1, 1, 1.0 - beta, 0, 1)
    if beta == 0:
        # all mass on [0, 1]; the refinement still works (factors 0 and 1)
        start = (0, 1, 1, 1, 1, 1.0, 0, 1)
    tau = _tau_guess(target, 0.12)
    err = math.inf
    for _ in range(max_attempts):
        policy = RefinePolicy(mass_eps=1e-300, max_rank=_INT64_RANK_CAP,
                              tail_eps=1e-30, contrib_eps=tau)
        value = 0.0
        err = 0.0
        total_mass = 0.0
        for ln, ld, hn, hd, rank, mass, _, _ in _refine_chunks(
            beta, policy, start=start, score_mode="log1p"
        ):
            glo = np.log1p(ln / ld)
            ghi = np.log1p(hn / hd)
            value += float(np.sum(mass * (glo + ghi)))
            err += float(np.sum(mass * (ghi - glo)))
            total_mass += float(np.sum(mass))
        value *= 0.5
        err = 0.5 * err + 1e-15 * (total_mass + 1)
        if err <= target:
            return value, err
        tau = _tau_update(tau, err, target)
    raise DomainError(f"could not certify smooth integral at beta={beta}: error {err}")


def gamma_of_alpha(alpha: float, tol: float = 1e-8) -> GammaResult:
    """Growth rate gamma(alpha) with a certified absolute error bound <= tol.

    alpha = 1 is the Dirac mass at the golden ratio (gamma = log phi),
    alpha = 1/2 gives 0, and alpha < 1/2 is defined by the antisymmetry
    gamma(alpha) = -gamma(1-alpha).
    """
    if not (0 <= alpha <= 1):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if alpha == 1:
        return GammaResult(LOG_PHI, 0.0, alpha, None, None, METHOD_DIRAC)
    if alpha == 0.5:
        return GammaResult(0.0, 0.0, alpha, None, None, METHOD_ZERO)
    if alpha < 0.5:
        flipped = gamma_of_alpha(1 - alpha, tol)
        return GammaResult(-flipped.gamma, flipped.error_bound, alpha, None, None,
                           flipped.method)
    coeff = _gamma_coefficient(alpha)
    target = tol / (2 * coeff)
    v1, e1 = _smooth_unit_integral(alpha, target)
    v2, e2 = _smooth_unit_integral(1 - alpha, target)
    gamma = coeff * (v1 + v2)
    err = coeff * (e1 + e2) + 1e-15 * abs(gamma)
    return GammaResult(gamma, err, alpha, None, None, METHOD_QUADRATURE)


def gamma_of_p(p: float, case: ModelCase, tol: float = 1e-8) -> GammaResult:
    """Growth rate as a function of the sign probability p.

    Non-linear case with p <= 1/3 sits in the zero regime exactly; otherwise
    the rate is gamma_of_alpha at alpha_from_p(p, case).
    """
    if not (0 < p <= 1):
        raise DomainError(f"p must lie in (0, 1], got {p}")
    if case is ModelCase.NONLINEAR and p <= NONLINEAR_CRITICAL_P:
        return GammaResult(0.0, 0.0, 0.5, p, case, METHOD_ZERO)
    alpha = alpha_from_p(p, case)
    base = gamma_of_alpha(alpha, tol)
    return GammaResult(base.gamma, base.error_bound, alpha, p, case, base.method)


@dataclass(frozen=True)
class SplitRatios:
    """Measured half-line integral ratios of the growth-rate integral."""

    ratio_below: float
    ratio_above: float
    below1: float
    above1: float
    below1_err: float
    above1_err: float

    def ratio_error_bound(self) -> float:
        total = self.below1 + self.above1
        spread = abs(self.below1) + abs(self.above1)
        e = self.below1_err + self.above1_err
        return (spread * e + abs(total) * e) / (total * total)


def gamma_split_check(alpha: float, tol: float = 1e-7) -> SplitRatios:
    """Measured ratios (below-1, above-1) of the log integral via quadrature.

    tol is the certified absolute target for each half-line integral; the
    ratios are formed from the measured halves.  Closed-form targets are
    (alpha+1)(1-alpha)/(1-2alpha) and alpha(alpha-2)/(1-2alpha).
    """
    if not (0.5 < alpha < 1):
        raise DomainError("split check needs 1/2 < alpha < 1")
    measure = refine_for_log_tol(alpha, tol)
    sp = integrate_split(measure)
    total = sp.below1 + sp.above1
    return SplitRatios(
        ratio_below=sp.below1 / total,
        ratio_above=sp.above1 / total,
        below1=sp.below1,
        above1=sp.above1,
        below1_err=sp.below1_err,
        above1_err=sp.above1_err,
    )


def split_ratio_closed_forms(alpha: float) -> tuple[float, float]:
    """Closed-form half-line ratios; they always sum to 1."""
    return (
        (alpha + 1) * (1 - alpha) / (1 - 2 * alpha),
        alpha * (alpha - 2) / (1 - 2 * alpha),
    )


# ---------------------------------------------------------------------------
# Derivative of gamma with respect to alpha
# ---------------------------------------------------------------------------


def _stable_kernel(v: np.ndarray, u) -> np.ndarray:
    """log((x+y+xy)/(x+y+1)) in the compactified coordinates v=x/(1+x), u=y/(1+y).

    Equals log(1 - (1-u)(1-v)) - log(1 - u v); increasing in each argument;
    singular only at (0,0) and (1,1).
    """
    return np.log(1.0 - (1.0 - u) * (1.0 - v)) - np.log(1.0 - u * v)


def _double_log_kernel(alpha: float, target: float, max_attempts: int = 8):
    """Certified product-measure integral of log((x+y+xy)/(x+y+1)).

    Quadrature over all leaf pairs of one marginal refinement; per-cell
    bounds come from the kernel's monotonicity, and the two corner cell
    pairs (both leaves at 0, both at infinity) are covered by the analytic
    one-dimensional tail bounds.
    """
    tau = _tau_guess(target, 5.6)
    err = math.inf
    for _ in range(max_attempts):
        policy = RefinePolicy(mass_eps=1e-300, max_rank=_INT64_RANK_CAP,
                              tail_eps=1e-30, contrib_eps=tau)
        ln, ld, hn, hd, rank, mass, _, _ = _refine_arrays(alpha, policy)
        lo = ln / ld
        hi_inf = hd == 0
        hi_safe = np.where(hi_inf, 1.0, hn / np.where(hi_inf, 1, hd))
        v_lo = lo / (1.0 + lo)
        v_hi = np.where(hi_inf, 1.0, hi_safe / (1.0 + hi_safe))
        left = int(np.nonzero(ln == 0)[0][0])
        right = int(np.nonzero(hi_inf)[0][0])
        n = len(mass)
        value = 0.0
        errq = 0.0
        block = max(1, int(4e6 // max(n, 1)))
        with np.errstate(divide="ignore"):
            for s in range(0, n, block):
                e = min(s + block, n)
                klo = _stable_kernel(v_lo[s:e, None], v_lo[None, :])
                khi = _stable_kernel(v_hi[s:e, None], v_hi[None, :])
                if s <= left < e:
                    klo[left - s, left] = 0.0
                    khi[left - s, left] = 0.0
                if s <= right < e:
                    klo[right - s, right] = 0.0
                    khi[right - s, right] = 0.0
                if not (np.isfinite(klo).all() and np.isfinite(khi).all()):
                    raise AssertionError("kernel singular outside the corner cells")
                w = mass[s:e, None] * mass[None, :]
                value += float(np.sum(w * (klo + khi)))
                errq += float(np.sum(w * (khi - klo)))
        value *= 0.5
        errq *= 0.5
        beta = max(alpha, 1 - alpha)
        m_l, d_l = float(mass[left]), int(hd[left])
        m_r, a_r = float(mass[right]), int(ln[right])
        corner = m_l * (_log_tail_bound(d_l, m_l, beta) + 2 * math.log(2) * m_l)
        corner += math.log(3) * m_r * m_r + 2 * m_r * _log_tail_bound(a_r, m_r, beta)
        err = errq + corner + 1e-14
        if err <= target:
            return value, err
        tau = _tau_update(tau, err, target)
    raise DomainError(f"could not certify the product integral at alpha={alpha}: {err}")


def gamma_prime(alpha: float, tol: float = 1e-3) -> float:
    """Derivative of gamma with respect to alpha, for 1/2 < alpha <= 1.

    gamma'(a) = gamma(a) (1+2a-2a^2)/((2a-1)(a^2-a+1))
              + (2a-1)/(a^2-a+1) * Int Int log((x+y+xy)/(x+y+1)) dnu dnu.

    At alpha = 1 both factors collapse onto the Dirac pair (phi, phi) and
    the value is exactly (log 5)/2.  Values of alpha within 1e-3 of 1/2 are
    refused: the first coefficient blows up and the formula's limit there is
    an open indeterminate form.
    """
    if alpha == 1:
        return LOG_PHI + math.log((2 * PHI + PHI * PHI) / (2 * PHI + 1))
    if alpha <= 0.5 + 1e-3:
        raise DomainError("gamma_prime requires alpha > 1/2 + 1e-3")
    denom = alpha * alpha - alpha + 1
    coef_g = (1 + 2 * alpha - 2 * alpha * alpha) / ((2 * alpha - 1) * denom)
    coef_d = (2 * alpha - 1) / denom
    tol_g = tol / (4 * max(abs(coef_g), 1.0))
    tol_d = tol / (2 * coef_d)
    g = gamma_of_alpha(alpha, tol_g)
    dbl, _ = _double_log_kernel(alpha, tol_d)
    return coef_g * g.gamma + coef_d * dbl


def dgamma_dp_at_1(case: ModelCase) -> float:
    """d(gamma_p)/dp at p = 1; equals (log 5)/2 in both cases.

    alpha(p) has unit derivative at p = 1 in both cases, so the chain rule
    reduces this to gamma_prime(1).
    """
    return gamma_prime(1.0) * 1.0


def gamma_via_nu_f(p: float, tol: float = 1e-6, max_attempts: int = 12) -> GammaResult:
    """Growth rate by integrating log|m| over the two-sided measure.

    Independent cross-check of the half-line route: builds the signed
    measure of the matrix-product chain and integrates log|m| over both
    sides with the standard leaf quadrature.
    """
    if not (0 < p < 1):
        raise DomainError("the two-sided route needs 0 < p < 1")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    tau = _tau_guess(tol, 2.8)
    err = math.inf
    slm: SignedLineMeasure | None = None
    for _ in range(max_attempts):
        policy = RefinePolicy(mass_eps=1e-300, max_rank=_INT64_RANK_CAP,
                              tail_eps=tol / 8, contrib_eps=tau)
        slm = nu_f_build(p, policy)
        v_pos, e_pos = integrate_log(slm.pos)
        if slm.neg_mirror is slm.pos:
            v_neg, e_neg = v_pos, e_pos
        else:
            v_neg, e_neg = integrate_log(slm.neg_mirror)
        value = slm.m_plus * v_pos + slm.m_minus * v_neg
        err = slm.m_plus * e_pos + slm.m_minus * e_neg
        if err <= tol:
            return GammaResult(value, err, slm.alpha, p, ModelCase.LINEAR,
                               METHOD_FURSTENBERG)
        tau = _tau_update(tau, err, tol)
    raise DomainError(f"could not certify the two-sided integral at p={p}: {err}")


def _curve_point(args) -> tuple[float, float, float, float]:
    p, case_value, tol = args
    res = gamma_of_p(p, ModelCase(case_value), tol)
    return (p, res.alpha, res.gamma, res.error_bound)


def gamma_curve(case: ModelCase, grid, tol: float = 1e-8,
                threads: int | None = None) -> list[tuple[float, float, float, float]]:
    """Rows (p, alpha, gamma, error_bound) over a probability grid."""
    jobs = [(float(p), case.value, tol) for p in grid]
    for p, _, _ in jobs:
        if not (0 < p <= 1):
            raise DomainError(f"grid point {p} outside (0, 1]")
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_curve_point, jobs))
    return [_curve_point(j) for j in jobs]
