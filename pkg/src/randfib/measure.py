"""The alternating Stern-Brocot measure, its quadrature, and exact identities.

For a parameter alpha in (0, 1), nu_alpha is the probability measure on
[0, infinity] fixed by the following subdivision rule: the rank-0 interval
[0, inf] gives mass 1-alpha to [0, 1] and alpha to [1, inf]; thereafter a
rank-r interval passes a proportion alpha of its mass to its left child when
r is odd and to its right child when r is even.  Equivalently, the mass of
the interval reached by a suffix with i single-R pieces and j elbow pieces
is alpha^i (1-alpha)^j.

The measure is purely singular, so integration works on an adaptive leaf
partition: every interior leaf contributes mass * log(mediant) with a
certified error of at most mass * (log hi - log lo), while the two extreme
leaves (touching 0 and infinity) are expanded analytically band by band
along their boundary chain, whose masses alternate between the factors
alpha and 1-alpha; the remainder beyond the expansion is covered by the
closed-form geometric bound of _log_tail_bound.  All reported error bounds
dominate the true quadrature error.

Exact (Fraction) evaluation is available wherever identities must hold
exactly: interval masses, the change-of-variable identities, Minkowski's
question-mark function ?(x) = 2 nu_{1/2}([0, x]), and the invariance
residual of the two-sided measure used for the matrix-product route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

from .cfrac import ERat, SternBrocotInterval, sb_children
from .params import DomainError, ModelCase, alpha_from_p, p_from_alpha

Alpha = Union[float, Fraction]

_INT64_RANK_CAP = 88  # Fibonacci-sized entries stay below 2^63 up to here


class PolicyError(ValueError):
    """Refinement policy cannot terminate or is inconsistent."""


class TailDivergenceError(ValueError):
    """Unbounded refinement requested where the tail handling needs a cap."""


class UnreachableIntervalError(ValueError):
    """Interval is not a node of the Stern-Brocot subdivision tree."""


@dataclass(frozen=True)
class RefinePolicy:
    """Stopping rule for the adaptive leaf refinement.

    A leaf is split while its mass exceeds mass_eps and its rank is below
    max_rank.  If contrib_eps is set, splitting additionally stops once the
    leaf's log-integration error contribution mass*(log hi - log lo) drops
    below contrib_eps (extreme leaves count their contribution as the bare
    mass); this is what makes tight integration tolerances affordable.

    tail_eps caps the certified remainder allowed per extreme-chain
    expansion during integration.
    """

    mass_eps: float = 1e-14
    max_rank: int | None = 64
    tail_eps: float = 1e-10
    contrib_eps: float | None = 1e-10

    def __post_init__(self) -> None:
        if self.mass_eps <= 0 and self.max_rank is None and self.contrib_eps is None:
            raise PolicyError("refinement cannot terminate: eps <= 0 and rank unbounded")
        if self.max_rank is not None and self.max_rank < 0:
            raise PolicyError("max_rank must be non-negative")
        if self.tail_eps <= 0:
            raise PolicyError("tail_eps must be positive")


@dataclass(frozen=True)
class MeasureLeaf:
    interval: SternBrocotInterval
    exp_r: int
    exp_rl: int
    mass: Alpha


_ROOT_ROW = (0, 1, 1, 0, 0, 1.0, 0, 0)  # ln, ld, hn, hd, rank, mass, exp_r, exp_rl


def _split_mask(ln, ld, hn, hd, rank, mass, policy, score_mode):
    """Vectorized stopping rule; returns the boolean mask of rows to split."""
    ok = np.ones(len(ln), dtype=bool)
    if policy.max_rank is not None:
        ok &= rank < policy.max_rank
    ok &= rank < _INT64_RANK_CAP
    ok &= mass > policy.mass_eps
    if policy.contrib_eps is not None:
        ext = (ln == 0) | (hd == 0)
        score = np.empty(len(ln))
        ii = ~ext
        if score_mode == "logx":
            score[ii] = mass[ii] * (
                np.log(hn[ii].astype(float) / hd[ii]) - np.log(ln[ii].astype(float) / ld[ii])
            )
        else:  # log1p: range of log(1 + x) over the leaf
            score[ii] = mass[ii] * (
                np.log1p(hn[ii].astype(float) / hd[ii]) - np.log1p(ln[ii].astype(float) / ld[ii])
            )
        score[ext] = mass[ext]
        ok &= score > policy.contrib_eps
    return ok


def _refine_chunks(alpha: float, policy: RefinePolicy, start=_ROOT_ROW, score_mode="logx"):
    """Level-synchronous refinement; yields retired columnar leaf chunks.

    Chunks come out in retirement order, not positional order.  score_mode
    selects which integrand's per-leaf error contribution the contrib_eps
    threshold is measured against.
    """
    ln = np.array([start[0]], dtype=np.int64)
    ld = np.array([start[1]], dtype=np.int64)
    hn = np.array([start[2]], dtype=np.int64)
    hd = np.array([start[3]], dtype=np.int64)
    rank = np.array([start[4]], dtype=np.int64)
    mass = np.array([start[5]], dtype=np.float64)
    er = np.array([start[6]], dtype=np.int64)
    el = np.array([start[7]], dtype=np.int64)
    while len(ln):
        split = _split_mask(ln, ld, hn, hd, rank, mass, policy, score_mode)
        keep = ~split
        if keep.any():
            yield (ln[keep], ld[keep], hn[keep], hd[keep], rank[keep], mass[keep], er[keep], el[keep])
        if not split.any():
            return
        ln, ld, hn, hd = ln[split], ld[split], hn[split], hd[split]
        rank, mass, er, el = rank[split], mass[split], er[split], el[split]
        mn, md = ln + hn, ld + hd
        odd = (rank % 2) == 1
        f_left = np.where(odd, alpha, 1.0 - alpha)
        # alpha-exponent increments where the alpha-proportion child is taken
        left_gets_alpha = odd
        ln2 = np.concatenate([ln, mn])
        ld2 = np.concatenate([ld, md])
        hn2 = np.concatenate([mn, hn])
        hd2 = np.concatenate([md, hd])
        er2 = np.concatenate([er + left_gets_alpha, er + ~left_gets_alpha])
        el2 = np.concatenate([el + ~left_gets_alpha, el + left_gets_alpha])
        mass = np.concatenate([mass * f_left, mass * (1.0 - f_left)])
        rank = np.concatenate([rank + 1, rank + 1])
        ln, ld, hn, hd, er, el = ln2, ld2, hn2, hd2, er2, el2


def _refine_arrays(alpha: float, policy: RefinePolicy, start=_ROOT_ROW, score_mode="logx"):
    """Materialized form of _refine_chunks."""
    out = list(_refine_chunks(alpha, policy, start, score_mode))
    return tuple(np.concatenate([chunk[i] for chunk in out]) for i in range(8))


def _refine_exact(alpha: Fraction, policy: RefinePolicy, start=None):
    """Stack-based exact refinement with Fraction masses (small ranks only)."""
    if start is None:
        start = (0, 1, 1, 0, 0, Fraction(1), 0, 0)
    stack = [start]
    out = []
    max_rank = policy.max_rank if policy.max_rank is not None else _INT64_RANK_CAP
    while stack:
        ln, ld, hn, hd, rank, mass, er, el = stack.pop()
        if rank >= max_rank or mass <= policy.mass_eps:
            out.append((ln, ld, hn, hd, rank, mass, er, el))
            continue
        mn, md = ln + hn, ld + hd
        odd = rank % 2 == 1
        f_left = alpha if odd else 1 - alpha
        da_l, da_r = (1, 0) if odd else (0, 1)
        stack.append((mn, md, hn, hd, rank + 1, mass * (1 - f_left), er + da_r, el + da_l))
        stack.append((ln, ld, mn, md, rank + 1, mass * f_left, er + da_l, el + da_r))
    return out


@dataclass
class LeafMeasure:
    """Finite leaf partition of [0, infinity] with masses alpha^i (1-alpha)^j.

    Columnar storage: lo_num/lo_den/hi_num/hi_den/rank/exp_r/exp_rl/mass.
    Exact mode (Fraction alpha) keeps Python ints and Fraction masses.
    """

    alpha: Alpha
    policy: RefinePolicy
    lo_num: np.ndarray | list
    lo_den: np.ndarray | list
    hi_num: np.ndarray | list
    hi_den: np.ndarray | list
    rank: np.ndarray | list
    exp_r: np.ndarray | list
    exp_rl: np.ndarray | list
    mass: np.ndarray | list
    exact: bool = False

    def __len__(self) -> int:
        return len(self.lo_num)

    def total_mass(self):
        if self.exact:
            return sum(self.mass)
        return float(np.sum(self.mass))

    def iter_leaves(self) -> Iterator[MeasureLeaf]:
        for i in range(len(self)):
            iv = SternBrocotInterval(
                ERat(int(self.lo_num[i]), int(self.lo_den[i])),
                ERat(int(self.hi_num[i]), int(self.hi_den[i])),
                int(self.rank[i]),
            )
            yield MeasureLeaf(iv, int(self.exp_r[i]), int(self.exp_rl[i]), self.mass[i])

    def sorted_indices(self) -> list[int]:
        return sorted(
            range(len(self)),
            key=lambda i: Fraction(int(self.lo_num[i]), int(self.lo_den[i])),
        )


def refine_nu_alpha(alpha: Alpha, policy: RefinePolicy | None = None) -> LeafMeasure:
    """Refine nu_alpha into a leaf partition under the given policy.

    alpha = 1 (Dirac mass at the golden ratio) and alpha = 0 are refused;
    handle those limits analytically upstream.  Fraction alpha produces
    exact Fraction masses.
    """
    policy = policy or RefinePolicy()
    if not (0 < alpha < 1):
        raise DomainError(f"refinement needs 0 < alpha < 1, got {alpha}")
    if isinstance(alpha, Fraction):
        rows = _refine_exact(alpha, policy)
        cols = list(zip(*rows))
        return LeafMeasure(
            alpha, policy,
            list(cols[0]), list(cols[1]), list(cols[2]), list(cols[3]),
            list(cols[4]), list(cols[6]), list(cols[7]), list(cols[5]),
            exact=True,
        )
    ln, ld, hn, hd, rank, mass, er, el = _refine_arrays(float(alpha), policy)
    return LeafMeasure(float(alpha), policy, ln, ld, hn, hd, rank, er, el, mass, exact=False)


def mass_of_interval(alpha: Alpha, iv: SternBrocotInterval) -> Alpha:
    """Mass of a subdivision-tree interval, by exact descent from the root.

    Exact product of alpha / (1-alpha) factors when alpha is a Fraction.
    """
    return _walk_mass(alpha, (iv.lo.num, iv.lo.den), (iv.hi.num, iv.hi.den))


def _log_tail_bound(edge: int, mass: float, beta: float) -> float:
    """Certified bound for the integral of |log x| over an extreme region.

    Covers [0, 1/edge] (left) or [edge, infinity] (right) given the region's
    mass: successive boundary bands have mass at most mass*beta^k and |log|
    at most log(edge+k+1), which sums to the closed form below.
    """
    return mass * (math.log(edge + 1) / (1 - beta) + beta / ((1 - beta) ** 2 * (edge + 1)))


def _expand_left_tail(alpha: float, d: int, rank: int, mass: float, tail_eps: float):
    """Band expansion of the extreme leaf [0, 1/d]; returns (value, err)."""
    beta = max(alpha, 1 - alpha)
    val = err = 0.0
    while _log_tail_bound(d, mass, beta) > tail_eps and d < 10**7:
        f_left = alpha if rank % 2 == 1 else 1 - alpha
        band = mass * (1 - f_left)
        val += band * math.log(2.0 / (2 * d + 1))
        err += band * math.log((d + 1) / d)
        mass *= f_left
        d += 1
        rank += 1
    return val, err + _log_tail_bound(d, mass, beta)


def _expand_right_tail(alpha: float, a: int, rank: int, mass: float, tail_eps: float):
    """Band expansion of the extreme leaf [a, infinity]; returns (value, err)."""
    beta = max(alpha, 1 - alpha)
    val = err = 0.0
    while _log_tail_bound(a, mass, beta) > tail_eps and a < 10**7:
        f_right = (1 - alpha) if rank % 2 == 1 else alpha
        band = mass * (1 - f_right)
        val += band * math.log((2 * a + 1) / 2.0)
        err += band * math.log((a + 1) / a)
        mass *= f_right
        a += 1
        rank += 1
    return val, err + _log_tail_bound(a, mass, beta)


def _float_cols(measure: LeafMeasure):
    if measure.exact:
        ln = np.array([int(v) for v in measure.lo_num], dtype=np.int64)
        ld = np.array([int(v) for v in measure.lo_den], dtype=np.int64)
        hn = np.array([int(v) for v in measure.hi_num], dtype=np.int64)
        hd = np.array([int(v) for v in measure.hi_den], dtype=np.int64)
        rank = np.array([int(v) for v in measure.rank], dtype=np.int64)
        mass = np.array([float(v) for v in measure.mass], dtype=np.float64)
        return ln, ld, hn, hd, rank, mass
    return (measure.lo_num, measure.lo_den, measure.hi_num, measure.hi_den,
            measure.rank, measure.mass)


def _integrate_log_parts(measure: LeafMeasure):
    """Shared core of integrate_log / integrate_split.

    Returns (below, above, below_err, above_err) where "below" collects the
    leaves inside [0, 1] and "above" those inside [1, infinity]; a sole
    unrefined root leaf is split once so the two halves never mix.
    """
    alpha = float(measure.alpha)
    if not (0 < alpha < 1):
        raise DomainError("log integration needs 0 < alpha < 1")
    if alpha < 0.5 and measure.policy.max_rank is None:
        raise TailDivergenceError("alpha below 1/2 requires a bounded refinement policy")
    ln, ld, hn, hd, rank, mass = _float_cols(measure)
    if len(ln) == 1 and ln[0] == 0 and hd[0] == 0:
        m = float(mass[0])
        ln = np.array([0, 1], dtype=np.int64)
        ld = np.array([1, 1], dtype=np.int64)
        hn = np.array([1, 1], dtype=np.int64)
        hd = np.array([1, 0], dtype=np.int64)
        rank = np.array([1, 1], dtype=np.int64)
        mass = np.array([m * (1 - alpha), m * alpha])
    tail_eps = measure.policy.tail_eps
    interior = (ln > 0) & (hd > 0)
    below = interior & (hn <= hd)
    above = interior & (ln >= ld)
    med = (ln + hn).astype(float) / (ld + hd).astype(float)
    logmed = np.zeros(len(ln))
    logmed[interior] = np.log(med[interior])
    with np.errstate(divide="ignore"):
        width = np.zeros(len(ln))
        width[interior] = np.log(hn[interior].astype(float) / hd[interior]) - np.log(
            ln[interior].astype(float) / ld[interior]
        )
    v_below = float(np.sum(mass[below] * logmed[below]))
    v_above = float(np.sum(mass[above] * logmed[above]))
    e_below = float(np.sum(mass[below] * width[below]))
    e_above = float(np.sum(mass[above] * width[above]))
    fp_slack = 4e-16 * (float(np.sum(mass * np.abs(logmed))) + 1.0)
    e_below += fp_slack
    e_above += fp_slack
    for i in np.nonzero(~interior)[0]:
        if ln[i] == 0:
            v, e = _expand_left_tail(alpha, int(hd[i]), int(rank[i]), float(mass[i]), tail_eps)
            v_below += v
            e_below += e
        else:
            v, e = _expand_right_tail(alpha, int(ln[i]), int(rank[i]), float(mass[i]), tail_eps)
            v_above += v
            e_above += e
    return v_below, v_above, e_below, e_above


def integrate_log(measure: LeafMeasure) -> tuple[float, float]:
    """Integral of log x against the leaf measure, with a certified bound.

    Returns (value, error_bound); the bound dominates the true quadrature
    error (interior range bounds plus analytic tail remainders).
    """
    vb, va, eb, ea = _integrate_log_parts(measure)
    return vb + va, eb + ea


@dataclass(frozen=True)
class SplitIntegral:
    below1: float
    above1: float
    below1_err: float
    above1_err: float


def integrate_split(measure: LeafMeasure) -> SplitIntegral:
    """Integrals of log x over [0, 1] and [1, infinity] separately.

    Leaves never straddle 1 because [0,1] and [1,inf] are the two rank-1
    intervals of the subdivision.
    """
    vb, va, eb, ea = _integrate_log_parts(measure)
    return SplitIntegral(below1=vb, above1=va, below1_err=eb, above1_err=ea)


_CONTRIB_EXPONENT = 0.55  # empirical: certified error scales like contrib_eps^0.55


def _tau_guess(target: float, scale: float) -> float:
    """Initial contribution threshold for a certified-error target."""
    return (0.6 * target / scale) ** (1.0 / _CONTRIB_EXPONENT)


def _tau_update(tau: float, err: float, target: float) -> float:
    factor = (0.6 * target / err) ** (1.0 / _CONTRIB_EXPONENT)
    return tau * min(max(factor, 1e-6), 0.9)


def refine_for_log_tol(alpha: float, tol: float, tail_share: float = 0.1,
                       max_attempts: int = 12) -> LeafMeasure:
    """Refine until integrate_log's certified error bound is at most tol."""
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    tau = _tau_guess(tol, 2.8)
    err = math.inf
    for _ in range(max_attempts):
        policy = RefinePolicy(
            mass_eps=1e-300,
            max_rank=_INT64_RANK_CAP,
            tail_eps=tol * tail_share / 4,
            contrib_eps=tau,
        )
        measure = refine_nu_alpha(alpha, policy)
        _, err = integrate_log(measure)
        if err <= tol:
            return measure
        tau = _tau_update(tau, err, tol)
    raise TailDivergenceError(
        f"could not certify tolerance {tol} at alpha={alpha}; reached error {err}"
    )


def change_of_variable_residual(alpha: Fraction, maxrank: int) -> Fraction:
    """Exact worst-case defect of the two change-of-variable identities.

    For every subdivision interval [a/b, c/d] of rank <= maxrank:
      mass([d/(c+d), b/(a+b)]) = (1-alpha) * mass([a/b, c/d])
    and, whenever a >= b (interval inside [1, infinity]):
      mass([(a-b)/a, (c-d)/c]) = ((1-alpha)/alpha) * mass([a/b, c/d]).
    Returns the maximum absolute defect, exactly 0 when the measure is
    consistent.
    """
    if not isinstance(alpha, Fraction):
        raise DomainError("exact residual requires a Fraction alpha")
    if not (0 < alpha < 1):
        raise DomainError("alpha must lie in (0, 1)")
    if maxrank < 1:
        raise DomainError("maxrank must be at least 1")
    worst = Fraction(0)
    stack = [(0, 1, 1, 0, 0, Fraction(1))]
    while stack:
        a, b, c, d, rank, w = stack.pop()
        if rank >= 1:
            img = SternBrocotInterval(ERat(d, c + d), ERat(b, a + b), rank + 1)
            defect = abs(mass_of_interval(alpha, img) - (1 - alpha) * w)
            worst = max(worst, defect)
            if a >= b:
                img1 = SternBrocotInterval(ERat(a - b, a), ERat(c - d, c), rank)
                defect1 = abs(mass_of_interval(alpha, img1) - (1 - alpha) / alpha * w)
                worst = max(worst, defect1)
        if rank < maxrank:
            mn, md = a + c, b + d
            f_left = alpha if rank % 2 == 1 else 1 - alpha
            stack.append((a, b, mn, md, rank + 1, w * f_left))
            stack.append((mn, md, c, d, rank + 1, w * (1 - f_left)))
    return worst


def question_mark(x) -> Fraction:
    """Minkowski's question-mark function, exactly: ?(x) = 2 nu_1/2([0, x]).

    Accepts a Fraction, int, ERat, or a string like "2/3"; x must lie in
    [0, 1].  The subdivision descent terminates because every rational is
    the mediant of the interval chain at some finite rank.
    """
    if isinstance(x, str):
        parts = x.split("/")
        x = Fraction(int(parts[0]), int(parts[1])) if len(parts) == 2 else Fraction(x)
    elif isinstance(x, ERat):
        x = x.as_fraction()
    x = Fraction(x)
    if not (0 <= x <= 1):
        raise DomainError(f"question mark is defined on [0, 1], got {x}")
    if x == 0:
        return Fraction(0)
    if x == 1:
        return Fraction(1)
    # walk inside [0, 1]; interval mass under nu_1/2 is 2^-rank
    a, b, c, d = 0, 1, 1, 1
    rank = 1
    cdf = Fraction(0)
    while True:
        mn, md = a + c, b + d
        half = Fraction(1, 2 ** (rank + 1))
        cmp = x.numerator * md - mn * x.denominator
        if cmp == 0:
            return 2 * (cdf + half)
        if cmp < 0:
            c, d = mn, md
        else:
            cdf += half
            a, b = mn, md
        rank += 1


# ---------------------------------------------------------------------------
# Two-sided measure on the projective line (slope coordinate)
# ---------------------------------------------------------------------------


@dataclass
class SignedLineMeasure:
    """Stationary measure of the random two-matrix product, in slopes.

    Mass m_minus = (1-alpha)^2/(alpha^2-alpha+1) sits on [-inf, 0] and
    m_plus = alpha/(alpha^2-alpha+1) on [0, inf]; the conditional law on the
    positive half-line is nu_alpha, and the negative side carries the
    mirror-image subdivision (the proportions seen left-to-right on the
    negative axis are those of nu_alpha with alpha and 1-alpha exchanged,
    which is exactly the reflection of nu_alpha).  Negative intervals are
    represented by their positive mirror plus the sign flag.
    """

    alpha: float
    p: float
    m_plus: float
    m_minus: float
    pos: LeafMeasure
    neg_mirror: LeafMeasure

    def total_mass(self) -> float:
        return float(self.m_plus * self.pos.total_mass()
                     + self.m_minus * self.neg_mirror.total_mass())

    def neg_leaves(self):
        """Yield ((lo_num, lo_den), (hi_num, hi_den), mass) on the negative axis."""
        m = self.neg_mirror
        for i in range(len(m)):
            yield (
                (-int(m.hi_num[i]), int(m.hi_den[i])),
                (-int(m.lo_num[i]), int(m.lo_den[i])),
                self.m_minus * float(m.mass[i]),
            )


def nu_f_build(p: float, policy: RefinePolicy | None = None) -> SignedLineMeasure:
    """Build the two-sided stationary measure for the linear case at p.

    Refuses p = 1 (the measure degenerates to a Dirac mass at the golden
    ratio) and p = 0.
    """
    if not (0 < p < 1):
        raise DomainError("the two-sided measure needs 0 < p < 1")
    alpha = alpha_from_p(p, ModelCase.LINEAR)
    denom = alpha * alpha - alpha + 1
    m_plus = alpha / denom
    m_minus = (1 - alpha) ** 2 / denom
    pos = refine_nu_alpha(alpha, policy)
    # mirror construction: reflected negative side carries the same masses
    return SignedLineMeasure(alpha=alpha, p=p, m_plus=m_plus, m_minus=m_minus,
                             pos=pos, neg_mirror=pos)


# --- invariance residual -----------------------------------------------------
#
# Signed endpoints are (num, den) pairs in lowest terms with den >= 0 and the
# sign carried by num; (1, 0) is +infinity and (-1, 0) is -infinity.

_POS_TAG, _UNIT_TAG, _NEG_TAG = "pos>1", "pos<1", "neg"


def _norm_endpoint(num: int, den: int, inf_sign: int = 1) -> tuple[int, int]:
    if den < 0:
        num, den = -num, -den
    if den == 0:
        return (1 if inf_sign > 0 else -1, 0)
    g = math.gcd(abs(num), den)
    if g > 1:
        num, den = num // g, den // g
    return num, den


def _ep_sort_key(e: tuple[int, int]) -> Fraction:
    n, d = e
    if d == 0:
        return Fraction(10**50 if n > 0 else -(10**50))
    return Fraction(n, d)


def _walk_mass(alpha, lo: tuple[int, int], hi: tuple[int, int]):
    """nu_alpha mass of a positive subdivision interval given as int pairs."""
    ln, ld, hn, hd = 0, 1, 1, 0
    mass = Fraction(1) if isinstance(alpha, Fraction) else 1.0
    steps = 0
    while (ln, ld, hn, hd) != (lo[0], lo[1], hi[0], hi[1]):
        mn, md = ln + hn, ld + hd
        f_left = alpha if steps % 2 == 1 else 1 - alpha
        if hi[0] * md <= mn * hi[1]:
            hn, hd = mn, md
            mass = mass * f_left
        elif lo[0] * md >= mn * lo[1]:
            ln, ld = mn, md
            mass = mass * (1 - f_left)
        else:
            raise UnreachableIntervalError(f"{lo}..{hi} straddles a mediant")
        steps += 1
        if steps > 10**4:
            raise UnreachableIntervalError(f"{lo}..{hi} too deep")
    return mass


def _mirror_interval(lo, hi):
    """Reflect a positive-axis interval to the negative axis (or back)."""
    new_lo = _norm_endpoint(-hi[0], hi[1], inf_sign=-1)
    new_hi = _norm_endpoint(-lo[0], lo[1], inf_sign=-1)
    return new_lo, new_hi


def _nu_f_interval_mass(alpha, m_plus, m_minus, lo, hi):
    if lo[0] >= 0:
        return m_plus * _walk_mass(alpha, lo, hi)
    if hi[0] <= 0:
        rlo = _norm_endpoint(-hi[0], hi[1], inf_sign=1)
        rhi = _norm_endpoint(-lo[0], lo[1], inf_sign=1)
        return m_minus * _walk_mass(alpha, rlo, rhi)
    raise UnreachableIntervalError(f"interval {lo}..{hi} straddles 0")


def _atom_of(lo, hi) -> str:
    if lo[0] >= lo[1]:  # lo >= 1 (dens are non-negative)
        return _POS_TAG
    if lo[0] >= 0 and hi[0] <= hi[1] and hi[1] > 0:
        return _UNIT_TAG
    if hi[0] <= 0:
        return _NEG_TAG
    raise UnreachableIntervalError(f"interval {lo}..{hi} crosses an atom boundary")


def _pre_images(lo, hi):
    """Preimages of [lo, hi] under m -> 1 + 1/m and m -> 1 - 1/m.

    1 + 1/m lands in [x1, x2] iff m lies in 1/([x1, x2] - 1); likewise
    1 - 1/m iff m lies in 1/(1 - [x1, x2]).  Each preimage is a single
    signed interval because test intervals never straddle the poles; the
    sign of an infinite endpoint (pole hit at x = 1) depends on which atom
    the interval lives in.
    """
    tag = _atom_of(lo, hi)

    def shifted_recip(e, sign, inf_sign):
        # 1 / (sign * (x - 1)) at x = e, as a normalized endpoint
        n, d = e
        return _norm_endpoint(d, sign * (n - d), inf_sign)

    if tag == _POS_TAG:
        r_sign, l_sign = 1, -1
    elif tag == _UNIT_TAG:
        r_sign, l_sign = -1, 1
    else:
        r_sign, l_sign = 1, 1  # both preimages finite for negative intervals
    pre_r = sorted((shifted_recip(lo, 1, r_sign), shifted_recip(hi, 1, r_sign)),
                   key=_ep_sort_key)
    pre_l = sorted((shifted_recip(lo, -1, l_sign), shifted_recip(hi, -1, l_sign)),
                   key=_ep_sort_key)
    return tuple(pre_r), tuple(pre_l)


def _enumerate_signed_intervals(maxrank: int):
    """All subdivision intervals of rank 1..maxrank on both half-lines."""
    stack = [(0, 1, 1, 1, 1), (1, 1, 1, 0, 1)]
    while stack:
        a, b, c, d, rank = stack.pop()
        yield (a, b), (c, d)
        yield _mirror_interval((a, b), (c, d))
        if rank < maxrank:
            mn, md = a + c, b + d
            stack.append((a, b, mn, md, rank + 1))
            stack.append((mn, md, c, d, rank + 1))


def _furstenberg_residual_core(alpha, p, maxrank: int):
    denom = alpha * alpha - alpha + 1
    m_plus = alpha / denom
    m_minus = (1 - alpha) * (1 - alpha) / denom
    worst = Fraction(0) if isinstance(alpha, Fraction) else 0.0
    for lo, hi in _enumerate_signed_intervals(maxrank):
        lhs = _nu_f_interval_mass(alpha, m_plus, m_minus, lo, hi)
        (pr_lo, pr_hi), (pl_lo, pl_hi) = _pre_images(lo, hi)
        rhs = p * _nu_f_interval_mass(alpha, m_plus, m_minus, pr_lo, pr_hi) + (
            1 - p
        ) * _nu_f_interval_mass(alpha, m_plus, m_minus, pl_lo, pl_hi)
        worst = max(worst, abs(lhs - rhs))
    return worst


def furstenberg_residual(p: float, maxrank: int) -> float:
    """Worst defect of the stationarity identity over intervals <= maxrank.

    Checks nu_f(J) = p nu_f({m: 1+1/m in J}) + (1-p) nu_f({m: 1-1/m in J})
    for every subdivision interval J of rank 1..maxrank on both half-lines.
    Small residual certifies the two-sided construction at parameter p.
    """
    if not (0 < p < 1):
        raise DomainError("residual check needs 0 < p < 1")
    alpha = alpha_from_p(p, ModelCase.LINEAR)
    return float(_furstenberg_residual_core(alpha, float(p), maxrank))


def furstenberg_residual_exact(alpha: Fraction, maxrank: int) -> Fraction:
    """Exact-rational variant: p is derived from alpha by the linear-case map."""
    if not isinstance(alpha, Fraction):
        raise DomainError("exact residual requires Fraction alpha")
    if not (Fraction(1, 2) < alpha < 1):
        raise DomainError("exact residual needs 1/2 < alpha < 1")
    p = p_from_alpha(alpha, ModelCase.LINEAR)
    return _furstenberg_residual_core(alpha, p, maxrank)
