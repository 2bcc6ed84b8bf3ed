"""Stochastic validation of the closed forms and the growth-rate integral.

Everything here is driven by an explicit RngSpec so runs are bit-for-bit
reproducible.  Growth simulation tracks the recurrence in a renormalized
floating-point pair once exact integers would overflow; the non-linear case
switches adaptively between exact machine-size integers and the normalized
float pair because the absolute-value recurrence lives off cancellations.
Statistical outputs carry batch-means standard errors (>= 20 batches) so
estimator contracts can be asserted as z-scores against the closed forms.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .cfrac import ERat, SternBrocotInterval
from .params import DomainError, ModelCase, NONLINEAR_CRITICAL_P, build_params
from .words import L, R

_LN2 = math.log(2.0)
_FLOAT_SWITCH_BITS = 63
_INT_RETURN_BITS = 40


@dataclass(frozen=True)
class RngSpec:
    """Seed plus algorithm tag; identical specs give identical trajectories."""

    seed: int
    algorithm: str = "pcg64"

    def generator(self) -> np.random.Generator:
        if self.algorithm != "pcg64":
            raise DomainError(f"unsupported rng algorithm {self.algorithm!r}")
        return np.random.Generator(np.random.PCG64(self.seed))


@dataclass(frozen=True)
class GrowthEstimate:
    estimate: float
    stderr: float
    n: int
    p: float
    case: ModelCase
    batches: int


@dataclass(frozen=True)
class ReductionEstimates:
    pR_hat: float
    sigma_hat: float
    alpha_hat: float
    muR_hat: float
    stderrs: dict[str, float]
    n: int


@dataclass(frozen=True)
class ErgodicAverage:
    value: float
    stderr: float
    k: int


@dataclass(frozen=True)
class NdLimitSample:
    frequencies: dict[SternBrocotInterval, float]
    counts: dict[SternBrocotInterval, int]
    trials: int

    def stderr(self, iv: SternBrocotInterval) -> float:
        f = self.frequencies.get(iv, 0.0)
        return math.sqrt(max(f * (1 - f), 1e-300) / self.trials)


@dataclass(frozen=True)
class StoppingTimeStats:
    mean: float
    stderr: float
    histogram: dict[int, int]
    samples: int


def _log_big(x: int) -> float:
    """log of a positive arbitrary-size integer without float overflow."""
    if x <= 0:
        raise ValueError("log of non-positive value")
    shift = x.bit_length() - 53
    if shift <= 0:
        return math.log(x)
    return math.log(x >> shift) + shift * _LN2


def _batch_stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _checkpoints(steps: int, batches: int) -> np.ndarray:
    return np.linspace(0, steps, batches + 1).astype(np.int64)


def simulate_growth(p: float, case: ModelCase, n: int, rng: RngSpec,
                    exact_horizon: int = 10_000, batches: int = 25,
                    mode: str | None = None) -> GrowthEstimate:
    """Estimate the growth exponent (1/n) log of the n-th term.

    Below exact_horizon the recurrence runs in exact integers; beyond it the
    linear case keeps a renormalized float pair plus an accumulated log
    magnitude, and the non-linear case additionally falls back to exact
    machine integers whenever the values fit (cancellations near zero make a
    pure log-space representation unstable).  mode forces "exact" or
    "float" for cross-validation.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if not (0 < p <= 1):
        raise DomainError("p must lie in (0, 1]")
    steps = n - 2
    gen = rng.generator()
    plus = gen.random(steps) < p
    if mode is None:
        mode = "exact" if n <= exact_horizon else "float"
    if mode == "exact":
        logs = _run_exact(plus, case, batches)
    elif mode == "float":
        if case is ModelCase.LINEAR:
            logs = _run_linear_float(plus, batches)
        else:
            logs = _run_nonlinear_adaptive(plus, batches)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    cps = _checkpoints(steps, batches)
    lens = np.diff(cps).astype(float)
    keep = lens > 0
    rates = np.diff(logs)[keep] / lens[keep]
    return GrowthEstimate(
        estimate=logs[-1] / n,
        stderr=_batch_stderr(rates),
        n=n,
        p=p,
        case=case,
        batches=int(np.sum(keep)),
    )


def _run_exact(plus: np.ndarray, case: ModelCase, batches: int) -> np.ndarray:
    a, b = 1, 1
    nonlin = case is ModelCase.NONLINEAR
    cps = set(_checkpoints(len(plus), batches).tolist())
    logs = [0.0] if 0 in cps else []
    for i, s in enumerate(plus):
        if s:
            a, b = b, b + a
        else:
            a, b = b, (abs(b - a) if nonlin else b - a)
        if (i + 1) in cps:
            val = abs(b) if abs(b) > 0 else abs(a)
            logs.append(_log_big(val))
    return np.array(logs)


def _run_linear_float(plus: np.ndarray, batches: int) -> np.ndarray:
    u, v = 1.0, 1.0
    logmag = 0.0
    cps = set(_checkpoints(len(plus), batches).tolist())
    logs = [0.0] if 0 in cps else []
    log = math.log
    for i, s in enumerate(plus):
        w = v + u if s else v - u
        u, v = v, w
        m = abs(u) if abs(u) > abs(v) else abs(v)
        logmag += log(m)
        u /= m
        v /= m
        if (i + 1) in cps:
            av = abs(v) if v != 0.0 else abs(u)
            logs.append(logmag + log(av))
    return np.array(logs)


def _run_nonlinear_adaptive(plus: np.ndarray, batches: int) -> np.ndarray:
    int_mode = True
    a, b = 1, 1            # exact state
    u = v = 1.0            # float state (renormalized)
    logmag = 0.0
    cps = set(_checkpoints(len(plus), batches).tolist())
    logs = [0.0] if 0 in cps else []
    log, exp = math.log, math.exp
    for i, s in enumerate(plus):
        if int_mode:
            if s:
                a, b = b, b + a
            else:
                a, b = b, abs(b - a)
            if b.bit_length() > _FLOAT_SWITCH_BITS or a.bit_length() > _FLOAT_SWITCH_BITS:
                m = float(max(a, b))
                u, v = a / m, b / m
                logmag = log(m)
                int_mode = False
        else:
            w = v + u if s else abs(v - u)
            u, v = v, w
            m = u if u > v else v
            logmag += log(m)
            u /= m
            v /= m
            if logmag < _INT_RETURN_BITS * _LN2:
                scale = exp(logmag)
                a = max(round(u * scale), 0)
                b = max(round(v * scale), 0)
                if a == 0 and b == 0:
                    b = 1
                int_mode = True
        if (i + 1) in cps:
            if int_mode:
                val = b if b > 0 else max(a, 1)
                logs.append(_log_big(val))
            else:
                av = v if v > 0.0 else u
                logs.append(logmag + log(av))
    return np.array(logs)


def _reduction_scan(plus: np.ndarray, case: ModelCase, batches: int):
    """Run the suffix-deletion automaton over a sign array.

    Returns (stack array, stack size, deleted-R count, append times,
    checkpoint rows (s, d, k) at batch boundaries).
    """
    n = len(plus)
    stack = np.empty(n, dtype=np.int8)
    times = np.empty(n, dtype=np.int64)
    sp = 0
    s_cnt = 0
    d_cnt = 0
    flip_next = False
    linear = case is ModelCase.LINEAR
    cps = _checkpoints(n, batches)
    cp_rows = []
    nxt = 0
    if cps[0] == 0:
        cp_rows.append((0, 0, 0))
        nxt = 1
    for i in range(n):
        ch = 1 if plus[i] else 0
        if linear and flip_next:
            ch ^= 1
        flip_next = False
        stack[sp] = ch
        times[sp] = i
        sp += 1
        s_cnt += ch
        if sp >= 3 and stack[sp - 3] == 1 and stack[sp - 2] == 0 and stack[sp - 1] == 0:
            sp -= 3
            s_cnt -= 1
            d_cnt += 1
            flip_next = True
        if nxt <= batches and (i + 1) == cps[nxt]:
            cp_rows.append((s_cnt, d_cnt, sp))
            nxt += 1
    return stack[:sp], sp, d_cnt, times[:sp], np.array(cp_rows, dtype=np.int64)


def estimate_reduction(p: float, case: ModelCase, n: int, rng: RngSpec,
                       batches: int = 25) -> ReductionEstimates:
    """Finite-horizon estimators of p_R, sigma, alpha and mu_R.

    pR_hat = s/(s+d) (surviving over drawn R's), sigma_hat = k/n (reduced
    over raw length), alpha_hat = R-to-R transition frequency in the reduced
    word, muR_hat = R frequency in the reduced word.  Standard errors: batch
    means over raw time for (pR, sigma) and over reduced-word chunks for
    (alpha, muR).
    """
    if not (0 < p <= 1):
        raise DomainError("p must lie in (0, 1]")
    if case is ModelCase.NONLINEAR and p <= NONLINEAR_CRITICAL_P:
        raise DomainError("reduction estimators need the surviving regime (p > 1/3)")
    gen = rng.generator()
    plus = gen.random(n) < p
    word, k, d, _, cps = _reduction_scan(plus, case, batches)
    s = int(word.sum())
    pr_hat = s / (s + d) if s + d > 0 else float("nan")
    sigma_hat = k / n
    w = word.astype(np.int64)
    rr = int(np.sum((w[:-1] == 1) & (w[1:] == 1)))
    r_tot = int(np.sum(w[:-1] == 1))
    alpha_hat = rr / r_tot if r_tot else float("nan")
    mu_hat = s / k if k else float("nan")

    ds = np.diff(cps[:, 0]).astype(float)
    dd = np.diff(cps[:, 1]).astype(float)
    dk = np.diff(cps[:, 2]).astype(float)
    dn = np.diff(_checkpoints(n, batches)).astype(float)
    drawn = ds + dd
    ok = drawn > 0
    pr_batches = ds[ok] / drawn[ok]
    sigma_batches = dk / dn
    marks = _checkpoints(k, batches)
    ab, mb = [], []
    for j in range(batches):
        chunk = w[marks[j]:marks[j + 1]]
        if len(chunk) < 2:
            continue
        rt = int(np.sum(chunk[:-1] == 1))
        if rt:
            ab.append(float(np.sum((chunk[:-1] == 1) & (chunk[1:] == 1))) / rt)
        mb.append(float(np.mean(chunk)))
    stderrs = {
        "pR": _batch_stderr(pr_batches),
        "sigma": _batch_stderr(sigma_batches),
        "alpha": _batch_stderr(np.array(ab)),
        "muR": _batch_stderr(np.array(mb)),
    }
    return ReductionEstimates(pr_hat, sigma_hat, alpha_hat, mu_hat, stderrs, n)


def ergodic_average(alpha: float, k: int, rng: RngSpec, f,
                    batches: int = 25) -> ErgodicAverage:
    """Ergodic average (1/k) sum f(Q_i) along the survivor chain.

    The chain starts from a forced R (Q_3 = 2) and moves R -> R with
    probability alpha, L -> R with probability 1; the ratio updates are
    Q -> 1 + 1/Q on R and Q -> 1 - 1/Q on L.  f is "log" or an interval
    (SternBrocotInterval, or a (lo, hi) pair) whose indicator is averaged.
    """
    if not (0 < alpha < 1):
        raise DomainError("ergodic averaging needs 0 < alpha < 1")
    if k < 3:
        raise DomainError("need k >= 3")
    gen = rng.generator()
    u = gen.random(k - 3)
    qs = np.empty(k - 2)
    q = 2.0
    qs[0] = q
    is_r = True
    for i in range(k - 3):
        if is_r:
            if u[i] < alpha:
                q = 1.0 + 1.0 / q
            else:
                q = 1.0 - 1.0 / q
                is_r = False
        else:
            q = 1.0 + 1.0 / q
            is_r = True
        qs[i + 1] = q
    if f == "log":
        vals = np.log(qs)
    else:
        if isinstance(f, SternBrocotInterval):
            lo, hi = float(f.lo), float(f.hi)
        else:
            lo, hi = float(f[0]), float(f[1])
        vals = ((qs >= lo) & (qs <= hi)).astype(float)
    value = float(np.mean(vals))
    marks = _checkpoints(len(vals), batches)
    bm = [float(np.mean(vals[marks[j]:marks[j + 1]]))
          for j in range(batches) if marks[j + 1] > marks[j]]
    return ErgodicAverage(value=value, stderr=_batch_stderr(np.array(bm)), k=k)


def ergodic_reference(alpha: float, f, tol: float = 1e-8) -> float:
    """Quadrature value the ergodic average converges to.

    (1-mu_R)/(1-alpha) * integral over [0,1] + (mu_R/alpha) * integral over
    [1,inf] of f against the alternating measure.
    """
    from .measure import mass_of_interval, refine_for_log_tol, integrate_split

    mu_r = 1 / (2 - alpha)
    c_below = (1 - mu_r) / (1 - alpha)
    c_above = mu_r / alpha
    if f == "log":
        sp = integrate_split(refine_for_log_tol(alpha, tol))
        return c_below * sp.below1 + c_above * sp.above1
    iv = f if isinstance(f, SternBrocotInterval) else None
    if iv is None:
        raise DomainError("reference needs 'log' or a SternBrocotInterval")
    m = float(mass_of_interval(alpha, iv))
    weight = c_below if iv.hi <= ERat(1, 1) else c_above
    return weight * m


def nd_limit_sample(alpha: float, rank: int, trials: int, rng: RngSpec) -> NdLimitSample:
    """Empirical law of the nested-interval piece process after `rank` pieces.

    Each trial draws pieces i.i.d. (single R with probability alpha, elbow
    with 1-alpha) and pushes the oriented endpoint pair through
    (x, y) -> (y, mediant) on R and (x, y) -> (mediant, x) on an elbow,
    starting from (0, infinity).  After r pieces the unordered pair is a
    rank-r subdivision interval; frequencies estimate its mass.
    """
    if rank < 1 or rank > 40:
        raise DomainError("rank must lie in 1..40")
    gen = rng.generator()
    xn = np.zeros(trials, dtype=np.int64)
    xd = np.ones(trials, dtype=np.int64)
    yn = np.ones(trials, dtype=np.int64)
    yd = np.zeros(trials, dtype=np.int64)
    for _ in range(rank):
        is_r = gen.random(trials) < alpha
        mn, md = xn + yn, xd + yd
        xn, xd, yn, yd = (
            np.where(is_r, yn, mn),
            np.where(is_r, yd, md),
            np.where(is_r, mn, xn),
            np.where(is_r, md, xd),
        )
    x_first = xn * yd < yn * xd
    lon = np.where(x_first, xn, yn)
    lod = np.where(x_first, xd, yd)
    hin = np.where(x_first, yn, xn)
    hid = np.where(x_first, yd, xd)
    keys = np.stack([lon, lod, hin, hid], axis=1)
    uniq, counts = np.unique(keys, axis=0, return_counts=True)
    freqs: dict[SternBrocotInterval, float] = {}
    cnts: dict[SternBrocotInterval, int] = {}
    for row, cnt in zip(uniq, counts):
        iv = SternBrocotInterval(ERat(int(row[0]), int(row[1])),
                                 ERat(int(row[2]), int(row[3])), rank)
        freqs[iv] = cnt / trials
        cnts[iv] = int(cnt)
    return NdLimitSample(frequencies=freqs, counts=cnts, trials=trials)


def stopping_time_stats(p: float, trials: int, rng: RngSpec) -> StoppingTimeStats:
    """Gaps between append times of consecutive survivors (non-linear case).

    Each gap is 1 plus the number of letters deleted between two successive
    surviving letters; its mean converges to 1/sigma.  Requires p > 1/3,
    where survivors keep arriving and the gap law has finite expectation.
    """
    if not (NONLINEAR_CRITICAL_P < p <= 1):
        raise DomainError("stopping-time sampling needs p > 1/3")
    params = build_params(p, ModelCase.NONLINEAR)
    horizon = int((trials + 2) / max(params.sigma, 1e-3) * 1.5) + 1000
    gen = rng.generator()
    plus = gen.random(horizon) < p
    _, k, _, times, _ = _reduction_scan(plus, ModelCase.NONLINEAR, 1)
    need = trials + 1
    if k < need:
        raise DomainError("horizon too short for the requested number of gaps")
    gaps = np.diff(times[:need]).astype(np.int64)
    hist = dict(sorted(Counter(gaps.tolist()).items()))
    return StoppingTimeStats(
        mean=float(np.mean(gaps)),
        stderr=float(np.std(gaps, ddof=1) / math.sqrt(len(gaps))),
        histogram=hist,
        samples=len(gaps),
    )


def coupling_check(p: float, p_prime: float, n: int, trials: int, rng: RngSpec) -> bool:
    """Monotone coupling of two non-linear paths; True iff dominance holds.

    Shared uniforms thresholded at p <= p_prime make every R of the lower
    path an R of the upper path; the upper labels must then dominate at
    every step, in exact integers.
    """
    if p > p_prime:
        raise DomainError("need p <= p_prime")
    gen = rng.generator()
    uni = gen.random((trials, max(n - 2, 0)))
    for row in uni:
        a1 = b1 = a2 = b2 = 1
        for u in row:
            s1 = u < p
            s2 = u < p_prime
            a1, b1 = b1, (b1 + a1 if s1 else abs(b1 - a1))
            a2, b2 = b2, (b2 + a2 if s2 else abs(b2 - a2))
            if b1 > b2:
                return False
    return True


def zscore(estimate: float, reference: float, stderr: float) -> float:
    """Standardized deviation; 0 when both sides agree exactly."""
    if stderr == 0:
        return 0.0 if estimate == reference else math.inf
    return (estimate - reference) / stderr
