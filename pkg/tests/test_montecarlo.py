import math
from fractions import Fraction

import numpy as np
import pytest

from randfib.cfrac import ERat, SternBrocotInterval
from randfib.measure import mass_of_interval
from randfib.montecarlo import (
    RngSpec,
    coupling_check,
    ergodic_average,
    ergodic_reference,
    estimate_reduction,
    nd_limit_sample,
    simulate_growth,
    stopping_time_stats,
    zscore,
)
from randfib.lyapunov import gamma_of_p
from randfib.params import INV_PHI, PHI, DomainError, ModelCase, build_params, p_from_alpha

L, NL = ModelCase.LINEAR, ModelCase.NONLINEAR


def test_rng_determinism():
    a = simulate_growth(0.5, L, 50_000, RngSpec(123))
    b = simulate_growth(0.5, L, 50_000, RngSpec(123))
    assert a == b
    c = estimate_reduction(0.6, L, 50_000, RngSpec(7))
    d = estimate_reduction(0.6, L, 50_000, RngSpec(7))
    assert c == d
    with pytest.raises(DomainError):
        RngSpec(1, algorithm="mt19937").generator()


@pytest.mark.parametrize("case", [L, NL])
def test_exact_and_float_paths_agree(case):
    e = simulate_growth(0.6, case, 500, RngSpec(3), mode="exact")
    f = simulate_growth(0.6, case, 500, RngSpec(3), mode="float")
    assert abs(e.estimate - f.estimate) <= 1e-9 * abs(e.estimate)


def test_deterministic_fibonacci():
    n = 5000
    g = simulate_growth(1.0, L, n, RngSpec(1))
    assert abs(g.estimate - math.log(PHI)) < 2 * math.log(n) / n
    g = simulate_growth(1.0, NL, n, RngSpec(1))
    assert abs(g.estimate - math.log(PHI)) < 2 * math.log(n) / n


def test_growth_matches_quadrature():
    g = simulate_growth(0.5, L, 200_000, RngSpec(42))
    ref = gamma_of_p(0.5, L, 1e-8).gamma
    assert abs(zscore(g.estimate, ref, g.stderr)) < 3.5
    g = simulate_growth(0.8, NL, 200_000, RngSpec(5))
    ref = gamma_of_p(0.8, NL, 1e-8).gamma
    assert abs(zscore(g.estimate, ref, g.stderr)) < 3.5


def test_zero_regime_growth():
    g = simulate_growth(0.3, NL, 200_000, RngSpec(7))
    assert abs(g.estimate) < 0.02


def test_reduction_estimators_linear():
    est = estimate_reduction(0.6, L, 200_000, RngSpec(11))
    cp = build_params(0.6, L)
    assert abs(zscore(est.pR_hat, cp.p_R, est.stderrs["pR"])) < 3.5
    assert abs(zscore(est.sigma_hat, cp.sigma, est.stderrs["sigma"])) < 3.5
    assert abs(zscore(est.alpha_hat, cp.alpha, est.stderrs["alpha"])) < 3.5
    assert abs(zscore(est.muR_hat, cp.mu_R, est.stderrs["muR"])) < 3.5


def test_reduction_estimators_nonlinear():
    est = estimate_reduction(0.9, NL, 200_000, RngSpec(13))
    cp = build_params(0.9, NL)
    assert abs(zscore(est.sigma_hat, cp.sigma, est.stderrs["sigma"])) < 3.5
    assert abs(zscore(est.pR_hat, cp.p_R, est.stderrs["pR"])) < 3.5


def test_reduction_estimators_deterministic_case():
    est = estimate_reduction(1.0, L, 10_000, RngSpec(2))
    assert est.pR_hat == 1.0 and est.sigma_hat == 1.0
    assert est.stderrs["pR"] == 0.0


def test_reduction_regime_guard():
    with pytest.raises(DomainError):
        estimate_reduction(0.3, NL, 1000, RngSpec(1))


def test_survival_proxy_consistency():
    # reconstruct p_R from alpha_hat via 1 - p_R = (1 - p/alpha)/c
    p = 0.6
    est = estimate_reduction(p, L, 200_000, RngSpec(19))
    c = 1 - p
    recon = 1 - (1 - p / est.alpha_hat) / c
    slope = 4.0  # |d pR / d alpha| stays O(1) here; allow generous error transfer
    band = 3.5 * (est.stderrs["pR"] + slope * est.stderrs["alpha"])
    assert abs(est.pR_hat - recon) < band


def test_ergodic_indicators():
    mu_r = 1 / (2 - INV_PHI)
    above = ergodic_average(INV_PHI, 200_000, RngSpec(9), (1.0, math.inf))
    assert abs(zscore(above.value, mu_r, above.stderr)) < 3.5
    below = ergodic_average(INV_PHI, 200_000, RngSpec(9), (0.0, 1.0))
    assert abs(zscore(below.value, 1 - mu_r, below.stderr)) < 3.5


def test_ergodic_log_matches_quadrature():
    ea = ergodic_average(INV_PHI, 300_000, RngSpec(29), "log")
    ref = ergodic_reference(INV_PHI, "log", 1e-7)
    assert abs(zscore(ea.value, ref, ea.stderr)) < 3.5


def test_ergodic_interval_reference():
    iv = SternBrocotInterval(ERat(1, 1), ERat(2, 1), 2)
    ea = ergodic_average(0.7, 200_000, RngSpec(31), iv)
    ref = ergodic_reference(0.7, iv)
    assert abs(zscore(ea.value, ref, ea.stderr)) < 3.5


def test_nd_limit_rank_one():
    s = nd_limit_sample(0.7, 1, 100_000, RngSpec(13))
    iv = SternBrocotInterval(ERat(1, 1), ERat(1, 0), 1)
    assert abs(s.frequencies[iv] - 0.7) < 3.5 * s.stderr(iv)


def test_nd_limit_uniform_at_half():
    s = nd_limit_sample(0.5, 3, 100_000, RngSpec(15))
    assert len(s.frequencies) == 8
    for iv, freq in s.frequencies.items():
        assert iv.rank == 3
        assert abs(freq - 0.125) < 3.5 * s.stderr(iv)


def test_nd_limit_matches_measure():
    s = nd_limit_sample(0.7, 2, 100_000, RngSpec(17))
    for iv, freq in s.frequencies.items():
        ref = mass_of_interval(0.7, iv)
        assert abs(freq - ref) < 3.5 * s.stderr(iv), iv


def test_stopping_time_degenerate():
    st = stopping_time_stats(1.0, 500, RngSpec(17))
    assert st.histogram == {1: 500}
    assert st.mean == 1.0


def test_stopping_time_mean_matches_sigma():
    st = stopping_time_stats(0.6, 100_000, RngSpec(99))
    cp = build_params(0.6, NL)
    assert abs(zscore(st.mean, 1 / cp.sigma, st.stderr)) < 3.5
    assert set(st.histogram) <= {1 + 3 * k for k in range(200)}


def test_stopping_time_near_critical():
    st = stopping_time_stats(0.35, 2000, RngSpec(3))
    assert st.mean > 2  # heavy but finite gaps near the critical point
    assert max(st.histogram) > 10


def test_stopping_time_guard():
    with pytest.raises(DomainError):
        stopping_time_stats(0.3, 100, RngSpec(1))


def test_coupling_identical_paths():
    assert coupling_check(0.5, 0.5, 100, 200, RngSpec(23))


def test_coupling_dominance():
    assert coupling_check(0.3, 0.6, 120, 500, RngSpec(23))
    assert coupling_check(0.5, 1.0, 120, 500, RngSpec(24))
    with pytest.raises(DomainError):
        coupling_check(0.7, 0.3, 10, 10, RngSpec(1))


def test_zscore_degenerate():
    assert zscore(1.0, 1.0, 0.0) == 0.0
    assert zscore(1.0, 2.0, 0.0) == math.inf
