import math
from fractions import Fraction

import pytest

from randfib.params import (
    INV_PHI,
    DomainError,
    ModelCase,
    alpha_from_p,
    build_params,
    compression_rate,
    p_from_alpha,
    survival_probability,
    survival_quadratic_residual,
)

L, NL = ModelCase.LINEAR, ModelCase.NONLINEAR


def test_alpha_examples():
    assert abs(alpha_from_p(0.5, L) - INV_PHI) < 1e-14
    assert abs(alpha_from_p(0.5, NL) - INV_PHI) < 1e-14
    assert alpha_from_p(1.0, L) == pytest.approx(1.0, abs=1e-14)
    assert alpha_from_p(1.0, NL) == pytest.approx(1.0, abs=1e-14)
    assert alpha_from_p(1 / 3, NL) == 0.5
    assert alpha_from_p(0.2, NL) == 0.5  # below the critical point: limit value


def test_p_from_alpha_examples():
    assert p_from_alpha(1.0, L) == pytest.approx(1.0, abs=1e-14)
    assert p_from_alpha(1.0, NL) == pytest.approx(1.0, abs=1e-14)
    assert p_from_alpha(Fraction(1, 2), NL) == Fraction(1, 3)
    assert p_from_alpha(alpha_from_p(0.5, L), L) == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("case", [L, NL])
def test_round_trip_dense_grid(case):
    for i in range(1, 200):
        alpha = 0.5 + 1e-6 + (0.5 - 1e-6) * i / 200
        p = p_from_alpha(alpha, case)
        assert abs(alpha_from_p(p, case) - alpha) < 1e-12


def test_survival_examples():
    assert survival_probability(0.3, NL) == 0.0
    assert survival_probability(1.0, L) == 1.0
    assert abs(survival_probability(0.5, L) - (math.sqrt(5) - 1) / 2) < 1e-14


@pytest.mark.parametrize("case", [L, NL])
def test_survival_quadratic(case):
    for i in range(1, 100):
        p = i / 100
        if case is NL and p <= 1 / 3:
            continue
        p_r = survival_probability(p, case)
        assert abs(survival_quadratic_residual(p, case, p_r)) < 1e-12


def test_survival_quadratic_degenerate_root():
    # c = 0 makes the quadratic linear with root 1
    assert abs(survival_quadratic_residual(1.0, L, 1.0)) < 1e-15


def test_one_minus_pr_identity():
    # 1 - p_R = (1/c)(1 - p/alpha) wherever c > 0 and p_R > 0
    for case in (L, NL):
        for i in range(1, 100):
            p = i / 100
            cp = build_params(p, case)
            if cp.c <= 0 or cp.p_R <= 0:
                continue
            assert abs((1 - cp.p_R) - (1 - p / cp.alpha) / cp.c) < 1e-12


def test_alpha_monotone_in_p():
    grid = [i / 400 for i in range(1, 401)]
    vals = [alpha_from_p(p, L) for p in grid]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    grid_nl = [1 / 3 + (1 - 1 / 3) * i / 400 for i in range(1, 401)]
    vals_nl = [alpha_from_p(p, NL) for p in grid_nl]
    assert all(a < b for a, b in zip(vals_nl, vals_nl[1:]))


def test_compression_examples():
    assert compression_rate(1) == 1
    assert compression_rate(Fraction(1, 2)) == 0
    # evaluate the closed form at the golden-ratio point
    a = INV_PHI
    expected = (2 * a - 1) * (2 - a) / (a * a - a + 1)
    assert compression_rate(a) == pytest.approx(expected, abs=0)
    assert compression_rate(a) == pytest.approx(0.427050983124842, abs=1e-12)


def test_compression_range():
    for i in range(0, 101):
        a = 0.5 + i / 200
        assert -1e-15 <= compression_rate(a) <= 1 + 1e-15


def test_build_params_invariants():
    for case in (L, NL):
        for i in range(1, 50):
            p = i / 50
            cp = build_params(p, case)
            assert abs(cp.mu_R + cp.mu_L - 1) < 1e-15
            assert abs(cp.mu_R - 1 / (2 - cp.alpha)) < 1e-15
            assert abs(cp.p_1 - cp.alpha * cp.p_R) < 1e-15
            assert cp.p_1 <= cp.p_R + 1e-15
            assert -1e-12 <= cp.sigma <= 1 + 1e-12
            if cp.p_R > 1e-12:
                # the survivor-count form of sigma agrees with the closed form
                alt = 1 / (1 + 3 * cp.mu_R * (1 - cp.p_R) / cp.p_R)
                assert abs(alt - cp.sigma) < 1e-12


def test_build_params_endpoints():
    cp = build_params(1.0, L)
    assert (cp.alpha, cp.p_R, cp.sigma, cp.mu_R) == (1.0, 1.0, 1.0, 1.0)
    cp = build_params(0.2, NL)
    assert (cp.alpha, cp.p_R, cp.sigma) == (0.5, 0.0, 0.0)
    cp = build_params(0.5, L)
    assert abs(cp.mu_R - 1 / (2 - INV_PHI)) < 1e-14


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.5])
def test_domain_errors_p(bad):
    with pytest.raises(DomainError):
        alpha_from_p(bad, L)
    with pytest.raises(DomainError):
        survival_probability(bad, NL)
    with pytest.raises(DomainError):
        build_params(bad, L)


@pytest.mark.parametrize("bad", [0.49, 1.01, -1])
def test_domain_errors_alpha(bad):
    with pytest.raises(DomainError):
        p_from_alpha(bad, L)
    with pytest.raises(DomainError):
        compression_rate(bad)


def test_case_parsing():
    assert ModelCase.parse("Linear") is L
    assert ModelCase.parse(" nonlinear ") is NL
    with pytest.raises(DomainError):
        ModelCase.parse("cubic")
