import math
from fractions import Fraction

import pytest

from randfib.cfrac import ERat, SternBrocotInterval, sb_children
from randfib.measure import (
    PolicyError,
    RefinePolicy,
    TailDivergenceError,
    change_of_variable_residual,
    furstenberg_residual,
    furstenberg_residual_exact,
    integrate_log,
    integrate_split,
    mass_of_interval,
    nu_f_build,
    question_mark,
    refine_for_log_tol,
    refine_nu_alpha,
    _walk_mass,
)
from randfib.params import INV_PHI, DomainError

VISWANATH_LOG = math.log(1.13198824)  # reference constant, 9 significant digits


def exact_policy(rank):
    return RefinePolicy(mass_eps=0, max_rank=rank, contrib_eps=None)


def enumerate_intervals(maxrank):
    stack = [(0, 1, 1, 0, 0)]
    while stack:
        a, b, c, d, r = stack.pop()
        if r >= 1:
            yield a, b, c, d, r
        if r < maxrank:
            mn, md = a + c, b + d
            stack.append((a, b, mn, md, r + 1))
            stack.append((mn, md, c, d, r + 1))


def test_depth_one_masses():
    lm = refine_nu_alpha(Fraction(2, 3), exact_policy(1))
    leaves = {str(leaf.interval): leaf.mass for leaf in lm.iter_leaves()}
    assert leaves == {"0/1..1/1": Fraction(1, 3), "1/1..1/0": Fraction(2, 3)}


def test_rank_two_alpha_squared():
    a = Fraction(3, 5)
    iv = SternBrocotInterval(ERat(1, 1), ERat(2, 1), 2)
    assert mass_of_interval(a, iv) == a * a


def test_uniform_dyadic_masses_at_half():
    lm = refine_nu_alpha(Fraction(1, 2), exact_policy(5))
    assert len(lm) == 32
    assert set(lm.mass) == {Fraction(1, 32)}
    for leaf in lm.iter_leaves():
        assert leaf.exp_r + leaf.exp_rl == leaf.interval.rank == 5


def test_partition_and_normalization_exact():
    a = Fraction(2, 5)
    lm = refine_nu_alpha(a, exact_policy(7))
    assert lm.total_mass() == 1
    order = lm.sorted_indices()
    for i, j in zip(order, order[1:]):
        assert (lm.hi_num[i], lm.hi_den[i]) == (lm.lo_num[j], lm.lo_den[j])
    first, last = order[0], order[-1]
    assert (lm.lo_num[first], lm.lo_den[first]) == (0, 1)
    assert (lm.hi_num[last], lm.hi_den[last]) == (1, 0)
    for leaf in lm.iter_leaves():
        assert leaf.mass == a ** leaf.exp_r * (1 - a) ** leaf.exp_rl


def test_partition_float_mode():
    lm = refine_nu_alpha(0.7, RefinePolicy(mass_eps=1e-6, max_rank=40, contrib_eps=None))
    assert abs(lm.total_mass() - 1) < 1e-12
    assert all(m <= 1e-6 or r >= 40 for m, r in zip(lm.mass, lm.rank))


def test_mass_examples():
    a = Fraction(2, 3)
    assert mass_of_interval(a, SternBrocotInterval(ERat(0, 1), ERat(1, 1), 1)) == 1 - a
    assert mass_of_interval(a, SternBrocotInterval(ERat(1, 1), ERat(1, 0), 1)) == a
    half = Fraction(1, 2)
    for a_, b_, c_, d_, r in enumerate_intervals(3):
        if r == 3:
            iv = SternBrocotInterval(ERat(a_, b_), ERat(c_, d_), 3)
            assert mass_of_interval(half, iv) == Fraction(1, 8)


def test_mirror_symmetry_exact_rank8():
    a = Fraction(3, 5)
    for a_, b_, c_, d_, r in enumerate_intervals(8):
        m1 = _walk_mass(a, (a_, b_), (c_, d_))
        m2 = _walk_mass(1 - a, (d_, c_), (b_, a_))
        assert m1 == m2


def test_integrate_log_at_half_brackets_zero():
    lm = refine_nu_alpha(0.5, RefinePolicy(mass_eps=1e-7, max_rank=40, contrib_eps=1e-7))
    value, err = integrate_log(lm)
    assert abs(value) <= err


def test_integrate_log_viswanath_loose():
    lm = refine_for_log_tol(INV_PHI, 1e-5)
    value, err = integrate_log(lm)
    assert err <= 1e-5
    assert abs(value - VISWANATH_LOG) <= err + 5e-9


def test_integrate_refinement_stability():
    # tightening the policy keeps the value inside the previous error band
    v_prev, e_prev = integrate_log(refine_for_log_tol(0.7, 1e-4))
    v_next, e_next = integrate_log(refine_for_log_tol(0.7, 1e-6))
    assert e_next <= 1e-6
    assert abs(v_next - v_prev) <= e_prev


def test_integrate_split_symmetry_at_half():
    lm = refine_nu_alpha(0.5, RefinePolicy(mass_eps=1e-8, max_rank=48, contrib_eps=1e-8))
    sp = integrate_split(lm)
    assert abs(sp.below1 + sp.above1) <= sp.below1_err + sp.above1_err


def test_integrate_split_ratio_loose():
    a = 2 / 3
    sp = integrate_split(refine_for_log_tol(a, 1e-6))
    total = sp.below1 + sp.above1
    assert abs(sp.below1 / total - (a + 1) * (1 - a) / (1 - 2 * a)) < 1e-4
    assert abs(sp.above1 / total - a * (a - 2) / (1 - 2 * a)) < 1e-4


def test_root_only_measure_integrates():
    lm = refine_nu_alpha(0.6, RefinePolicy(mass_eps=2.0, max_rank=0, contrib_eps=None))
    assert len(lm) == 1
    value, err = integrate_log(lm)
    assert math.isfinite(value) and err > 0


def test_change_of_variable_exact():
    assert change_of_variable_residual(Fraction(2, 3), 10) == 0
    assert change_of_variable_residual(Fraction(1, 2), 10) == 0
    assert change_of_variable_residual(Fraction(7, 9), 6) == 0


def test_question_mark_values():
    assert question_mark(Fraction(0)) == 0
    assert question_mark(Fraction(1)) == 1
    assert question_mark(Fraction(1, 2)) == Fraction(1, 2)
    assert question_mark(Fraction(1, 3)) == Fraction(1, 4)
    assert question_mark(Fraction(2, 3)) == Fraction(3, 4)
    assert question_mark("2/5") == Fraction(3, 8)
    assert question_mark(ERat(1, 4)) == Fraction(1, 8)


def test_question_mark_monotone_symmetric():
    prev = Fraction(-1)
    for k in range(51):
        x = Fraction(k, 50)
        v = question_mark(x)
        assert v > prev
        assert question_mark(1 - x) == 1 - v
        prev = v


def test_question_mark_domain():
    with pytest.raises(DomainError):
        question_mark(Fraction(3, 2))


def test_nu_f_masses():
    slm = nu_f_build(0.5, exact_policy(4))
    assert abs(slm.m_plus - 0.809017) < 1e-6
    assert abs(slm.m_minus - 0.190983) < 1e-6
    assert abs(slm.m_plus + slm.m_minus - 1) < 1e-14
    assert abs(slm.total_mass() - 1) < 1e-12
    # conditional law on the positive half-line is the one-sided measure
    ref = refine_nu_alpha(slm.alpha, exact_policy(4))
    assert [float(m) for m in slm.pos.mass] == [float(m) for m in ref.mass]
    # negative leaves mirror the positive ones with the m_minus scaling
    negs = list(slm.neg_leaves())
    assert len(negs) == len(slm.pos)
    total_neg = sum(m for _, _, m in negs)
    assert abs(total_neg - slm.m_minus) < 1e-12
    assert all(lo[0] < 0 or (lo[0] <= 0 and hi[0] <= 0) for lo, hi, _ in negs)


def test_nu_f_domain():
    with pytest.raises(DomainError):
        nu_f_build(1.0)
    with pytest.raises(DomainError):
        nu_f_build(0.0)


def test_furstenberg_residual_exact_zero():
    assert furstenberg_residual_exact(Fraction(2, 3), 6) == 0
    assert furstenberg_residual_exact(Fraction(3, 4), 6) == 0


def test_furstenberg_residual_float_tiny():
    assert furstenberg_residual(0.5, 6) <= 1e-12
    assert furstenberg_residual(0.7, 6) <= 1e-12


def test_policy_validation():
    with pytest.raises(PolicyError):
        RefinePolicy(mass_eps=0.0, max_rank=None, contrib_eps=None)
    with pytest.raises(PolicyError):
        RefinePolicy(tail_eps=0.0)


def test_tail_divergence_guard():
    lm = refine_nu_alpha(0.4, RefinePolicy(mass_eps=1e-4, max_rank=30, contrib_eps=None))
    lm.policy = RefinePolicy(mass_eps=1e-4, max_rank=None, contrib_eps=None)
    with pytest.raises(TailDivergenceError):
        integrate_log(lm)


def test_refine_domain():
    with pytest.raises(DomainError):
        refine_nu_alpha(1.0)
    with pytest.raises(DomainError):
        refine_nu_alpha(0.0)
