import itertools
from fractions import Fraction

import pytest

from randfib.cfrac import (
    INF,
    ONE,
    ROOT_INTERVAL,
    ZERO,
    ContinuedFraction,
    ERat,
    SternBrocotInterval,
    blocks,
    cf_eval,
    interval_of_suffix,
    pieces,
    q_of_path,
    sb_children,
    sb_locate,
)
from randfib.words import InvalidPathError, TreeKind, label_trace

FIG5 = "RLRRLRRLRLRLRR"


def r_paths(max_len):
    for n in range(1, max_len + 1):
        for tail in itertools.product("RL", repeat=n - 1):
            w = "R" + "".join(tail)
            if "LL" not in w:
                yield w


def piece_suffixes(max_pieces):
    for r in range(0, max_pieces + 1):
        for combo in itertools.product(("R", "RL"), repeat=r):
            yield "".join(combo), r


def test_erat_basics():
    assert ERat(2, 4) == ERat(1, 2)
    assert ERat(1, 0).is_infinite
    assert str(ERat(27, 20)) == "27/20"
    assert ZERO < ONE < INF
    assert float(INF) == float("inf")
    with pytest.raises(ValueError):
        ERat(0, 0)


def test_pieces_examples():
    assert pieces("RR") == ["R", "R"]
    assert pieces("RLR") == ["RL", "R"]
    assert pieces(FIG5) == ["RL", "R", "RL", "R", "RL", "RL", "RL", "R", "R"]
    assert "".join(pieces(FIG5)) == FIG5
    with pytest.raises(InvalidPathError):
        pieces("LR")


def test_blocks_examples():
    cf = blocks("RR")
    assert cf.leading and cf.quotients == (1, 1)
    assert cf_eval(cf) == ERat(2, 1)
    cf5 = blocks("R" + FIG5)
    assert cf5.leading and cf5.quotients == (1, 2, 1, 6)
    cf_rrl = blocks("RRL")
    assert not cf_rrl.leading and cf_rrl.quotients == (2,)
    assert cf_eval(cf_rrl) == ERat(1, 2)


def test_cf_eval_examples():
    assert cf_eval(ContinuedFraction(True, (1, 2, 1, 6))) == ERat(27, 20)
    assert cf_eval(ContinuedFraction(True, (7,))) == ERat(7, 1)
    assert cf_eval(ContinuedFraction(False, (2,))) == ERat(1, 2)
    assert cf_eval(ContinuedFraction(True, ())) == INF
    assert cf_eval(ContinuedFraction(False, ())) == ZERO
    with pytest.raises(ValueError):
        ContinuedFraction(True, (0, 2))


def test_cf_str():
    assert str(ContinuedFraction(True, (1, 2))) == "[1,2]"
    assert str(ContinuedFraction(False, (2,))) == "[0;2]"


def test_q_of_path_examples():
    assert q_of_path("R") == ERat(2, 1)
    assert q_of_path(FIG5) == ERat(27, 20)
    assert q_of_path("RL") == ERat(1, 2)


def test_q_of_path_equals_label_ratio_exhaustive():
    for w in r_paths(12):
        trace = label_trace(w, TreeKind.RTREE)
        q = q_of_path(w)
        assert q.num * trace[-2] == q.den * trace[-1], w


def test_sb_children_examples():
    left, right = sb_children(ROOT_INTERVAL)
    assert (left.lo, left.hi, left.rank) == (ZERO, ONE, 1)
    assert (right.lo, right.hi, right.rank) == (ONE, INF, 1)
    l2, r2 = sb_children(SternBrocotInterval(ERat(1, 1), ERat(2, 1), 2))
    assert l2.hi == ERat(3, 2) and r2.lo == ERat(3, 2)
    l3, r3 = sb_children(SternBrocotInterval(ZERO, ONE, 1))
    assert l3.hi == ERat(1, 2)


def test_interval_determinant_enforced():
    with pytest.raises(ValueError):
        SternBrocotInterval(ERat(1, 3), ERat(2, 3), 2)


def test_interval_of_suffix_examples():
    assert interval_of_suffix("") == ROOT_INTERVAL
    r = interval_of_suffix("R")
    assert (r.lo, r.hi, r.rank) == (ONE, INF, 1)
    rl = interval_of_suffix("RL")
    assert (rl.lo, rl.hi, rl.rank) == (ZERO, ONE, 1)


def test_suffix_rank_is_piece_count():
    for s, r in piece_suffixes(5):
        assert interval_of_suffix(s).rank == r


def test_alternation_table():
    # elbow-extension goes left exactly at even piece counts
    for s, r in piece_suffixes(5):
        base = interval_of_suffix(s)
        left, right = sb_children(base)
        elbow = interval_of_suffix("RL" + s)
        step = interval_of_suffix("R" + s)
        if r % 2 == 0:
            assert elbow == left and step == right, s
        else:
            assert elbow == right and step == left, s


def test_containment_of_path_values():
    for w in r_paths(12):
        ps = pieces(w)
        q = q_of_path(w)
        for j in range(len(ps) + 1):
            s = "".join(ps[j:])
            iv = interval_of_suffix(s)
            assert iv.contains(q), (w, s)


def test_sb_locate_rational_boundary():
    chain, hit = sb_locate(ERat(1, 2), 5)
    assert [str(iv) for iv in chain] == ["0/1..1/0", "0/1..1/1"]
    assert hit == 2
    chain, hit = sb_locate(Fraction(27, 20), 15)
    assert hit == 10  # depth = sum of partial quotients of [1;2,1,6]
    # direction runs along the chain reproduce the continued fraction
    dirs = []
    for a, b in zip(chain, chain[1:]):
        dirs.append("L" if b.hi == a.hi else "R")
    runs = [len(list(g)) for _, g in itertools.groupby(dirs)]
    assert runs == [1, 2, 1, 5]


def test_sb_locate_golden_ratio_alternates():
    phi = (1 + 5 ** 0.5) / 2
    chain, hit = sb_locate(phi, 12)
    assert hit is None
    dirs = []
    for a, b in zip(chain[1:], chain[2:]):
        dirs.append("L" if b.hi == a.hi else "R")
    assert all(x != y for x, y in zip(dirs, dirs[1:]))


def test_sb_locate_domain():
    with pytest.raises(ValueError):
        sb_locate(Fraction(-1, 2), 3)
    with pytest.raises(ValueError):
        sb_locate(0.5, -1)


def test_children_preserve_determinant_deep():
    iv = ROOT_INTERVAL
    for turn in "RLRRLLRLRRRL":
        iv = sb_children(iv)[0 if turn == "L" else 1]
        a, b = iv.lo.num, iv.lo.den
        c, d = iv.hi.num, iv.hi.den
        assert a * d - b * c == -1
        m = iv.mediant()
        assert iv.lo < m < iv.hi
