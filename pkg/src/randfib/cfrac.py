"""Exact Stern-Brocot arithmetic and continued fractions of no-LL paths.

A Stern-Brocot interval is [a/b, c/d] with non-negative integer entries and
ad - bc = -1 (convention 1/0 = +infinity).  The rank-0 interval is
[0/1, 1/0]; splitting at the mediant (a+c)/(b+d) produces the two children
of rank r+1.  Every positive rational appears exactly once as a mediant.

A path in the no-LL subtree decomposes uniquely into pieces that are either
single right steps R or elbows RL.  Cutting between consecutive identical
pieces partitions the pieces into blocks; the block sizes, read from the
last block backwards, are the partial quotients of the ratio of the last two
labels along the path.  The set of paths sharing a fixed suffix maps onto a
Stern-Brocot interval whose rank is the suffix's piece count.

Everything in this module is exact integer arithmetic; no floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .words import InvalidPathError, L, R, check_r_path

RationalLike = Union["ERat", Fraction, int, float]


@dataclass(frozen=True, order=False)
class ERat:
    """Extended non-negative rational a/b in lowest terms; 1/0 = +infinity."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.num < 0 or self.den < 0:
            raise ValueError("extended rationals are non-negative")
        if self.num == 0 and self.den == 0:
            raise ValueError("0/0 is not a rational")
        g = math.gcd(self.num, self.den)
        if g > 1:
            object.__setattr__(self, "num", self.num // g)
            object.__setattr__(self, "den", self.den // g)

    @property
    def is_infinite(self) -> bool:
        return self.den == 0

    def __float__(self) -> float:
        return math.inf if self.den == 0 else self.num / self.den

    def as_fraction(self) -> Fraction:
        if self.den == 0:
            raise ValueError("infinity has no Fraction value")
        return Fraction(self.num, self.den)

    def _cmp_key(self, other: "ERat") -> tuple[int, int]:
        return (self.num * other.den, other.num * self.den)

    def __lt__(self, other: "ERat") -> bool:
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other: "ERat") -> bool:
        a, b = self._cmp_key(other)
        return a <= b

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


ZERO = ERat(0, 1)
ONE = ERat(1, 1)
INF = ERat(1, 0)


def _coerce(x: RationalLike) -> tuple[int, int] | float:
    """Return (num, den) for exact inputs, or a float for float input."""
    if isinstance(x, ERat):
        return (x.num, x.den)
    if isinstance(x, Fraction):
        return (x.numerator, x.denominator)
    if isinstance(x, int):
        return (x, 1)
    return float(x)


@dataclass(frozen=True)
class SternBrocotInterval:
    """Interval [lo, hi] with lo = a/b, hi = c/d and ad - bc = -1."""

    lo: ERat
    hi: ERat
    rank: int

    def __post_init__(self) -> None:
        a, b = self.lo.num, self.lo.den
        c, d = self.hi.num, self.hi.den
        if a * d - b * c != -1:
            raise ValueError(f"not a Stern-Brocot interval: [{self.lo}, {self.hi}]")
        if self.rank < 0:
            raise ValueError("rank must be non-negative")

    def mediant(self) -> ERat:
        return ERat(self.lo.num + self.hi.num, self.lo.den + self.hi.den)

    def contains(self, x: RationalLike) -> bool:
        v = _coerce(x)
        if isinstance(v, float):
            return float(self.lo) <= v <= float(self.hi)
        n, d = v
        return (self.lo.num * d <= n * self.lo.den) and (n * self.hi.den <= self.hi.num * d)

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"


ROOT_INTERVAL = SternBrocotInterval(ZERO, INF, 0)


def sb_children(iv: SternBrocotInterval) -> tuple[SternBrocotInterval, SternBrocotInterval]:
    """Left and right rank-(r+1) subintervals split at the mediant."""
    m = iv.mediant()
    return (
        SternBrocotInterval(iv.lo, m, iv.rank + 1),
        SternBrocotInterval(m, iv.hi, iv.rank + 1),
    )


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients a_1..a_l; leading means the value exceeds 1."""

    leading: bool
    quotients: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(q < 1 for q in self.quotients):
            raise ValueError("partial quotients must be positive")

    def __str__(self) -> str:
        inner = ",".join(str(q) for q in self.quotients)
        return f"[{inner}]" if self.leading else f"[0;{inner}]"


def pieces(y: str) -> list[str]:
    """Unique greedy decomposition of a no-LL path into R and RL pieces."""
    check_r_path(y)
    out = []
    i = 0
    while i < len(y):
        if i + 1 < len(y) and y[i + 1] == L:
            out.append(R + L)
            i += 2
        else:
            out.append(R)
            i += 1
    return out


def blocks(y: str) -> ContinuedFraction:
    """Block sizes of the piece decomposition, last block first.

    A cutting is inserted between each pair of consecutive identical pieces;
    the resulting block sizes, read from the end of the path backwards, are
    the partial quotients.  The value exceeds 1 iff the last piece is a
    single R.
    """
    ps = pieces(y)
    if not ps:
        raise InvalidPathError("empty path has no block decomposition")
    sizes = [1]
    for prev, cur in zip(ps, ps[1:]):
        if cur == prev:
            sizes.append(1)
        else:
            sizes[-1] += 1
    sizes.reverse()
    return ContinuedFraction(leading=(ps[-1] == R), quotients=tuple(sizes))


def cf_eval(cf: ContinuedFraction) -> ERat:
    """Exact value of a continued fraction.

    Empty quotient list evaluates to infinity (leading) or 0 (non-leading),
    matching the open end of a one-block suffix interval.
    """
    if not cf.quotients:
        return INF if cf.leading else ZERO
    num, den = cf.quotients[-1], 1
    for q in reversed(cf.quotients[:-1]):
        num, den = q * num + den, num
    if cf.leading:
        return ERat(num, den)
    return ERat(den, num)


def q_of_path(y: str) -> ERat:
    """Ratio of the last two labels along the path y, via block sizes.

    Computed on the path extended by one initial R (the step from the root
    to its only child), so q_of_path("R") = 2/1 and the empty path gives
    1/1.
    """
    check_r_path(y)
    return cf_eval(blocks(R + y))


def interval_of_suffix(s: str) -> SternBrocotInterval:
    """Closure of the label ratios over all paths ending with the suffix s.

    The bounds are the continued fractions [a_1..a_{l-1}] and [a_1..a_l]
    from the block decomposition of s; the rank equals the piece count.
    The empty suffix gives the rank-0 interval [0, infinity].
    """
    check_r_path(s)
    if s == "":
        return ROOT_INTERVAL
    cf = blocks(s)
    tail = cf_eval(ContinuedFraction(cf.leading, cf.quotients[:-1]))
    head = cf_eval(cf)
    lo, hi = (tail, head) if tail < head else (head, tail)
    return SternBrocotInterval(lo, hi, rank=len(pieces(s)))


def sb_locate(x: RationalLike, depth: int) -> tuple[list[SternBrocotInterval], int | None]:
    """Nested chain of Stern-Brocot intervals containing x.

    Returns (chain, mediant_rank): the chain holds the intervals of ranks
    0..depth containing x, truncated early if x is hit exactly as a mediant;
    mediant_rank is the rank of that mediant (None if never hit).  For
    rational x the chain always terminates at a mediant at finite rank.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    v = _coerce(x)
    if isinstance(v, float):
        if not (0 <= v <= math.inf):
            raise ValueError("x must lie in [0, infinity]")
    else:
        if v[0] < 0:
            raise ValueError("x must lie in [0, infinity]")
    iv = ROOT_INTERVAL
    chain = [iv]
    for _ in range(depth):
        m = iv.mediant()
        if isinstance(v, float):
            mv = float(m)
            if v == mv:
                return chain, iv.rank + 1
            iv = sb_children(iv)[0] if v < mv else sb_children(iv)[1]
        else:
            n, d = v
            lhs, rhs = n * m.den, m.num * d
            if lhs == rhs:
                return chain, iv.rank + 1
            iv = sb_children(iv)[0] if lhs < rhs else sb_children(iv)[1]
        chain.append(iv)
    return chain, None
