"""Sign words, tree label evaluation, and the suffix-deletion reduction.

A sign word is a finite string over {R, L} coding a path in one of three
labelled trees.  Every tree starts from two vertices labelled 1, 1; an R step
labels the new vertex father+grandfather, an L step labels it
father-grandfather (tree T and the no-LL subtree R) or
|father-grandfather| (tree T-tilde).  The label at the end of the path coded
by the k-th letter is the (k+2)-nd term of the corresponding random
Fibonacci sequence.

The reduction algorithm deletes every RLL suffix as it forms, shrinking the
word by three letters per deletion while preserving the final label (up to
sign in the linear case, where the letter appended right after a deletion is
flipped).  Letters of the reduced word that are never deleted within the
horizon are the "survivors"; their positions and append times drive all the
statistical estimators in the montecarlo module.

Positions are stored 0-based; INDEX_BASE converts to the conventional
numbering that starts sign words at index 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .params import ModelCase

R = "R"
L = "L"
INDEX_BASE = 3

Matrix = tuple[tuple[int, int], tuple[int, int]]

# Right-multiplication matrices for the linear recurrence: an R step sends the
# row vector (F, F') to (F', F' + F), an L step to (F', F' - F).
MAT_A: Matrix = ((0, 1), (1, 1))
MAT_B: Matrix = ((0, -1), (1, 1))
MAT_C: Matrix = ((0, 1), (1, -1))


class InvalidPathError(ValueError):
    """A word is not a valid path for the requested tree."""


class TreeKind(Enum):
    T = "T"
    TTILDE = "Ttilde"
    RTREE = "R"


@dataclass
class ReducedWord:
    """Reduced word together with the bookkeeping of how it was produced.

    letters    surviving letters, in order.
    lengths    word length after each input letter was processed.
    deletions  number of RLL suffixes removed.
    flips      number of letters appended flipped (linear case only).
    n_of_k     append times of the surviving letters: maps the position k of
               a survivor (INDEX_BASE-based) to the input time n at which it
               was appended, i.e. the finite-horizon version of the first
               time length k is reached for good.
    """

    letters: str
    lengths: list[int] = field(default_factory=list)
    deletions: int = 0
    flips: int = 0
    n_of_k: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class ReductionStats:
    """Survivor/deletion counts of one reduction run.

    s: R's among survivors, d: deleted R's, k: final reduced length,
    n: input length.  Always n = k + 3*d.
    """

    s: int
    d: int
    k: int
    n: int


@dataclass(frozen=True)
class NDCoefficients:
    """Coefficients (n, d) expressing a label as d*a + n*b.

    If the edge entered before a path suffix y carries labels (a, b), the
    label at the end of y is d(y)*a + n(y)*b.  Both are non-negative for any
    suffix that stays inside the no-LL subtree.
    """

    n: int
    d: int


def check_word(word: str) -> None:
    bad = set(word) - {R, L}
    if bad:
        raise InvalidPathError(f"word contains letters outside {{R, L}}: {sorted(bad)}")


def is_r_path(word: str) -> bool:
    """True if word is empty or starts with R and contains no LL factor."""
    return word == "" or (word[0] == R and "LL" not in word)


def check_r_path(word: str) -> None:
    check_word(word)
    if not is_r_path(word):
        raise InvalidPathError(f"{word!r} is not a valid no-LL path starting with R")


def label_trace(word: str, tree: TreeKind) -> list[int]:
    """Labels 1, 1, g_3, ..., g_{k+2} along the path coded by word.

    Arbitrary-precision integers throughout; labels grow like phi^k, so keep
    words short or move to montecarlo's log-space simulation.
    """
    check_word(word)
    if tree is TreeKind.RTREE:
        check_r_path(word)
    a, b = 1, 1
    out = [1, 1]
    absval = tree is TreeKind.TTILDE
    for ch in word:
        if ch == R:
            a, b = b, b + a
        else:
            nxt = b - a
            a, b = b, abs(nxt) if absval else nxt
        out.append(b)
    return out


def mat_mul(x: Matrix, y: Matrix) -> Matrix:
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def mat_neg(x: Matrix) -> Matrix:
    return tuple(tuple(-v for v in row) for row in x)  # type: ignore[return-value]


def label_via_matrices(word: str) -> tuple[int, int]:
    """Row vector (1, 1) right-multiplied by A for each R and B for each L.

    Returns the final (previous, current) label pair of the linear
    recurrence; the second component equals label_trace(word, T)[-1] and the
    first equals label_trace(word, T)[-2].
    """
    check_word(word)
    a, b = 1, 1
    for ch in word:
        if ch == R:
            a, b = b, a + b
        else:
            a, b = b, b - a
    return a, b


def reduce_word(word: str, case: ModelCase) -> tuple[ReducedWord, ReductionStats]:
    """Run the RLL suffix-deletion reduction over a full sign word.

    In the linear case the letter appended immediately after a deletion is
    flipped (R <-> L); in the non-linear case the drawn letter is always
    appended as-is.  The label read along the result in the appropriate tree
    equals |F_n| (linear) respectively the non-linear term itself.
    """
    check_word(word)
    stack: list[str] = []
    times: list[int] = []
    lengths: list[int] = []
    deletions = 0
    flips = 0
    flip_next = False
    linear = case is ModelCase.LINEAR
    for i, ch in enumerate(word):
        if linear and flip_next:
            ch = L if ch == R else R
            flips += 1
        flip_next = False
        stack.append(ch)
        times.append(i)
        if len(stack) >= 3 and stack[-3] == R and stack[-2] == L and stack[-1] == L:
            del stack[-3:]
            del times[-3:]
            deletions += 1
            flip_next = True
        lengths.append(len(stack))
    letters = "".join(stack)
    n_of_k = {j + INDEX_BASE: t + INDEX_BASE for j, t in enumerate(times)}
    reduced = ReducedWord(
        letters=letters,
        lengths=lengths,
        deletions=deletions,
        flips=flips,
        n_of_k=n_of_k,
    )
    stats = ReductionStats(
        s=letters.count(R),
        d=deletions,
        k=len(letters),
        n=len(word),
    )
    return reduced, stats


def reduction_trace(word: str, case: ModelCase) -> list[str]:
    """Successive reduced words after each input letter."""
    check_word(word)
    out = []
    for i in range(1, len(word) + 1):
        out.append(reduce_word(word[:i], case)[0].letters)
    return out


def strip_leading_L(reduced: ReducedWord | str) -> ReducedWord | str:
    """Drop the first three letters of an L-initial reduced word.

    Any three letters following an initial L return the running label pair
    to +-(1, 1), so the labels along the remainder agree with a fresh start
    up to one global sign.  Words already starting with R pass through
    unchanged.
    """
    letters = reduced if isinstance(reduced, str) else reduced.letters
    if letters == "" or letters[0] == R:
        return reduced
    if len(letters) < 3:
        raise InvalidPathError("cannot strip three letters from a word shorter than 3")
    stripped = letters[3:]
    if isinstance(reduced, str):
        return stripped
    shifted = {k - 3: n for k, n in reduced.n_of_k.items() if k - INDEX_BASE >= 3}
    return ReducedWord(
        letters=stripped,
        lengths=reduced.lengths,
        deletions=reduced.deletions,
        flips=reduced.flips,
        n_of_k=shifted,
    )


def nd_coefficients(y: str) -> NDCoefficients:
    """Linear-combination coefficients of a path suffix.

    Recursion: n and d both start from the pair (previous, current) =
    ((0, 1), (1, 0)); an R adds the previous value, an L subtracts it.
    Valid suffixes are empty or start with R and contain no LL.
    """
    check_r_path(y)
    pn, pd = 0, 1
    cn, cd = 1, 0
    for ch in y:
        if ch == R:
            cn, pn = cn + pn, cn
            cd, pd = cd + pd, cd
        else:
            cn, pn = cn - pn, cn
            cd, pd = cd - pd, cd
    return NDCoefficients(n=cn, d=cd)
