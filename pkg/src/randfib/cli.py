"""Command-line interface: every computation behind one reproducible tool.

JSON is the default output format (schema-versioned, deterministic key
order); tabular dumps (curves, measures) use CSV.  Randomized subcommands
require an explicit --seed; there is no wall-clock default.  Exit codes:
0 success, 1 usage or validation error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from fractions import Fraction

from . import lyapunov, measure, montecarlo, params, words
from .cfrac import blocks, cf_eval, interval_of_suffix, pieces, q_of_path, sb_children
from .params import DomainError, ModelCase
from .words import InvalidPathError, TreeKind

SCHEMA = "randfib-1"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for verify only
        raise CliError(message)


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _json(obj: dict, output: str | None) -> None:
    payload = {"schema": SCHEMA, **obj}
    _emit(json.dumps(payload, sort_keys=True), output)


def _case(ns) -> ModelCase:
    return ModelCase.parse(ns.case)


def _parse_grid(ns) -> list[float]:
    if ns.grid:
        return [float(tok) for tok in ns.grid.split(",") if tok.strip()]
    lo, hi, k = ns.p_min, ns.p_max, ns.points
    if k < 2:
        raise CliError("--points must be at least 2")
    return [lo + (hi - lo) * i / (k - 1) for i in range(k)]


def build_parser() -> _Parser:
    parser = _Parser(prog="randfib", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gamma", help="growth exponent for one parameter")
    g.add_argument("--p", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--case", default="linear")
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--output")

    c = sub.add_parser("gamma-curve", help="growth exponent over a p grid (CSV)")
    c.add_argument("--case", required=True)
    c.add_argument("--grid", help="comma separated p values")
    c.add_argument("--points", type=int, default=50)
    c.add_argument("--p-min", type=float, default=0.02)
    c.add_argument("--p-max", type=float, default=1.0)
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--threads", type=int, default=os.cpu_count())
    c.add_argument("--output")

    d = sub.add_parser("derivative", help="d(gamma)/d(alpha)")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--tol", type=float, default=1e-3)
    d.add_argument("--output")

    m = sub.add_parser("measure", help="dump the leaf partition as CSV")
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--max-rank", type=int, default=16)
    m.add_argument("--mass-eps", type=float, default=1e-14)
    m.add_argument("--output")

    q = sub.add_parser("questionmark", help="Minkowski question-mark value")
    q.add_argument("--x", required=True, help="rational in [0,1], e.g. 1/3")
    q.add_argument("--output")

    f = sub.add_parser("furstenberg", help="invariance residual of the two-sided measure")
    f.add_argument("--p", type=float, required=True)
    f.add_argument("--max-rank", type=int, default=6)
    f.add_argument("--output")

    s = sub.add_parser("simulate", help="Monte Carlo growth estimate")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--case", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--output")

    e = sub.add_parser("estimate", help="Monte Carlo reduction estimators")
    e.add_argument("--p", type=float, required=True)
    e.add_argument("--case", required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--output")

    r = sub.add_parser("reduce", help="suffix-deletion trace of a sign word")
    r.add_argument("--word", required=True)
    r.add_argument("--case", required=True)
    r.add_argument("--output")

    qp = sub.add_parser("qpath", help="continued fraction of a no-LL path")
    qp.add_argument("--word", required=True)
    qp.add_argument("--output")

    v = sub.add_parser("verify", help="run the exact identity suites")
    v.add_argument("--max-word-len", type=int, default=12)
    v.add_argument("--max-rank", type=int, default=8)
    v.add_argument("--output")
    return parser


def _cmd_gamma(ns) -> int:
    if (ns.p is None) == (ns.alpha is None):
        raise CliError("give exactly one of --p or --alpha")
    if ns.p is not None:
        res = lyapunov.gamma_of_p(ns.p, _case(ns), ns.tol)
    else:
        res = lyapunov.gamma_of_alpha(ns.alpha, ns.tol)
    _json(res.to_dict(), ns.output)
    return 0


def _cmd_gamma_curve(ns) -> int:
    rows = lyapunov.gamma_curve(_case(ns), _parse_grid(ns), ns.tol, threads=ns.threads)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["p", "alpha", "gamma", "error_bound"])
    for p, alpha, gam, err in rows:
        w.writerow([repr(p), repr(alpha), repr(gam), repr(err)])
    _emit(buf.getvalue(), ns.output)
    return 0


def _cmd_derivative(ns) -> int:
    val = lyapunov.gamma_prime(ns.alpha, ns.tol)
    _json({"alpha": ns.alpha, "gamma_prime": val, "tol": ns.tol}, ns.output)
    return 0


def _cmd_measure(ns) -> int:
    policy = measure.RefinePolicy(mass_eps=ns.mass_eps, max_rank=ns.max_rank,
                                  contrib_eps=None)
    lm = measure.refine_nu_alpha(ns.alpha, policy)
    order = lm.sorted_indices() if len(lm) <= 200_000 else range(len(lm))
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["lo_num", "lo_den", "hi_num", "hi_den", "rank", "expR", "expRL", "mass"])
    for i in order:
        w.writerow([
            int(lm.lo_num[i]), int(lm.lo_den[i]), int(lm.hi_num[i]), int(lm.hi_den[i]),
            int(lm.rank[i]), int(lm.exp_r[i]), int(lm.exp_rl[i]), repr(float(lm.mass[i])),
        ])
    _emit(buf.getvalue(), ns.output)
    return 0


def _cmd_questionmark(ns) -> int:
    val = measure.question_mark(ns.x)
    _json({"x": ns.x, "value": f"{val.numerator}/{val.denominator}",
           "value_float": float(val)}, ns.output)
    return 0


def _cmd_furstenberg(ns) -> int:
    res = measure.furstenberg_residual(ns.p, ns.max_rank)
    slm = measure.nu_f_build(ns.p, measure.RefinePolicy(mass_eps=0.0, max_rank=1,
                                                        contrib_eps=None))
    _json({"p": ns.p, "alpha": slm.alpha, "m_plus": slm.m_plus,
           "m_minus": slm.m_minus, "max_rank": ns.max_rank, "residual": res},
          ns.output)
    return 0


def _cmd_simulate(ns) -> int:
    case = _case(ns)
    g = montecarlo.simulate_growth(ns.p, case, ns.n, montecarlo.RngSpec(ns.seed))
    closed = lyapunov.gamma_of_p(ns.p, case, ns.tol).gamma
    _json({
        "p": ns.p, "case": case.value, "n": ns.n, "seed": ns.seed,
        "estimate": g.estimate, "stderr": g.stderr, "batches": g.batches,
        "closed_form": closed,
        "z_score": montecarlo.zscore(g.estimate, closed, g.stderr),
    }, ns.output)
    return 0


def _cmd_estimate(ns) -> int:
    case = _case(ns)
    est = montecarlo.estimate_reduction(ns.p, case, ns.n, montecarlo.RngSpec(ns.seed))
    cp = params.build_params(ns.p, case)
    _json({
        "p": ns.p, "case": case.value, "n": ns.n, "seed": ns.seed,
        "pR_hat": est.pR_hat, "sigma_hat": est.sigma_hat,
        "alpha_hat": est.alpha_hat, "muR_hat": est.muR_hat,
        "stderrs": est.stderrs,
        "closed_forms": {"pR": cp.p_R, "sigma": cp.sigma, "alpha": cp.alpha,
                         "muR": cp.mu_R},
        "z_scores": {
            "pR": montecarlo.zscore(est.pR_hat, cp.p_R, est.stderrs["pR"]),
            "sigma": montecarlo.zscore(est.sigma_hat, cp.sigma, est.stderrs["sigma"]),
            "alpha": montecarlo.zscore(est.alpha_hat, cp.alpha, est.stderrs["alpha"]),
            "muR": montecarlo.zscore(est.muR_hat, cp.mu_R, est.stderrs["muR"]),
        },
    }, ns.output)
    return 0


def _cmd_reduce(ns) -> int:
    case = _case(ns)
    trace = words.reduction_trace(ns.word, case)
    reduced, stats = words.reduce_word(ns.word, case)
    _json({
        "word": ns.word, "case": case.value, "trace": trace,
        "reduced": reduced.letters, "deletions": reduced.deletions,
        "flips": reduced.flips,
        "stats": {"s": stats.s, "d": stats.d, "k": stats.k, "n": stats.n},
    }, ns.output)
    return 0


def _cmd_qpath(ns) -> int:
    val = q_of_path(ns.word)
    cf = blocks("R" + ns.word)
    _json({
        "word": ns.word,
        "pieces": pieces(ns.word),
        "cf": str(cf),
        "value": str(val),
        "value_float": float(val),
    }, ns.output)
    return 0


# --- verification suites ------------------------------------------------------


def _suite_matrices() -> tuple[bool, str]:
    abbb = words.mat_mul(words.mat_mul(words.mat_mul(words.MAT_A, words.MAT_B),
                                       words.MAT_B), words.MAT_B)
    abba = words.mat_mul(words.mat_mul(words.mat_mul(words.MAT_A, words.MAT_B),
                                       words.MAT_B), words.MAT_A)
    ok = abbb == words.mat_neg(words.MAT_A) and abba == words.mat_neg(words.MAT_B)
    return ok, "ABBB=-A and ABBA=-B"


def _suite_reduction(max_len: int) -> tuple[bool, str]:
    checked = 0
    for n in range(1, max_len + 1):
        for bits in itertools.product("RL", repeat=n):
            w = "".join(bits)
            lin = words.label_trace(w, TreeKind.T)[-1]
            red_l, _ = words.reduce_word(w, ModelCase.LINEAR)
            if abs(words.label_trace(red_l.letters, TreeKind.T)[-1]) != abs(lin):
                return False, f"linear mismatch at {w}"
            non = words.label_trace(w, TreeKind.TTILDE)[-1]
            red_n, _ = words.reduce_word(w, ModelCase.NONLINEAR)
            if words.label_trace(red_n.letters, TreeKind.TTILDE)[-1] != non:
                return False, f"non-linear mismatch at {w}"
            checked += 1
    return True, f"{checked} words per case, length <= {max_len}"


def _suite_change_of_variable(max_rank: int) -> tuple[bool, str]:
    for a in (Fraction(2, 3), Fraction(1, 2), Fraction(3, 5)):
        if measure.change_of_variable_residual(a, max_rank) != 0:
            return False, f"non-zero residual at alpha={a}"
    return True, f"exact at alpha in {{2/3, 1/2, 3/5}}, rank <= {max_rank}"


def _suite_furstenberg(max_rank: int) -> tuple[bool, str]:
    for a in (Fraction(2, 3), Fraction(3, 4)):
        if measure.furstenberg_residual_exact(a, max_rank) != 0:
            return False, f"non-zero exact residual at alpha={a}"
    for p in (0.5, 0.7):
        if measure.furstenberg_residual(p, min(max_rank, 6)) > 1e-12:
            return False, f"float residual too large at p={p}"
    return True, f"exact at alpha in {{2/3, 3/4}} and float at p in {{0.5, 0.7}}"


def _suite_sb_alternation(max_pieces: int) -> tuple[bool, str]:
    checked = 0
    for r in range(0, max_pieces + 1):
        for combo in itertools.product(("R", "RL"), repeat=r):
            s = "".join(combo)
            base = interval_of_suffix(s)
            left, right = sb_children(base)
            elbow = interval_of_suffix("RL" + s)
            step = interval_of_suffix("R" + s)
            if r % 2 == 0:
                ok = elbow == left and step == right
            else:
                ok = elbow == right and step == left
            if not ok:
                return False, f"alternation broken at suffix {s!r}"
            checked += 1
    return True, f"{checked} suffixes with piece count <= {max_pieces}"


def _suite_question_mark() -> tuple[bool, str]:
    expected = {
        Fraction(0): Fraction(0), Fraction(1): Fraction(1),
        Fraction(1, 2): Fraction(1, 2), Fraction(1, 3): Fraction(1, 4),
        Fraction(2, 3): Fraction(3, 4),
    }
    for x, want in expected.items():
        if measure.question_mark(x) != want:
            return False, f"?({x}) != {want}"
    prev = Fraction(-1)
    for k in range(0, 51):
        x = Fraction(k, 50)
        v = measure.question_mark(x)
        if v <= prev and k > 0:
            return False, f"not strictly increasing at {x}"
        if measure.question_mark(1 - x) != 1 - v:
            return False, f"symmetry broken at {x}"
        prev = v
    return True, "exact values, monotone, symmetric on a 51-point grid"


def _cmd_verify(ns) -> int:
    suites = [
        ("matrices", lambda: _suite_matrices()),
        ("reduction", lambda: _suite_reduction(ns.max_word_len)),
        ("change-of-variable", lambda: _suite_change_of_variable(ns.max_rank)),
        ("furstenberg", lambda: _suite_furstenberg(ns.max_rank)),
        ("sb-alternation", lambda: _suite_sb_alternation(6)),
        ("question-mark", lambda: _suite_question_mark()),
    ]
    lines = []
    results = []
    all_ok = True
    for name, fn in suites:
        ok, detail = fn()
        all_ok &= ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        results.append({"suite": name, "ok": ok, "detail": detail})
    text = "\n".join(lines) + "\n" + json.dumps(
        {"schema": SCHEMA, "ok": all_ok, "suites": results}, sort_keys=True
    )
    _emit(text, ns.output)
    return 0 if all_ok else 2


_COMMANDS = {
    "gamma": _cmd_gamma,
    "gamma-curve": _cmd_gamma_curve,
    "derivative": _cmd_derivative,
    "measure": _cmd_measure,
    "questionmark": _cmd_questionmark,
    "furstenberg": _cmd_furstenberg,
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "reduce": _cmd_reduce,
    "qpath": _cmd_qpath,
    "verify": _cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        return _COMMANDS[ns.command](ns)
    except (CliError, DomainError, InvalidPathError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
