"""Weakest preterms and preconditions for probabilistic assertions.

pt(C, r) is a real expression whose value on mu equals the value of r on the
output distribution of C; WP lifts it to probabilistic formulas pointwise.
The conditional term r/B relativizes every probability to B, and satisfies
[[r/B]]_mu = [[r]]_{mu restricted to B}.

Loops expand through the termination classes wp(i) = "the loop exits after
exactly i bodies":

    wp(i)   = !wp(C^0, !B) && ... && !wp(C^{i-1}, !B) && wp(C^i, !B)
    wp(inf) = the conjunction of all !wp(C^i, !B) up to the unroll bound
    SUM     = sum over i of pt((if B then C else skip)^i, P(phi)) / wp(i)
    T_j     = f^j(SUM)  where  f(r) = pt(C, r) / wp(inf)

and pt(while B do C, P(phi)) is the series sum of the T_j.  The classes
partition the stores, restriction is linear, and on each class the loop
agrees with its i-fold guarded unrolling, which gives the characterization
[[pt(C, r)]]_mu = [[r]]_{[[C]]mu}; the f-iteration replays the same argument
on the not-yet-terminated remainder.  When wp(inf) is unsatisfiable on the
window, every window store lands in some class i <= unroll, all tail terms
vanish on window-supported inputs, and the truncated series is exact there;
otherwise the expansion is flagged non-exhaustive and evaluates to an
underapproximation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    And, Assign, Command, EMPTY_INTERP, Formula, If, IntConst, Not, PAnd,
    PImplies, PNot, POr, PRel, Prob, ProbFormula, RandAssign, RatConst,
    RealExpr, RealVar, RBin, Seq, Skip, SubDistribution, TRUE, While,
    and_all, command_prog_vars, node_size, normalize_real, prob_log_vars,
    prob_prog_vars, prob_real_vars, real_prog_vars, real_sum,
    simplify_formula, subst_prog_var,
)
from .semantics import DEFAULT_LOOP_BOUND, DEFAULT_QWINDOW, execute, sat_det
from .assertions import (
    DistFamily, REAL_GRID, StateWindow, eval_real, interpretations, sat_prob,
)
from .wp import (
    DEFAULT_UNROLL, TripleVerdict, default_window, wp,
)

DEFAULT_DEPTH = 16
SUBSET_SUM_LIMIT = 12
TAIL_NODE_BUDGET = 20000


def cond_term(r: RealExpr, b: Formula) -> RealExpr:
    """r/B: relativize every probability inside r to B."""
    memo: dict[int, RealExpr] = {}

    def go(n: RealExpr) -> RealExpr:
        key = id(n)
        got = memo.get(key)
        if got is None:
            if isinstance(n, Prob):
                got = Prob(And(n.formula, b))
            elif isinstance(n, RBin):
                got = RBin(n.op, go(n.left), go(n.right))
            else:
                got = n  # constants and real variables carry no probability
            memo[key] = got
        return got

    return go(r)


def pas_preterm_subset_sum(dist, var: str, phi: Formula) -> RealExpr:
    """Random-assignment preterm, written as the sum over nonempty value
    subsets T of (sum of weights in T) * P(phi holds exactly at T's values).

    Exponential in the number of values; refuses more than SUBSET_SUM_LIMIT.
    """
    pairs = dist.pairs
    if len(pairs) > SUBSET_SUM_LIMIT:
        raise ValueError(
            f"subset-sum preterm over {len(pairs)} values would need "
            f"{2 ** len(pairs) - 1} terms; limit is {SUBSET_SUM_LIMIT}")
    substituted = [(w, subst_prog_var(phi, var, IntConst(v))) for w, v in pairs]
    terms: list[RealExpr] = []
    for pattern in itertools.product((True, False), repeat=len(pairs)):
        if not any(pattern):
            continue
        weight = sum((w for (w, _), inside in zip(substituted, pattern) if inside),
                     Fraction(0))
        shape = and_all(
            inst if inside else Not(inst)
            for (_, inst), inside in zip(substituted, pattern))
        terms.append(RBin("*", RatConst(weight), Prob(shape)))
    return real_sum(terms)


def pas_preterm_linear(dist, var: str, phi: Formula) -> RealExpr:
    """Equivalent linear form: sum of weight_i * P(phi[var/value_i])."""
    return real_sum(
        RBin("*", RatConst(w), Prob(subst_prog_var(phi, var, IntConst(v))))
        for w, v in dist.pairs)


@dataclass(frozen=True)
class WhileExpansion:
    """Metadata for one loop expansion performed by pt."""

    loop: While
    unroll: int                       # K: termination classes examined
    depth: int                        # D: tail terms kept
    wp_classes: tuple[Formula, ...]   # wp(i) for i = 0..K
    wp_inf: Formula                   # no termination within K bodies
    sum_term: RealExpr
    tail_terms: tuple[RealExpr, ...]  # T_0..T_D
    exhaustive: bool                  # wp_inf unsatisfiable on the window
    window: StateWindow


def pt(c: Command, r: RealExpr, unroll: int = DEFAULT_UNROLL,
       depth: int = DEFAULT_DEPTH, window: Optional[StateWindow] = None,
       qwindow: tuple[int, int] = DEFAULT_QWINDOW,
       ) -> tuple[RealExpr, list[WhileExpansion]]:
    """Weakest preterm of r under c, with one expansion record per loop."""
    if window is None:
        window = default_window(c, real_prog_vars(r))
    expansions: list[WhileExpansion] = []

    def go(c: Command, r: RealExpr) -> RealExpr:
        memo: dict[int, RealExpr] = {}

        def walk(n: RealExpr) -> RealExpr:
            key = id(n)
            got = memo.get(key)
            if got is None:
                if isinstance(n, RBin):
                    got = RBin(n.op, walk(n.left), walk(n.right))
                elif isinstance(n, Prob):
                    got = prob_case(c, n.formula)
                else:
                    got = n  # constants and real variables are untouched
                memo[key] = got
            return got

        return walk(r)

    def prob_case(c: Command, phi: Formula) -> RealExpr:
        if isinstance(c, Skip):
            return Prob(phi)
        if isinstance(c, Assign):
            return Prob(simplify_formula(subst_prog_var(phi, c.var, c.expr)))
        if isinstance(c, RandAssign):
            if len(c.dist.pairs) <= SUBSET_SUM_LIMIT:
                out = pas_preterm_subset_sum(c.dist, c.var, phi)
            else:
                out = pas_preterm_linear(c.dist, c.var, phi)
            return normalize_real(out)
        if isinstance(c, Seq):
            return go(c.first, go(c.second, Prob(phi)))
        if isinstance(c, If):
            return normalize_real(RBin(
                "+",
                cond_term(go(c.then_branch, Prob(phi)), c.guard),
                cond_term(go(c.else_branch, Prob(phi)), Not(c.guard))))
        if isinstance(c, While):
            return while_case(c, phi)
        raise TypeError(f"not a command: {c!r}")

    def while_case(loop: While, phi: Formula) -> RealExpr:
        guard, body = loop.guard, loop.body
        states = window.states()

        def window_sat(f: Formula) -> bool:
            return any(sat_det(f, s, qwindow=qwindow) for s in states)

        # termination classes wp(i), with the exit formulas w_i = wp(body^i,
        # !B) built on demand; once no window store can still be live, later
        # classes are window-empty and the chain stops early
        w = [simplify_formula(Not(guard))]
        classes: list[Formula] = []
        prefix: Formula = TRUE
        exhaustive = False
        for i in range(unroll + 1):
            if i > 0:
                nxt, _tr = wp(body, w[-1], unroll=unroll, window=window,
                              qwindow=qwindow)
                w.append(nxt)
            classes.append(simplify_formula(And(prefix, w[i])))
            prefix = simplify_formula(And(prefix, Not(w[i])))
            if not window_sat(prefix):
                exhaustive = True
                break
        wp_inf = prefix

        # q = pt(guarded^i, P(phi)), advanced only as far as some
        # window-satisfiable class still consumes it
        live = [i for i, cl in enumerate(classes) if window_sat(cl)]
        guarded = If(guard, body, Skip())
        q: RealExpr = Prob(phi)
        pos = 0
        sum_terms: list[RealExpr] = []
        for i in live:
            while pos < i:
                q = normalize_real(go(guarded, q))
                pos += 1
            sum_terms.append(normalize_real(cond_term(q, classes[i])))
        sum_term = normalize_real(real_sum(sum_terms))

        # tail terms carry mass still live after the examined classes; an
        # exhaustive expansion has none on window-supported inputs, and a
        # non-exhaustive chain stops once terms outgrow the node budget
        tails: list[RealExpr] = [sum_term]
        if not exhaustive:
            for _ in range(depth):
                nxt_tail = normalize_real(cond_term(go(body, tails[-1]), wp_inf))
                tails.append(nxt_tail)
                if node_size(nxt_tail) > TAIL_NODE_BUDGET:
                    break

        expansions.append(WhileExpansion(
            loop, len(classes) - 1, len(tails) - 1, tuple(classes), wp_inf,
            sum_term, tuple(tails), exhaustive, window))
        return normalize_real(real_sum(tails))

    return normalize_real(go(c, r)), expansions


def pt_semantic_oracle(c: Command, r: RealExpr, dist: SubDistribution,
                       interp=None, loop_bound: int = DEFAULT_LOOP_BOUND,
                       qwindow: tuple[int, int] = DEFAULT_QWINDOW) -> Fraction:
    """Run C, then evaluate r on the output: the value pt must reproduce."""
    res = execute(c, dist, loop_bound)
    return eval_real(r, res.output, interp or EMPTY_INTERP, qwindow)


def wp_prob(c: Command, f: ProbFormula, unroll: int = DEFAULT_UNROLL,
            depth: int = DEFAULT_DEPTH, window: Optional[StateWindow] = None,
            qwindow: tuple[int, int] = DEFAULT_QWINDOW,
            ) -> tuple[ProbFormula, list[WhileExpansion]]:
    """Weakest precondition of a probabilistic formula: pt applied to every
    real expression, connectives left in place."""
    if window is None:
        window = default_window(c, prob_prog_vars(f))
    expansions: list[WhileExpansion] = []

    def go(n: ProbFormula) -> ProbFormula:
        if isinstance(n, PRel):
            left, ex1 = pt(c, n.left, unroll, depth, window, qwindow)
            right, ex2 = pt(c, n.right, unroll, depth, window, qwindow)
            expansions.extend(ex1)
            expansions.extend(ex2)
            return PRel(n.op, left, right)
        if isinstance(n, PNot):
            return PNot(go(n.body))
        if isinstance(n, PAnd):
            return PAnd(go(n.left), go(n.right))
        if isinstance(n, POr):
            return POr(go(n.left), go(n.right))
        if isinstance(n, PImplies):
            return PImplies(go(n.left), go(n.right))
        raise TypeError(f"not a probabilistic formula: {n!r}")

    return go(f), expansions


def check_triple_prob(pre: ProbFormula, c: Command, post: ProbFormula,
                      family: DistFamily,
                      qwindow: tuple[int, int] = DEFAULT_QWINDOW,
                      loop_bound: int = DEFAULT_LOOP_BOUND,
                      real_grid=None) -> TripleVerdict:
    """Semantic triple check over a distribution family: every member
    satisfying pre must, after running c, satisfy post."""
    grid = REAL_GRID if real_grid is None else real_grid
    lvars = prob_log_vars(pre) | prob_log_vars(post)
    rvars = prob_real_vars(pre) | prob_real_vars(post)
    scope = f"{family.description}, quantifiers over {list(qwindow)}, loop bound {loop_bound}"
    inexact = False
    worst = Fraction(0)
    for interp in interpretations(lvars, qwindow, rvars, grid):
        for label, dist in family:
            if not sat_prob(pre, dist, interp, qwindow):
                continue
            res = execute(c, dist, loop_bound)
            if not res.exact:
                inexact = True
                worst = max(worst, res.residual_mass)
            if not sat_prob(post, res.output, interp, qwindow):
                return TripleVerdict(False, scope, (label, interp), inexact, worst)
    return TripleVerdict(True, scope, None, inexact, worst)
