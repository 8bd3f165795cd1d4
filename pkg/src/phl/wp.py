"""Weakest preconditions for deterministic assertions.

The loop clause builds the approximant chain psi_0 = true,
psi_{i+1} = (B && wp(body, psi_i)) || (!B && post) and stops when two
successive approximants agree on the fixpoint window (both implication
directions checked by enumeration) or when the unroll budget runs out; the
returned formula is the conjunction of the approximants computed so far.
Quantifier-free inputs stay quantifier-free, so every approximant can be
decided exactly on a finite window.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    And, Assign, Command, Formula, If, IntConst, Not, Or, RandAssign, Seq,
    Skip, State, SubDistribution, TRUE, While, and_all, command_prog_vars,
    formula_log_vars, formula_prog_vars, simplify_formula, subst_prog_var,
)
from .semantics import (
    DEFAULT_LOOP_BOUND, DEFAULT_QWINDOW, execute, sat_det, sat_det_dist,
)
from .assertions import StateWindow, interpretations

DEFAULT_UNROLL = 32


@dataclass(frozen=True)
class WpLoopTrace:
    """Approximant chain for one while loop encountered during wp."""

    loop: While
    approximants: tuple[Formula, ...]
    converged: bool
    fixpoint_index: Optional[int]


def window_equivalent(f: Formula, g: Formula, window: StateWindow,
                      qwindow: tuple[int, int] = DEFAULT_QWINDOW) -> bool:
    """Same truth value at every window state under every interpretation."""
    lvars = formula_log_vars(f) | formula_log_vars(g)
    states = window.states()
    for interp in interpretations(lvars, qwindow):
        for s in states:
            if sat_det(f, s, interp, qwindow) != sat_det(g, s, interp, qwindow):
                return False
    return True


def default_window(*pieces, lo: int = -8, hi: int = 8) -> StateWindow:
    names: set[str] = set()
    for piece in pieces:
        if isinstance(piece, Command):
            names |= command_prog_vars(piece)
        elif isinstance(piece, Formula):
            names |= formula_prog_vars(piece)
        else:
            names |= set(piece)
    return StateWindow.make(names, lo, hi)


def wp(c: Command, post: Formula, unroll: int = DEFAULT_UNROLL,
       window: Optional[StateWindow] = None,
       qwindow: tuple[int, int] = DEFAULT_QWINDOW,
       ) -> tuple[Formula, list[WpLoopTrace]]:
    """Weakest precondition with loop traces for every while encountered."""
    if window is None:
        window = default_window(c, post)
    traces: list[WpLoopTrace] = []

    def go(c: Command, post: Formula) -> Formula:
        if isinstance(c, Skip):
            return post
        if isinstance(c, Assign):
            return subst_prog_var(post, c.var, c.expr)
        if isinstance(c, RandAssign):
            return simplify_formula(and_all(
                subst_prog_var(post, c.var, IntConst(v))
                for v in c.dist.values()))
        if isinstance(c, Seq):
            return go(c.first, go(c.second, post))
        if isinstance(c, If):
            return simplify_formula(Or(
                And(c.guard, go(c.then_branch, post)),
                And(Not(c.guard), go(c.else_branch, post))))
        if isinstance(c, While):
            psis = [TRUE]
            converged = False
            fixpoint = None
            for i in range(unroll):
                nxt = simplify_formula(Or(
                    And(c.guard, go(c.body, psis[-1])),
                    And(Not(c.guard), post)))
                psis.append(nxt)
                if window_equivalent(nxt, psis[-2], window, qwindow):
                    converged = True
                    fixpoint = i + 1
                    break
            traces.append(WpLoopTrace(c, tuple(psis), converged, fixpoint))
            return simplify_formula(and_all(psis))
        raise TypeError(f"not a command: {c!r}")

    return go(c, post), traces


def iterate_cmd(c: Command, n: int) -> Command:
    """n-fold sequential composition; zero iterations is skip."""
    if n < 0:
        raise ValueError("negative iteration count")
    if n == 0:
        return Skip()
    out = c
    for _ in range(n - 1):
        out = Seq(c, out)
    return out


@dataclass(frozen=True)
class TripleVerdict:
    holds: bool
    scope: str
    counterexample: Optional[tuple] = None  # (witness, Interpretation)
    inexact: bool = False
    max_residual: Fraction = Fraction(0)

    def __str__(self) -> str:
        if self.holds:
            out = f"holds on {self.scope}"
            if self.inexact:
                out += (f" (loop truncation left residual mass up to "
                        f"{self.max_residual}; verdict is up to that residual)")
            return out
        witness, interp = self.counterexample
        return f"fails on {self.scope}: counterexample {witness} under {interp}"


def check_triple_det(pre: Formula, c: Command, post: Formula,
                     window: Optional[StateWindow] = None,
                     qwindow: tuple[int, int] = DEFAULT_QWINDOW,
                     loop_bound: int = DEFAULT_LOOP_BOUND) -> TripleVerdict:
    """Semantic triple check: run from every window state satisfying pre and
    demand every output support state satisfies post."""
    if window is None:
        window = default_window(pre, c, post)
    lvars = formula_log_vars(pre) | formula_log_vars(post)
    scope = f"{window}, quantifiers over {list(qwindow)}, loop bound {loop_bound}"
    inexact = False
    worst = Fraction(0)
    states = window.states()
    for interp in interpretations(lvars, qwindow):
        for s in states:
            if not sat_det(pre, s, interp, qwindow):
                continue
            res = execute(c, SubDistribution.point(s), loop_bound)
            if not res.exact:
                inexact = True
                worst = max(worst, res.residual_mass)
            if not sat_det_dist(post, res.output, interp, qwindow):
                return TripleVerdict(False, scope, (s, interp), inexact, worst)
    return TripleVerdict(True, scope, None, inexact, worst)
