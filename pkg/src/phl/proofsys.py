"""Proof derivation checking for both assertion flavors.

The deterministic system has structural rules SKIP/AS/PAS/SEQ/IF/WHILE plus
CONS/AND/OR; schema matching is syntactic (PAS builds its conjunction
left-folded) and CONS side conditions are discharged by bounded validity.
The probabilistic system has SKIP/SEQ/CONS and takes AS/PAS/IF/WHILE as
axioms of the shape {WP(C, Phi)} C {Phi}: any stated precondition that is
family-equivalent to the computed WP is accepted.  There are no AND/OR rules
on the probabilistic side, and the checker does not invent any.

Derivations serialize as JSON:

    {"rule": "CONS", "conclusion": "{ ... } C { ... }",
     "premises": [ ... ], "side": ["<formula>", ...]}
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    And, Assign, Command, Formula, If, Implies, IntConst, Not, Or, PImplies,
    ProbFormula, RandAssign, Seq, Skip, While, and_all, command_prog_vars,
    formula_prog_vars, prob_prog_vars, subst_prog_var,
)
from .parser import SourceTriple, parse_det_formula, parse_prob_formula, parse_triple
from .semantics import DEFAULT_LOOP_BOUND, DEFAULT_QWINDOW
from .assertions import (
    DistFamily, StateWindow, ValidityVerdict, check_valid_det,
    check_valid_prob, prob_equivalent_on_family,
)
from .wp import DEFAULT_UNROLL, check_triple_det, default_window, wp
from .preterm import DEFAULT_DEPTH, wp_prob

DET_RULES = ("SKIP", "AS", "PAS", "SEQ", "IF", "WHILE", "CONS", "AND", "OR")
PROB_RULES = ("SKIP", "AS", "PAS", "SEQ", "IF", "WHILE", "CONS")


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: SourceTriple
    premises: tuple["Derivation", ...] = ()
    side: tuple[Union[Formula, ProbFormula], ...] = ()


def derivation_from_json(data) -> Derivation:
    if not isinstance(data, dict):
        raise ValueError("derivation node must be a JSON object")
    try:
        rule = str(data["rule"]).upper()
        conclusion = parse_triple(str(data["conclusion"]))
    except KeyError as missing:
        raise ValueError(f"derivation node lacks {missing}") from None
    premises = tuple(derivation_from_json(p) for p in data.get("premises", ()))
    parse_side = parse_prob_formula if conclusion.prob else parse_det_formula
    side = tuple(parse_side(str(s)) for s in data.get("side", ()))
    return Derivation(rule, conclusion, premises, side)


def derivation_to_json(d: Derivation) -> dict:
    out = {"rule": d.rule, "conclusion": str(d.conclusion)}
    if d.premises:
        out["premises"] = [derivation_to_json(p) for p in d.premises]
    if d.side:
        out["side"] = [str(s) for s in d.side]
    return out


def load_derivation(path: str) -> Derivation:
    with open(path, "r", encoding="utf-8") as fh:
        return derivation_from_json(json.load(fh))


@dataclass(frozen=True)
class DerivationVerdict:
    accepted: bool
    scope: str
    failures: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.accepted:
            return f"accepted on {self.scope}"
        return "rejected:\n" + "\n".join(f"  {f}" for f in self.failures)


def _gather_vars(d: Derivation) -> frozenset[str]:
    out = command_prog_vars(d.conclusion.command)
    for side in (d.conclusion.pre, d.conclusion.post):
        out |= (prob_prog_vars(side) if d.conclusion.prob
                else formula_prog_vars(side))
    for p in d.premises:
        out |= _gather_vars(p)
    return out


def check_derivation(d: Derivation, window: Optional[StateWindow] = None,
                     family: Optional[DistFamily] = None,
                     qwindow: tuple[int, int] = DEFAULT_QWINDOW,
                     unroll: int = DEFAULT_UNROLL,
                     depth: int = DEFAULT_DEPTH,
                     seed: int = 0) -> DerivationVerdict:
    """Validate every node's rule schema; discharge side conditions by
    bounded validity (window for deterministic, family for probabilistic)."""
    if window is None:
        window = StateWindow.make(_gather_vars(d))
    if family is None and d.conclusion.prob:
        family = DistFamily.build(window, seed)
    scope = str(family.description if d.conclusion.prob else window)
    failures: list[str] = []

    def visit(node: Derivation, path: str) -> None:
        t = node.conclusion
        if t.prob != d.conclusion.prob:
            failures.append(f"{path}: assertion flavor differs from the root")
            return
        ruleset = PROB_RULES if t.prob else DET_RULES
        if node.rule not in ruleset:
            failures.append(
                f"{path}: rule {node.rule!r} is not in the "
                f"{'probabilistic' if t.prob else 'deterministic'} system")
            return
        reason = (_check_prob_node if t.prob else _check_det_node)(
            node, window, family, qwindow, unroll, depth)
        if reason:
            failures.append(f"{path}: {reason}")
        for i, p in enumerate(node.premises):
            visit(p, f"{path}.premises[{i}]")

    visit(d, "root")
    return DerivationVerdict(not failures, scope, tuple(failures))


def _arity(node: Derivation, n: int) -> Optional[str]:
    if len(node.premises) != n:
        return f"rule {node.rule} expects {n} premises, found {len(node.premises)}"
    return None


def _check_sides(node: Derivation, check) -> Optional[str]:
    """Any author-supplied side formulas must themselves be valid."""
    for s in node.side:
        verdict = check(s)
        if not verdict.valid:
            return f"stated side condition {s} is not valid: {verdict}"
    return None


def _check_det_node(node: Derivation, window: StateWindow, family,
                    qwindow, unroll: int, depth: int) -> Optional[str]:
    t = node.conclusion
    c = t.command
    rule = node.rule

    if rule == "SKIP":
        if not isinstance(c, Skip):
            return "SKIP applies to skip only"
        if t.pre != t.post:
            return "SKIP needs identical pre and post"
        return _arity(node, 0)

    if rule == "AS":
        if not isinstance(c, Assign):
            return "AS applies to assignments only"
        expected = subst_prog_var(t.post, c.var, c.expr)
        if t.pre != expected:
            return f"AS precondition must be {expected}"
        return _arity(node, 0)

    if rule == "PAS":
        if not isinstance(c, RandAssign):
            return "PAS applies to random assignments only"
        expected = and_all(
            subst_prog_var(t.post, c.var, IntConst(v)) for v in c.dist.values())
        if t.pre != expected:
            return f"PAS precondition must be {expected}"
        return _arity(node, 0)

    if rule == "SEQ":
        if not isinstance(c, Seq):
            return "SEQ applies to sequential compositions only"
        bad = _arity(node, 2)
        if bad:
            return bad
        p1, p2 = (p.conclusion for p in node.premises)
        if p1.command != c.first or p2.command != c.second:
            return "SEQ premises must cover the two components in order"
        if p1.pre != t.pre or p2.post != t.post or p1.post != p2.pre:
            return "SEQ assertions must chain (pre, mid, post)"
        return None

    if rule == "IF":
        if not isinstance(c, If):
            return "IF applies to conditionals only"
        bad = _arity(node, 2)
        if bad:
            return bad
        p1, p2 = (p.conclusion for p in node.premises)
        if p1.command != c.then_branch or p2.command != c.else_branch:
            return "IF premises must cover the two branches in order"
        if p1.pre != And(t.pre, c.guard) or p2.pre != And(t.pre, Not(c.guard)):
            return "IF premises must strengthen the precondition by the guard"
        if p1.post != t.post or p2.post != t.post:
            return "IF premises must share the conclusion postcondition"
        return None

    if rule == "WHILE":
        if not isinstance(c, While):
            return "WHILE applies to loops only"
        bad = _arity(node, 1)
        if bad:
            return bad
        p = node.premises[0].conclusion
        inv = t.pre
        if p.command != c.body:
            return "WHILE premise must cover the loop body"
        if p.pre != And(inv, c.guard) or p.post != inv:
            return "WHILE premise must preserve the invariant under the guard"
        if t.post != And(inv, Not(c.guard)):
            return "WHILE postcondition must be invariant && !guard"
        return None

    if rule == "CONS":
        bad = _arity(node, 1)
        if bad:
            return bad
        p = node.premises[0].conclusion
        if p.command != c:
            return "CONS premise must cover the same command"
        bad = _check_sides(node, lambda s: check_valid_det(s, window, qwindow))
        if bad:
            return bad
        forward = check_valid_det(Implies(t.pre, p.pre), window, qwindow)
        if not forward.valid:
            return f"precondition implication fails: {forward}"
        backward = check_valid_det(Implies(p.post, t.post), window, qwindow)
        if not backward.valid:
            return f"postcondition implication fails: {backward}"
        return None

    if rule in ("AND", "OR"):
        bad = _arity(node, 2)
        if bad:
            return bad
        p1, p2 = (p.conclusion for p in node.premises)
        if p1.command != c or p2.command != c:
            return f"{rule} premises must cover the same command"
        ctor = And if rule == "AND" else Or
        if t.pre != ctor(p1.pre, p2.pre) or t.post != ctor(p1.post, p2.post):
            return f"{rule} must combine both premises' assertions"
        return None

    raise AssertionError(f"unhandled rule {rule}")


def _check_prob_node(node: Derivation, window: StateWindow,
                     family: DistFamily, qwindow, unroll: int,
                     depth: int) -> Optional[str]:
    t = node.conclusion
    c = t.command
    rule = node.rule

    if rule == "SKIP":
        if not isinstance(c, Skip):
            return "SKIP applies to skip only"
        if t.pre != t.post:
            return "SKIP needs identical pre and post"
        return _arity(node, 0)

    if rule in ("AS", "PAS", "IF", "WHILE"):
        shapes = {"AS": Assign, "PAS": RandAssign, "IF": If, "WHILE": While}
        if not isinstance(c, shapes[rule]):
            return f"{rule} applies to {shapes[rule].__name__} commands only"
        bad = _arity(node, 0)
        if bad:
            return bad
        computed, _ = wp_prob(c, t.post, unroll, depth, window, qwindow)
        verdict = prob_equivalent_on_family(t.pre, computed, family, qwindow)
        if not verdict.valid:
            return (f"precondition is not family-equivalent to the computed "
                    f"weakest precondition {computed}: {verdict}")
        return None

    if rule == "SEQ":
        if not isinstance(c, Seq):
            return "SEQ applies to sequential compositions only"
        bad = _arity(node, 2)
        if bad:
            return bad
        p1, p2 = (p.conclusion for p in node.premises)
        if p1.command != c.first or p2.command != c.second:
            return "SEQ premises must cover the two components in order"
        if p1.pre != t.pre or p2.post != t.post or p1.post != p2.pre:
            return "SEQ assertions must chain (pre, mid, post)"
        return None

    if rule == "CONS":
        bad = _arity(node, 1)
        if bad:
            return bad
        p = node.premises[0].conclusion
        if p.command != c:
            return "CONS premise must cover the same command"
        bad = _check_sides(node, lambda s: check_valid_prob(s, family, qwindow))
        if bad:
            return bad
        forward = check_valid_prob(PImplies(t.pre, p.pre), family, qwindow)
        if not forward.valid:
            return f"precondition implication fails: {forward}"
        backward = check_valid_prob(PImplies(p.post, t.post), family, qwindow)
        if not backward.valid:
            return f"postcondition implication fails: {backward}"
        return None

    raise AssertionError(f"unhandled rule {rule}")


# ---------------------------------------------------------------------------
# Mechanical derivations for {WP(C, Phi)} C {Phi}


def build_wp_derivation(c: Command, post: ProbFormula,
                        window: Optional[StateWindow] = None,
                        qwindow: tuple[int, int] = DEFAULT_QWINDOW,
                        unroll: int = DEFAULT_UNROLL,
                        depth: int = DEFAULT_DEPTH) -> Derivation:
    """Derivation of {WP(C, post)} C {post} by structural recursion: axiom
    nodes at assignment/conditional/loop heads, SEQ at compositions."""
    if window is None:
        window = default_window(c, prob_prog_vars(post))
    if isinstance(c, Skip):
        return Derivation("SKIP", SourceTriple(post, c, post, True))
    if isinstance(c, Seq):
        mid_deriv = build_wp_derivation(c.second, post, window, qwindow, unroll, depth)
        first_deriv = build_wp_derivation(
            c.first, mid_deriv.conclusion.pre, window, qwindow, unroll, depth)
        conclusion = SourceTriple(first_deriv.conclusion.pre, c, post, True)
        return Derivation("SEQ", conclusion, (first_deriv, mid_deriv))
    rules = {Assign: "AS", RandAssign: "PAS", If: "IF", While: "WHILE"}
    rule = rules.get(type(c))
    if rule is None:
        raise TypeError(f"not a command: {c!r}")
    pre, _ = wp_prob(c, post, unroll, depth, window, qwindow)
    return Derivation(rule, SourceTriple(pre, c, post, True))


def conseq_over(d: Derivation, pre: ProbFormula,
                post: Optional[ProbFormula] = None) -> Derivation:
    """Wrap a derivation in CONS to restate its pre (and optionally post)."""
    t = d.conclusion
    new = SourceTriple(pre, t.command, post if post is not None else t.post, t.prob)
    return Derivation("CONS", new, (d,))


# ---------------------------------------------------------------------------
# Rule soundness: generated valid instances of every deterministic rule must
# yield conclusions the semantic checker accepts.


@dataclass
class SoundnessReport:
    instances: int
    per_rule: dict[str, int]
    failures: tuple[str, ...]
    scope: str

    @property
    def ok(self) -> bool:
        return not self.failures


def rule_soundness_suite(count: int = 300, seed: int = 0,
                         window: Optional[StateWindow] = None,
                         qwindow: tuple[int, int] = (-3, 3),
                         loop_bound: int = DEFAULT_LOOP_BOUND,
                         ) -> SoundnessReport:
    """Generate valid instances across all deterministic rules (premises are
    verified semantically, not assumed) and check every conclusion."""
    from . import gen

    rng = random.Random(seed)
    pv = ("X", "Y")
    if window is None:
        window = StateWindow.make(pv, -2, 2)
    lo = min(a for _, a, _ in window.bounds)
    hi = max(b for _, _, b in window.bounds)
    values = tuple(range(lo, hi + 1))
    per_rule: dict[str, int] = {r: 0 for r in DET_RULES}
    failures: list[str] = []

    def semantic(pre, c, post) -> bool:
        return check_triple_det(pre, c, post, window, qwindow, loop_bound).holds

    def wp_of(c, post):
        return wp(c, post, window=window, qwindow=qwindow)[0]

    def record(rule: str, ok: bool, pre, c, post):
        per_rule[rule] += 1
        if not ok:
            failures.append(f"{rule}: {{ {pre} }} {c} {{ {post} }}")

    made = 0
    rules = list(DET_RULES)
    while made < count:
        rule = rules[made % len(rules)]
        if rule == "SKIP":
            phi = gen.gen_formula(rng, pv, 2)
            record(rule, semantic(phi, Skip(), phi), phi, Skip(), phi)
        elif rule == "AS":
            post = gen.gen_formula(rng, pv, 2, lv=("k",) if rng.random() < 0.3 else ())
            var = rng.choice(pv)
            expr = gen.gen_aexp(rng, pv, 2)
            pre = subst_prog_var(post, var, expr)
            c = Assign(var, expr)
            record(rule, semantic(pre, c, post), pre, c, post)
        elif rule == "PAS":
            post = gen.gen_formula(rng, pv, 2)
            var = rng.choice(pv)
            dist = gen.gen_dist_spec(rng, values)
            pre = and_all(subst_prog_var(post, var, IntConst(v))
                          for v in dist.values())
            c = RandAssign(var, dist)
            record(rule, semantic(pre, c, post), pre, c, post)
        elif rule == "SEQ":
            c1 = gen.gen_loopfree(rng, pv, 2, values)
            c2 = gen.gen_loopfree(rng, pv, 2, values)
            post = gen.gen_formula(rng, pv, 2)
            mid = wp_of(c2, post)
            pre = wp_of(c1, mid)
            ok = (semantic(pre, c1, mid) and semantic(mid, c2, post)
                  and semantic(pre, Seq(c1, c2), post))
            record(rule, ok, pre, Seq(c1, c2), post)
        elif rule == "IF":
            guard = gen.gen_guard(rng, pv)
            c1 = gen.gen_loopfree(rng, pv, 2, values)
            c2 = gen.gen_loopfree(rng, pv, 2, values)
            post = gen.gen_formula(rng, pv, 2)
            c = If(guard, c1, c2)
            pre = wp_of(c, post)
            ok = (semantic(And(pre, guard), c1, post)
                  and semantic(And(pre, Not(guard)), c2, post)
                  and semantic(pre, c, post))
            record(rule, ok, pre, c, post)
        elif rule == "WHILE":
            loop = gen.gen_safe_loop(rng, pv, lo, hi)
            inv = None
            for _ in range(4):
                cand = gen.gen_formula(rng, pv, 1)
                if semantic(And(cand, loop.guard), loop.body, cand):
                    inv = cand
                    break
            if inv is None:
                inv = and_all(())  # true preserves itself
            ok = semantic(inv, loop, And(inv, Not(loop.guard)))
            record(rule, ok, inv, loop, And(inv, Not(loop.guard)))
        elif rule == "CONS":
            c = gen.gen_loopfree(rng, pv, 2, values)
            post = gen.gen_formula(rng, pv, 2)
            pre = wp_of(c, post)
            stronger = And(pre, gen.gen_formula(rng, pv, 1))
            weaker = Or(post, gen.gen_formula(rng, pv, 1))
            ok = (check_valid_det(Implies(stronger, pre), window, qwindow).valid
                  and check_valid_det(Implies(post, weaker), window, qwindow).valid
                  and semantic(pre, c, post)
                  and semantic(stronger, c, weaker))
            record(rule, ok, stronger, c, weaker)
        else:  # AND / OR
            c = gen.gen_loopfree(rng, pv, 2, values)
            post1 = gen.gen_formula(rng, pv, 2)
            post2 = gen.gen_formula(rng, pv, 2)
            pre1, pre2 = wp_of(c, post1), wp_of(c, post2)
            ctor = And if rule == "AND" else Or
            ok = (semantic(pre1, c, post1) and semantic(pre2, c, post2)
                  and semantic(ctor(pre1, pre2), c, ctor(post1, post2)))
            record(rule, ok, ctor(pre1, pre2), c, ctor(post1, post2))
        made += 1

    scope = f"{window}, quantifiers over {list(qwindow)}, seed {seed}"
    return SoundnessReport(made, per_rule, tuple(failures), scope)
