"""Weakest preterms, conditional terms, and probabilistic triple checking."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from phl.core import (
    EMPTY_INTERP, Not, PRel, Prob, RatConst, Rel, SubDistribution, point_dist,
    prob_to_source, real_to_source,
)
from phl.assertions import (
    DistFamily, StateWindow, eval_real, real_equivalent_on_family, sat_prob,
)
from phl.parser import (
    parse_command, parse_det_formula, parse_prob_formula, parse_real_expr,
    parse_triple,
)
from phl.semantics import execute, restrict
from phl.preterm import (
    check_triple_prob, cond_term, pas_preterm_linear, pas_preterm_subset_sum,
    pt, pt_semantic_oracle, wp_prob,
)

import strategies as sts

HALF = Fraction(1, 2)
DIVERGE = "while true do { skip }"
CSTAR = ("X :=$ {1/3:0, 2/3:1}; "
         "if X = 0 then { while true do { skip } } else { skip }")


def family(names=("X",), lo=-2, hi=2, seed=0, mixtures=12):
    return DistFamily.build(StateWindow.make(names, lo, hi), seed=seed,
                            mixtures=mixtures)


class TestCondTerm:
    def test_prob_atom_conjoins(self):
        r = cond_term(parse_real_expr("P(X = 0)"), parse_det_formula("Y > 0"))
        assert real_to_source(r) == "P(X = 0 && (Y > 0))"

    def test_constants_unchanged(self):
        b = parse_det_formula("X = 0")
        assert cond_term(parse_real_expr("1/2"), b) == RatConst(HALF)
        assert cond_term(parse_real_expr("@eps"), b) == parse_real_expr("@eps")

    def test_distributes_over_operators(self):
        r = cond_term(parse_real_expr("P(X = 0) + 2 * P(Y = 0)"),
                      parse_det_formula("X > 0"))
        assert real_to_source(r) == \
            "P(X = 0 && (X > 0)) + 2 * P(Y = 0 && (X > 0))"

    @given(sts.real_exprs(), sts.guards(), sts.subdists())
    def test_restriction_lemma(self, r, b, mu):
        lhs = eval_real(cond_term(r, b), mu, sts.RINTERP)
        rhs = eval_real(r, restrict(mu, b), sts.RINTERP)
        assert lhs == rhs


class TestPasForms:
    def test_subset_sum_shape(self):
        c = parse_command("X :=$ {1/3:0, 2/3:1}")
        r = pas_preterm_subset_sum(c.dist, "X", parse_det_formula("X = 0"))
        # three nonempty subsets of a two-value support, full subset first
        assert real_to_source(r) == ("1 * P(0 = 0 && (1 = 0)) + "
                                     "1/3 * P(0 = 0 && !(1 = 0)) + "
                                     "2/3 * P(!(0 = 0) && (1 = 0))")

    def test_linear_shape(self):
        c = parse_command("X :=$ {1/3:0, 2/3:1}")
        r = pas_preterm_linear(c.dist, "X", parse_det_formula("X = 0"))
        assert real_to_source(r) == "1/3 * P(0 = 0) + 2/3 * P(1 = 0)"

    def test_subset_sum_refuses_wide_support(self):
        pairs = ", ".join(f"1/16:{k}" for k in range(16))
        c = parse_command("X :=$ {%s}" % pairs)
        with pytest.raises(ValueError, match="limit"):
            pas_preterm_subset_sum(c.dist, "X", parse_det_formula("X = 0"))

    @given(sts.dist_specs(), sts.det_formulas(), sts.subdists())
    @settings(max_examples=60)
    def test_forms_agree(self, dist, phi, mu):
        a = pas_preterm_subset_sum(dist, "X", phi)
        b = pas_preterm_linear(dist, "X", phi)
        assert eval_real(a, mu, EMPTY_INTERP) == eval_real(b, mu, EMPTY_INTERP)


class TestPtExamples:
    def test_diverging_loop(self):
        r, (ex,) = pt(parse_command(DIVERGE), parse_real_expr("P(true)"))
        assert eval_real(r, point_dist({"X": 0}), EMPTY_INTERP) == 0
        assert not ex.exhaustive
        # no run terminates, so every termination class is empty
        assert ex.sum_term == RatConst(Fraction(0))

    def test_choice_then_conditional_divergence(self):
        r, _ = pt(parse_command(CSTAR), parse_real_expr("P(true)"))
        for _, mu in family():
            got = eval_real(r, mu, EMPTY_INTERP)
            assert got == Fraction(2, 3) * mu.mass

    def test_assign(self):
        r, _ = pt(parse_command("X := X + 1"), parse_real_expr("P(X = 2)"))
        assert real_to_source(r) == "P(X + 1 = 2)"

    def test_if_conditions_both_arms(self):
        r, _ = pt(parse_command("if X = 0 then { X := 1 } else { skip }"),
                  parse_real_expr("P(X = 1)"))
        assert eval_real(r, point_dist({"X": 0}), EMPTY_INTERP) == 1
        mu = point_dist({"X": 0}).scale(HALF) + point_dist({"X": 5}).scale(HALF)
        assert eval_real(r, mu, EMPTY_INTERP) == HALF

    def test_terminating_loop_exhaustive_on_window(self):
        c = parse_command("while X > 0 do { X := X - 1 }")
        r, (ex,) = pt(c, parse_real_expr("P(X = 0)"),
                      window=StateWindow.make(("X",), -2, 2))
        assert ex.exhaustive
        mu = point_dist({"X": 2}).scale(HALF) + point_dist({"X": -1}).scale(HALF)
        assert eval_real(r, mu, EMPTY_INTERP) == HALF

    def test_mixed_mass_through_partial_divergence(self):
        # mass on X=0 diverges, mass elsewhere passes through: the preterm
        # must weight states independently, not multiply scalar factors
        c = parse_command("while X = 0 do { skip }")
        r, _ = pt(c, parse_real_expr("P(true)"))
        mu = point_dist({"X": 0}).scale(HALF) + point_dist({"X": 5}).scale(Fraction(1, 4))
        assert eval_real(r, mu, EMPTY_INTERP) == Fraction(1, 4)

    def test_loop_with_escape_matches_oracle_per_member(self):
        c = parse_command("while X = 0 do { X := 1 }")
        r, _ = pt(c, parse_real_expr("P(true)"))
        for _, mu in family():
            assert eval_real(r, mu, EMPTY_INTERP) \
                == pt_semantic_oracle(c, parse_real_expr("P(true)"), mu, EMPTY_INTERP)


class TestCharacterization:
    @given(sts.loopfree_commands(), sts.real_exprs(), sts.subdists())
    @settings(deadline=None, max_examples=60)
    def test_loopfree(self, c, r, mu):
        term, _ = pt(c, r, window=sts.WINDOW, qwindow=sts.QWINDOW)
        got = eval_real(term, mu, sts.RINTERP, sts.QWINDOW)
        want = pt_semantic_oracle(c, r, mu, sts.RINTERP, qwindow=sts.QWINDOW)
        assert got == want

    @given(sts.safe_loops(), sts.real_exprs(), sts.subdists())
    @settings(deadline=None, max_examples=40)
    def test_safe_loops(self, c, r, mu):
        term, expansions = pt(c, r, window=sts.WINDOW, qwindow=sts.QWINDOW)
        assert all(ex.exhaustive for ex in expansions)
        got = eval_real(term, mu, sts.RINTERP, sts.QWINDOW)
        want = pt_semantic_oracle(c, r, mu, sts.RINTERP, qwindow=sts.QWINDOW)
        assert got == want


class TestWpProb:
    def test_applies_to_both_sides(self):
        f, _ = wp_prob(parse_command("X := X + 1"),
                       parse_prob_formula("P(X = 2) <= 1/2"))
        assert prob_to_source(f) == "P(X + 1 = 2) <= 1/2"

    def test_distributes_over_connectives(self):
        # the substituted atoms fold: 0 = 0 to true, and P(0 = 1) to the
        # constant 0, whose relation to 0 becomes the trivial 0 = 0
        f, _ = wp_prob(parse_command("X := 0"),
                       parse_prob_formula("P(X = 0) = 1 -> P(X = 1) = 0"))
        assert prob_to_source(f) == "P(true) = 1 -> 0 = 0"

    @given(sts.loopfree_commands(), sts.real_exprs(), sts.real_exprs(),
           sts.subdists())
    @settings(deadline=None, max_examples=40)
    def test_satisfaction_transfers(self, c, a, b, mu):
        phi = PRel("<=", a, b)
        f, _ = wp_prob(c, phi, window=sts.WINDOW, qwindow=sts.QWINDOW)
        pre = sat_prob(f, mu, sts.RINTERP, sts.QWINDOW)
        post = sat_prob(phi, execute(c, mu).output, sts.RINTERP, sts.QWINDOW)
        assert pre == post


class TestCheckTripleProb:
    def test_paper_triples(self):
        t1 = parse_triple("{ true } %s { P(true) = 0 }" % DIVERGE)
        v1 = check_triple_prob(t1.pre, t1.command, t1.post, family())
        assert v1.holds and v1.inexact
        t2 = parse_triple("{ true } %s { P(true) <= 2/3 }" % CSTAR)
        v2 = check_triple_prob(t2.pre, t2.command, t2.post, family())
        assert v2.holds and v2.inexact

    def test_rejects_false_triple(self):
        t = parse_triple("{ true } X :=$ {1/2:0, 1/2:1} { P(X = 0) = 1 }")
        v = check_triple_prob(t.pre, t.command, t.post, family())
        assert not v.holds and v.counterexample is not None

    def test_exact_when_no_truncation(self):
        t = parse_triple("{ P(X = 0) = 1 } X := X + 1 { P(X = 1) = 1 }")
        v = check_triple_prob(t.pre, t.command, t.post, family())
        assert v.holds and not v.inexact and v.max_residual == 0

    def test_precondition_filters_members(self):
        t = parse_triple("{ P(true) = 1 } skip { P(true) = 1 }")
        # zero and half-mass members fail the precondition and are skipped
        assert check_triple_prob(t.pre, t.command, t.post, family()).holds
