"""Evaluator and the exact interpreter over sub-distributions."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from phl.core import (
    EMPTY_INTERP, FALSE, TRUE, And, Forall, Implies, Interpretation, IntConst,
    LogVar, Not, Or, ProgVar, Rel, State, SubDistribution, point_dist,
)
from phl.parser import parse_command, parse_det_formula, parse_state
from phl.semantics import (
    DEFAULT_LOOP_BOUND, eval_arith, execute, restrict, sat_det, sat_det_dist,
)

import strategies as sts

HALF = Fraction(1, 2)


def states(mu):
    return {s.as_dict(): None for s, _ in mu.items()}


class TestEvalAndSat:
    def test_eval_arith(self):
        s = parse_state("X=3, Y=-2")
        e = parse_det_formula("X * Y + 1 < 0").left
        assert eval_arith(e, s, EMPTY_INTERP) == -5

    def test_logical_var_needs_interpretation(self):
        s = parse_state("X=0")
        f = Rel("=", LogVar("k"), IntConst(0))
        assert sat_det(f, s, Interpretation({"k": 0}))
        with pytest.raises(KeyError):
            sat_det(f, s, EMPTY_INTERP)

    def test_connectives(self):
        s = parse_state("X=1")
        assert sat_det(parse_det_formula("X = 1 && !(X = 0)"), s, EMPTY_INTERP)
        assert sat_det(parse_det_formula("X = 0 -> X = 5"), s, EMPTY_INTERP)
        assert not sat_det(parse_det_formula("X = 1 -> X = 0"), s, EMPTY_INTERP)

    def test_forall_over_window(self):
        s = parse_state("X=0")
        f = parse_det_formula("forall x. x * X = 0")
        assert sat_det(f, s, EMPTY_INTERP, qwindow=(-3, 3))
        assert not sat_det(f, parse_state("X=1"), EMPTY_INTERP, qwindow=(-3, 3))

    def test_sat_dist_requires_all_support(self):
        mu = (point_dist({"X": 0}).scale(HALF)
              + point_dist({"X": 1}).scale(HALF))
        assert sat_det_dist(parse_det_formula("X >= 0"), mu, EMPTY_INTERP)
        assert not sat_det_dist(parse_det_formula("X = 0"), mu, EMPTY_INTERP)

    def test_sat_dist_vacuous_on_zero(self):
        assert sat_det_dist(FALSE, SubDistribution.zero(), EMPTY_INTERP)


class TestRestrict:
    def test_split(self):
        mu = (point_dist({"X": 0}).scale(HALF)
              + point_dist({"X": 1}).scale(Fraction(1, 4)))
        guard = parse_det_formula("X = 0")
        yes = restrict(mu, guard)
        no = restrict(mu, Not(guard))
        assert yes.mass == HALF and no.mass == Fraction(1, 4)
        assert yes + no == mu


class TestExecute:
    def test_skip(self):
        mu = point_dist({"X": 7})
        r = execute(parse_command("skip"), mu)
        assert r.output == mu and r.exact and r.residual_mass == 0

    def test_assign(self):
        r = execute(parse_command("X := X + 1; Y := X * 2"), point_dist({"X": 1, "Y": 0}))
        assert r.output == point_dist({"X": 2, "Y": 4})

    def test_random_assign(self):
        r = execute(parse_command("X :=$ {1/3:0, 2/3:5}"), point_dist({"X": 9}))
        assert r.output.get(State.make({"X": 0})) == Fraction(1, 3)
        assert r.output.get(State.make({"X": 5})) == Fraction(2, 3)

    def test_if(self):
        c = parse_command("X :=$ {1/2:0, 1/2:1}; if X = 0 then { Y := 10 } else { Y := 20 }")
        r = execute(c, point_dist({"X": 0, "Y": 0}))
        assert r.output.get(State.make({"X": 0, "Y": 10})) == HALF
        assert r.output.get(State.make({"X": 1, "Y": 20})) == HALF

    def test_terminating_loop(self):
        c = parse_command("while X > 0 do { X := X - 1 }")
        r = execute(c, point_dist({"X": 5}))
        assert r.output == point_dist({"X": 0})
        assert r.exact and r.iterations_used == 5

    def test_geometric_loop(self):
        # each round keeps looping with probability 1/2; stopping in round i
        # leaves Y = i, and after the bound a 2^-bound sliver remains live
        c = parse_command(
            "X := 0; Y := 0; while X = 0 do { Y := Y + 1; X :=$ {1/2:0, 1/2:1} }")
        r = execute(c, point_dist({"X": 3, "Y": 3}), loop_bound=20)
        for i in range(1, 21):
            assert r.output.get(State.make({"X": 1, "Y": i})) == HALF ** i
        assert r.residual_mass == HALF ** 20
        assert not r.exact

    def test_diverging_loop(self):
        r = execute(parse_command("while true do { skip }"),
                    point_dist({"X": 0}), loop_bound=50)
        assert r.output == SubDistribution.zero()
        assert r.residual_mass == 1 and not r.exact

    def test_partial_divergence(self):
        c = parse_command("X :=$ {1/2:0, 1/2:1}; while X = 0 do { skip }")
        r = execute(c, point_dist({"X": 5}))
        assert r.output == point_dist({"X": 1}).scale(HALF)
        assert r.residual_mass == HALF

    def test_zero_input(self):
        r = execute(parse_command("while true do { skip }"), SubDistribution.zero())
        assert r.output == SubDistribution.zero() and r.exact

    def test_unbound_variable(self):
        with pytest.raises(KeyError):
            execute(parse_command("X := Y"), point_dist({"X": 0}))


class TestExecuteProperties:
    @given(sts.loopfree_commands(), sts.subdists())
    def test_loopfree_preserves_mass(self, c, mu):
        r = execute(c, mu)
        assert r.exact and r.output.mass == mu.mass

    @given(sts.commands(loops=True), sts.subdists())
    @settings(deadline=None)
    def test_mass_never_grows(self, c, mu):
        r = execute(c, mu, loop_bound=12)
        assert r.output.mass + r.residual_mass == mu.mass

    @given(sts.commands(loops=True), sts.subdists(), sts.subdists())
    @settings(deadline=None)
    def test_linear_in_input(self, c, mu, nu):
        # guard against mass overflow when summing two drawn inputs
        mu = mu.scale(HALF)
        nu = nu.scale(HALF)
        lhs = execute(c, mu + nu, loop_bound=12).output
        rhs = (execute(c, mu, loop_bound=12).output
               + execute(c, nu, loop_bound=12).output)
        assert lhs == rhs

    @given(sts.safe_loops(), sts.states())
    @settings(deadline=None)
    def test_safe_loops_terminate_exactly(self, c, s):
        r = execute(c, point_dist(s.as_dict()))
        assert r.exact and r.residual_mass == 0
