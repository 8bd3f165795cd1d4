"""Exact verification toolkit for a probabilistic imperative language.

The pieces: an exact interpreter over finite sub-distributions
(`semantics.execute`), weakest preconditions for deterministic assertions
(`wp.wp`), weakest preterms and preconditions for probabilistic assertions
(`preterm.pt`, `preterm.wp_prob`), bounded validity and triple checking over
finite test domains (`assertions`, `wp.check_triple_det`,
`preterm.check_triple_prob`), and a proof derivation checker
(`proofsys.check_derivation`).  All arithmetic is exact rational.
"""

from .core import (
    ABin, And, Assign, BoolLit, Command, DistSpec, FALSE, Forall, Formula,
    If, Implies, IntConst, Interpretation, LogVar, Not, Or, PAnd, PFALSE,
    PImplies, PNot, POr, PRel, PTRUE, Prob, ProbFormula, ProgVar, RandAssign,
    RatConst, RealExpr, RealVar, RBin, Rel, Seq, Skip, State, SubDistribution,
    TRUE, UnboundVariable, While, point_dist, simplify_formula,
    normalize_real, subst_prog_var,
)
from .parser import (
    FlavorMixError, ParseError, ParserWarning, SourceTriple, parse_command,
    parse_det_formula, parse_prob_formula, parse_real_expr, parse_state,
    parse_triple,
)
from .semantics import ExecResult, eval_arith, execute, restrict, sat_det, sat_det_dist
from .assertions import (
    DistFamily, StateWindow, ValidityVerdict, check_valid_det,
    check_valid_prob, eval_real, prob_equivalent_on_family,
    real_equivalent_on_family, sat_prob,
)
from .wp import TripleVerdict, WpLoopTrace, check_triple_det, iterate_cmd, wp
from .preterm import (
    WhileExpansion, check_triple_prob, cond_term, pt, pt_semantic_oracle,
    wp_prob,
)
from .proofsys import (
    Derivation, DerivationVerdict, SoundnessReport, build_wp_derivation,
    check_derivation, conseq_over, derivation_from_json, derivation_to_json,
    rule_soundness_suite,
)

__version__ = "0.1.0"
