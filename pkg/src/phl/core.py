"""Core value and syntax types for a probabilistic imperative language.

Programs act on integer stores; running a program turns a sub-distribution
over stores into another one.  Total mass may drop below 1: the missing mass
is the probability of non-termination.  Every weight is an exact
`fractions.Fraction`; floats never appear.

Naming conventions shared with the concrete syntax: program variables start
with an uppercase letter (leading underscores are reserved for generated
names), logical variables are lowercase, and real-valued assertion variables
carry an `@` prefix.  The identifier `P` is reserved for the probability
operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

AOPS = ("+", "-", "*")
ROPS = ("<", "<=", "=", ">=", ">")

_ROP_FUN = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}

_AOP_FUN = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


def parse_fraction(text: str) -> Fraction:
    """Parse 'n' or 'n/d' into an exact Fraction; decimals are rejected."""
    s = text.strip()
    if not s:
        raise ValueError("empty fraction literal")
    if any(c in s for c in ".eE"):
        raise ValueError(f"not an exact fraction (decimals are rejected): {text!r}")
    if "/" in s:
        num, _, den = s.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(s))


def format_fraction(q: Fraction) -> str:
    """Render a Fraction as 'n/d' (or a bare integer), never a decimal."""
    return str(q)


# ---------------------------------------------------------------------------
# Arithmetic expressions


class ArithExpr:
    """Integer-valued expression over program and logical variables."""

    __slots__ = ()

    def __str__(self) -> str:
        return arith_to_source(self)


@dataclass(frozen=True)
class IntConst(ArithExpr):
    value: int


@dataclass(frozen=True)
class ProgVar(ArithExpr):
    name: str


@dataclass(frozen=True)
class LogVar(ArithExpr):
    name: str


@dataclass(frozen=True)
class ABin(ArithExpr):
    op: str
    left: ArithExpr
    right: ArithExpr

    def __post_init__(self):
        if self.op not in AOPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")


# ---------------------------------------------------------------------------
# Deterministic formulas (guards are the quantifier- and logical-var-free
# subset)


class Formula:
    """First-order assertion over integer expressions."""

    __slots__ = ()

    def __str__(self) -> str:
        return formula_to_source(self)


@dataclass(frozen=True)
class BoolLit(Formula):
    value: bool


@dataclass(frozen=True)
class Rel(Formula):
    op: str
    left: ArithExpr
    right: ArithExpr

    def __post_init__(self):
        if self.op not in ROPS:
            raise ValueError(f"unknown relation {self.op!r}")


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = BoolLit(True)
FALSE = BoolLit(False)


def and_all(formulas: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; TRUE for the empty list."""
    acc: Optional[Formula] = None
    for f in formulas:
        acc = f if acc is None else And(acc, f)
    return TRUE if acc is None else acc


def or_all(formulas: Iterable[Formula]) -> Formula:
    acc: Optional[Formula] = None
    for f in formulas:
        acc = f if acc is None else Or(acc, f)
    return FALSE if acc is None else acc


# ---------------------------------------------------------------------------
# Commands


class Command:
    __slots__ = ()

    def __str__(self) -> str:
        return command_to_source(self)


@dataclass(frozen=True)
class DistSpec:
    """Finite rational distribution literal: weights in (0,1] summing to 1."""

    pairs: tuple[tuple[Fraction, int], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("empty distribution literal")
        total = Fraction(0)
        seen = set()
        for weight, value in self.pairs:
            if not isinstance(weight, Fraction):
                raise ValueError("distribution weights must be exact fractions")
            if not (0 < weight <= 1):
                raise ValueError(f"weight {weight} outside (0, 1]")
            if value in seen:
                raise ValueError(f"duplicate value {value} in distribution")
            seen.add(value)
            total += weight
        if total != 1:
            raise ValueError(f"distribution weights sum to {total}, expected 1")

    @staticmethod
    def make(pairs: Iterable[tuple[Fraction, int]]) -> "DistSpec":
        """Build a DistSpec, merging duplicate values and dropping zero weights."""
        merged: dict[int, Fraction] = {}
        order: list[int] = []
        for weight, value in pairs:
            if value not in merged:
                merged[value] = Fraction(0)
                order.append(value)
            merged[value] += weight
        kept = tuple(
            (merged[v], v) for v in order if merged[v] != 0
        )
        return DistSpec(kept)

    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.pairs)


@dataclass(frozen=True)
class Skip(Command):
    pass


@dataclass(frozen=True)
class Assign(Command):
    var: str
    expr: ArithExpr

    def __post_init__(self):
        bad = arith_log_vars(self.expr)
        if bad:
            raise ValueError(
                f"assignment right-hand side uses logical variables {sorted(bad)}"
            )


@dataclass(frozen=True)
class RandAssign(Command):
    var: str
    dist: DistSpec


@dataclass(frozen=True)
class Seq(Command):
    first: Command
    second: Command


def _check_guard(guard: Formula) -> None:
    if formula_log_vars(guard) or _has_quantifier(guard):
        raise ValueError(f"guard must be quantifier- and logical-var-free: {guard}")


@dataclass(frozen=True)
class If(Command):
    guard: Formula
    then_branch: Command
    else_branch: Command

    def __post_init__(self):
        _check_guard(self.guard)


@dataclass(frozen=True)
class While(Command):
    guard: Formula
    body: Command

    def __post_init__(self):
        _check_guard(self.guard)


def seq_all(commands: Iterable[Command]) -> Command:
    acc: Optional[Command] = None
    for c in commands:
        acc = c if acc is None else Seq(acc, c)
    return Skip() if acc is None else acc


# ---------------------------------------------------------------------------
# Real-valued assertion expressions and probabilistic formulas


class RealExpr:
    """Rational-valued expression; P(phi) reads off probability mass."""

    __slots__ = ()

    def __str__(self) -> str:
        return real_to_source(self)


@dataclass(frozen=True)
class RatConst(RealExpr):
    value: Fraction


@dataclass(frozen=True)
class RealVar(RealExpr):
    name: str


@dataclass(frozen=True)
class Prob(RealExpr):
    formula: Formula


@dataclass(frozen=True)
class RBin(RealExpr):
    op: str
    left: RealExpr
    right: RealExpr

    def __post_init__(self):
        if self.op not in AOPS:
            raise ValueError(f"unknown arithmetic operator {self.op!r}")


class ProbFormula:
    __slots__ = ()

    def __str__(self) -> str:
        return prob_to_source(self)


@dataclass(frozen=True)
class PRel(ProbFormula):
    op: str
    left: RealExpr
    right: RealExpr

    def __post_init__(self):
        if self.op not in ROPS:
            raise ValueError(f"unknown relation {self.op!r}")


@dataclass(frozen=True)
class PNot(ProbFormula):
    body: ProbFormula


@dataclass(frozen=True)
class PAnd(ProbFormula):
    left: ProbFormula
    right: ProbFormula


@dataclass(frozen=True)
class POr(ProbFormula):
    left: ProbFormula
    right: ProbFormula


@dataclass(frozen=True)
class PImplies(ProbFormula):
    left: ProbFormula
    right: ProbFormula


# `true`/`false` written in probabilistic assertion position
PTRUE = PRel("=", RatConst(Fraction(0)), RatConst(Fraction(0)))
PFALSE = PRel("<", RatConst(Fraction(0)), RatConst(Fraction(0)))


# ---------------------------------------------------------------------------
# Stores, sub-distributions, interpretations


@dataclass(frozen=True, order=True)
class State:
    """Immutable integer store, kept sorted by variable name."""

    items: tuple[tuple[str, int], ...]

    @staticmethod
    def make(mapping: Mapping[str, int]) -> "State":
        return State(tuple(sorted((str(k), int(v)) for k, v in mapping.items())))

    def __getitem__(self, name: str) -> int:
        for k, v in self.items:
            if k == name:
                return v
        raise UnboundVariable(name)

    def __contains__(self, name: str) -> bool:
        return any(k == name for k, _ in self.items)

    def set(self, name: str, value: int) -> "State":
        out = [(k, v) for k, v in self.items if k != name]
        out.append((name, int(value)))
        return State(tuple(sorted(out)))

    def vars(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.items)

    def as_dict(self) -> dict[str, int]:
        return dict(self.items)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k}={v}" for k, v in self.items) + "}"


class UnboundVariable(KeyError):
    """A variable was read without a value in scope."""

    def __str__(self) -> str:
        return f"unbound variable {self.args[0]}" if self.args else "unbound variable"


class SubDistribution:
    """Finite-support sub-distribution over states (total mass <= 1).

    Zero-weight entries are dropped on construction, so equality is plain
    support-and-weight equality.
    """

    __slots__ = ("_probs",)

    def __init__(self, entries: Mapping[State, Fraction] | Iterable[tuple[State, Fraction]] = ()):
        probs: dict[State, Fraction] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for state, p in items:
            if not isinstance(p, Fraction):
                p = Fraction(p)
            if p < 0:
                raise ValueError(f"negative probability {p} at {state}")
            if p == 0:
                continue
            probs[state] = probs.get(state, Fraction(0)) + p
        total = sum(probs.values(), Fraction(0))
        if total > 1:
            raise ValueError(f"total mass {total} exceeds 1")
        self._probs = probs

    @staticmethod
    def point(state: State) -> "SubDistribution":
        return SubDistribution({state: Fraction(1)})

    @staticmethod
    def zero() -> "SubDistribution":
        return SubDistribution()

    @property
    def mass(self) -> Fraction:
        return sum(self._probs.values(), Fraction(0))

    def support(self) -> frozenset[State]:
        return frozenset(self._probs)

    def get(self, state: State) -> Fraction:
        return self._probs.get(state, Fraction(0))

    def items(self) -> Iterator[tuple[State, Fraction]]:
        return iter(self._probs.items())

    def scale(self, factor: Fraction) -> "SubDistribution":
        if factor < 0:
            raise ValueError("negative scale factor")
        return SubDistribution({s: p * factor for s, p in self._probs.items()})

    def __add__(self, other: "SubDistribution") -> "SubDistribution":
        out = dict(self._probs)
        for s, p in other._probs.items():
            out[s] = out.get(s, Fraction(0)) + p
        return SubDistribution(out)

    def project(self, names: Iterable[str]) -> "SubDistribution":
        """Marginalize onto the given variables."""
        keep = set(names)
        out: dict[State, Fraction] = {}
        for s, p in self._probs.items():
            t = State.make({k: v for k, v in s.items if k in keep})
            out[t] = out.get(t, Fraction(0)) + p
        return SubDistribution(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubDistribution):
            return NotImplemented
        return self._probs == other._probs

    def __hash__(self):
        return hash(frozenset(self._probs.items()))

    def __len__(self) -> int:
        return len(self._probs)

    def __bool__(self) -> bool:
        return bool(self._probs)

    def __repr__(self) -> str:
        body = " + ".join(
            f"{p}*{s}" for s, p in sorted(self._probs.items())
        )
        return body or "0"


def point_dist(state: State | Mapping[str, int]) -> SubDistribution:
    if not isinstance(state, State):
        state = State.make(state)
    return SubDistribution.point(state)


class Interpretation:
    """Values for free logical variables (ints) and real variables (rationals)."""

    __slots__ = ("_log", "_real")

    def __init__(self, log: Mapping[str, int] | None = None,
                 real: Mapping[str, Fraction] | None = None):
        self._log = dict(log or {})
        self._real = dict(real or {})

    @property
    def log(self) -> Mapping[str, int]:
        return self._log

    @property
    def real(self) -> Mapping[str, Fraction]:
        return self._real

    def log_value(self, name: str) -> int:
        try:
            return self._log[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def real_value(self, name: str) -> Fraction:
        try:
            return self._real[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def with_log(self, name: str, value: int) -> "Interpretation":
        out = dict(self._log)
        out[name] = value
        return Interpretation(out, self._real)

    def __repr__(self) -> str:
        parts = [f"{k}={v}" for k, v in sorted(self._log.items())]
        parts += [f"@{k}={v}" for k, v in sorted(self._real.items())]
        return "[" + ", ".join(parts) + "]"


EMPTY_INTERP = Interpretation()


# ---------------------------------------------------------------------------
# Variable collection.  Formula objects are shared aggressively (the loop
# transformers build DAGs whose tree size is exponential), so every traversal
# memoizes on object identity.


def _collect(root, step: Callable) -> frozenset[str]:
    memo: dict[int, frozenset[str]] = {}

    def go(node) -> frozenset[str]:
        key = id(node)
        got = memo.get(key)
        if got is None:
            got = step(node, go)
            memo[key] = got
        return got

    return go(root)


def arith_prog_vars(e: ArithExpr) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, ProgVar):
            return frozenset((n.name,))
        if isinstance(n, ABin):
            return go(n.left) | go(n.right)
        return frozenset()
    return _collect(e, step)


def arith_log_vars(e: ArithExpr) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, LogVar):
            return frozenset((n.name,))
        if isinstance(n, ABin):
            return go(n.left) | go(n.right)
        return frozenset()
    return _collect(e, step)


def formula_prog_vars(f: Formula) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, Rel):
            return arith_prog_vars(n.left) | arith_prog_vars(n.right)
        if isinstance(n, Not):
            return go(n.body)
        if isinstance(n, (And, Or, Implies)):
            return go(n.left) | go(n.right)
        if isinstance(n, Forall):
            return go(n.body)
        return frozenset()
    return _collect(f, step)


def formula_log_vars(f: Formula) -> frozenset[str]:
    """Free logical variables; Forall binds its variable."""
    def step(n, go):
        if isinstance(n, Rel):
            return arith_log_vars(n.left) | arith_log_vars(n.right)
        if isinstance(n, Not):
            return go(n.body)
        if isinstance(n, (And, Or, Implies)):
            return go(n.left) | go(n.right)
        if isinstance(n, Forall):
            return go(n.body) - {n.var}
        return frozenset()
    return _collect(f, step)


def _has_quantifier(f: Formula) -> bool:
    def step(n, go):
        if isinstance(n, Forall):
            return frozenset(("*",))
        if isinstance(n, Not):
            return go(n.body)
        if isinstance(n, (And, Or, Implies)):
            return go(n.left) | go(n.right)
        return frozenset()
    return bool(_collect(f, step))


def command_prog_vars(c: Command) -> frozenset[str]:
    if isinstance(c, Skip):
        return frozenset()
    if isinstance(c, Assign):
        return frozenset((c.var,)) | arith_prog_vars(c.expr)
    if isinstance(c, RandAssign):
        return frozenset((c.var,))
    if isinstance(c, Seq):
        return command_prog_vars(c.first) | command_prog_vars(c.second)
    if isinstance(c, If):
        return (formula_prog_vars(c.guard)
                | command_prog_vars(c.then_branch)
                | command_prog_vars(c.else_branch))
    if isinstance(c, While):
        return formula_prog_vars(c.guard) | command_prog_vars(c.body)
    raise TypeError(f"not a command: {c!r}")


def real_prog_vars(r: RealExpr) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, Prob):
            return formula_prog_vars(n.formula)
        if isinstance(n, RBin):
            return go(n.left) | go(n.right)
        return frozenset()
    return _collect(r, step)


def real_log_vars(r: RealExpr) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, Prob):
            return formula_log_vars(n.formula)
        if isinstance(n, RBin):
            return go(n.left) | go(n.right)
        return frozenset()
    return _collect(r, step)


def real_real_vars(r: RealExpr) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, RealVar):
            return frozenset((n.name,))
        if isinstance(n, RBin):
            return go(n.left) | go(n.right)
        return frozenset()
    return _collect(r, step)


def prob_prog_vars(f: ProbFormula) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, PRel):
            return real_prog_vars(n.left) | real_prog_vars(n.right)
        if isinstance(n, PNot):
            return go(n.body)
        return go(n.left) | go(n.right)
    return _collect(f, step)


def prob_log_vars(f: ProbFormula) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, PRel):
            return real_log_vars(n.left) | real_log_vars(n.right)
        if isinstance(n, PNot):
            return go(n.body)
        return go(n.left) | go(n.right)
    return _collect(f, step)


def prob_real_vars(f: ProbFormula) -> frozenset[str]:
    def step(n, go):
        if isinstance(n, PRel):
            return real_real_vars(n.left) | real_real_vars(n.right)
        if isinstance(n, PNot):
            return go(n.body)
        return go(n.left) | go(n.right)
    return _collect(f, step)


# ---------------------------------------------------------------------------
# Substitution of program variables (identity subtrees are returned as-is to
# preserve sharing)


def subst_arith(e: ArithExpr, name: str, repl: ArithExpr) -> ArithExpr:
    memo: dict[int, ArithExpr] = {}

    def go(n: ArithExpr) -> ArithExpr:
        key = id(n)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(n, ProgVar) and n.name == name:
            out = repl
        elif isinstance(n, ABin):
            left, right = go(n.left), go(n.right)
            out = n if left is n.left and right is n.right else ABin(n.op, left, right)
        else:
            out = n
        memo[key] = out
        return out

    return go(e)


def subst_prog_var(f: Formula, name: str, repl: ArithExpr) -> Formula:
    """phi[name/repl]: replace a program variable in a formula.

    Quantifiers bind logical variables only, so no capture is possible.
    """
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        key = id(n)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(n, Rel):
            left = subst_arith(n.left, name, repl)
            right = subst_arith(n.right, name, repl)
            out = n if left is n.left and right is n.right else Rel(n.op, left, right)
        elif isinstance(n, Not):
            body = go(n.body)
            out = n if body is n.body else Not(body)
        elif isinstance(n, (And, Or, Implies)):
            left, right = go(n.left), go(n.right)
            if left is n.left and right is n.right:
                out = n
            else:
                out = type(n)(left, right)
        elif isinstance(n, Forall):
            body = go(n.body)
            out = n if body is n.body else Forall(n.var, body)
        else:
            out = n
        memo[key] = out
        return out

    return go(f)


def subst_real(r: RealExpr, name: str, repl: ArithExpr) -> RealExpr:
    memo: dict[int, RealExpr] = {}

    def go(n: RealExpr) -> RealExpr:
        key = id(n)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(n, Prob):
            body = subst_prog_var(n.formula, name, repl)
            out = n if body is n.formula else Prob(body)
        elif isinstance(n, RBin):
            left, right = go(n.left), go(n.right)
            out = n if left is n.left and right is n.right else RBin(n.op, left, right)
        else:
            out = n
        memo[key] = out
        return out

    return go(r)


# ---------------------------------------------------------------------------
# Simplification.  A terminating bottom-up rewrite: constant folding, boolean
# absorption, double negation, idempotence.  Structural equality is only
# attempted on small nodes (DAG-shared operands can be huge as trees).

_EQ_SIZE_LIMIT = 64


def node_size(node) -> int:
    """Number of AST nodes counted with sharing (DAG size)."""
    seen: set[int] = set()
    count = 0
    stack = [node]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        count += 1
        for attr in ("left", "right", "body", "formula", "expr"):
            child = getattr(n, attr, None)
            if child is not None and not isinstance(child, (str, int, bool, Fraction)):
                stack.append(child)
    return count


def _eq_small(a, b) -> bool:
    if a is b:
        return True
    if node_size(a) > _EQ_SIZE_LIMIT or node_size(b) > _EQ_SIZE_LIMIT:
        return False
    return a == b


def _complementary(a: Formula, b: Formula) -> bool:
    """One operand is the negation of the other (small nodes only)."""
    if isinstance(a, Not) and _eq_small(a.body, b):
        return True
    return isinstance(b, Not) and _eq_small(a, b.body)


def simplify_formula(f: Formula) -> Formula:
    memo: dict[int, Formula] = {}

    def go(n: Formula) -> Formula:
        key = id(n)
        got = memo.get(key)
        if got is not None:
            return got
        out = _simp_step(n, go)
        memo[key] = out
        return out

    def _simp_step(n: Formula, go) -> Formula:
        if isinstance(n, Rel):
            if isinstance(n.left, IntConst) and isinstance(n.right, IntConst):
                return BoolLit(_ROP_FUN[n.op](n.left.value, n.right.value))
            return n
        if isinstance(n, Not):
            body = go(n.body)
            if isinstance(body, BoolLit):
                return BoolLit(not body.value)
            if isinstance(body, Not):
                return body.body
            return n if body is n.body else Not(body)
        if isinstance(n, And):
            left, right = go(n.left), go(n.right)
            if isinstance(left, BoolLit):
                return right if left.value else FALSE
            if isinstance(right, BoolLit):
                return left if right.value else FALSE
            if _eq_small(left, right):
                return left
            if _complementary(left, right):
                return FALSE
            return n if left is n.left and right is n.right else And(left, right)
        if isinstance(n, Or):
            left, right = go(n.left), go(n.right)
            if isinstance(left, BoolLit):
                return TRUE if left.value else right
            if isinstance(right, BoolLit):
                return TRUE if right.value else left
            if _eq_small(left, right):
                return left
            if _complementary(left, right):
                return TRUE
            return n if left is n.left and right is n.right else Or(left, right)
        if isinstance(n, Implies):
            left, right = go(n.left), go(n.right)
            if isinstance(left, BoolLit):
                return right if left.value else TRUE
            if isinstance(right, BoolLit) and right.value:
                return TRUE
            if _eq_small(left, right):
                return TRUE
            return n if left is n.left and right is n.right else Implies(left, right)
        if isinstance(n, Forall):
            body = go(n.body)
            if isinstance(body, BoolLit):
                return body
            if n.var not in formula_log_vars(body):
                return body
            return n if body is n.body else Forall(n.var, body)
        return n

    return go(f)


def normalize_real(r: RealExpr) -> RealExpr:
    """Constant folding plus dropping of zero summands and unit factors."""
    memo: dict[int, RealExpr] = {}
    zero = Fraction(0)
    one = Fraction(1)

    def go(n: RealExpr) -> RealExpr:
        key = id(n)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(n, Prob):
            body = simplify_formula(n.formula)
            if isinstance(body, BoolLit) and not body.value:
                out: RealExpr = RatConst(zero)
            else:
                out = n if body is n.formula else Prob(body)
        elif isinstance(n, RBin):
            left, right = go(n.left), go(n.right)
            lc = left.value if isinstance(left, RatConst) else None
            rc = right.value if isinstance(right, RatConst) else None
            if lc is not None and rc is not None:
                out = RatConst(_AOP_FUN[n.op](lc, rc))
            elif n.op == "+" and lc == zero:
                out = right
            elif n.op in ("+", "-") and rc == zero:
                out = left
            elif n.op == "*" and (lc == zero or rc == zero):
                out = RatConst(zero)
            elif n.op == "*" and lc == one:
                out = right
            elif n.op == "*" and rc == one:
                out = left
            elif left is n.left and right is n.right:
                out = n
            else:
                out = RBin(n.op, left, right)
        else:
            out = n
        memo[key] = out
        return out

    return go(r)


def real_sum(terms: Iterable[RealExpr]) -> RealExpr:
    acc: Optional[RealExpr] = None
    for t in terms:
        acc = t if acc is None else RBin("+", acc, t)
    return RatConst(Fraction(0)) if acc is None else acc


# ---------------------------------------------------------------------------
# Concrete syntax output.  Printers parenthesize by the same precedence table
# the parser uses, so parse(to_source(ast)) returns an equal AST.

_APREC = {"+": 1, "-": 1, "*": 2}


def arith_to_source(e: ArithExpr, prec: int = 0) -> str:
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, ProgVar):
        return e.name
    if isinstance(e, LogVar):
        return e.name
    if isinstance(e, ABin):
        p = _APREC[e.op]
        s = f"{arith_to_source(e.left, p)} {e.op} {arith_to_source(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"not an arithmetic expression: {e!r}")


# precedence levels: -> 1 (right assoc), || 2, && 3, ! 4, atoms 5
def formula_to_source(f: Formula, prec: int = 0) -> str:
    if isinstance(f, BoolLit):
        return "true" if f.value else "false"
    if isinstance(f, Rel):
        s = f"{arith_to_source(f.left)} {f.op} {arith_to_source(f.right)}"
        return f"({s})" if prec >= 4 else s
    if isinstance(f, Not):
        return f"!{formula_to_source(f.body, 4)}"
    if isinstance(f, And):
        s = f"{formula_to_source(f.left, 3)} && {formula_to_source(f.right, 4)}"
        return f"({s})" if prec > 3 else s
    if isinstance(f, Or):
        s = f"{formula_to_source(f.left, 2)} || {formula_to_source(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, Implies):
        s = f"{formula_to_source(f.left, 2)} -> {formula_to_source(f.right, 1)}"
        return f"({s})" if prec > 1 else s
    if isinstance(f, Forall):
        s = f"forall {f.var}. {formula_to_source(f.body, 0)}"
        return f"({s})" if prec > 0 else s
    raise TypeError(f"not a formula: {f!r}")


def command_to_source(c: Command, prec: int = 0) -> str:
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Assign):
        return f"{c.var} := {arith_to_source(c.expr)}"
    if isinstance(c, RandAssign):
        body = ", ".join(f"{format_fraction(w)}:{v}" for w, v in c.dist.pairs)
        return f"{c.var} :=$ {{{body}}}"
    if isinstance(c, Seq):
        s = f"{command_to_source(c.first, 1)}; {command_to_source(c.second, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(c, If):
        return (f"if {formula_to_source(c.guard)} "
                f"then {{ {command_to_source(c.then_branch)} }} "
                f"else {{ {command_to_source(c.else_branch)} }}")
    if isinstance(c, While):
        return (f"while {formula_to_source(c.guard)} "
                f"do {{ {command_to_source(c.body)} }}")
    raise TypeError(f"not a command: {c!r}")


def real_to_source(r: RealExpr, prec: int = 0) -> str:
    if isinstance(r, RatConst):
        return format_fraction(r.value)
    if isinstance(r, RealVar):
        return f"@{r.name}"
    if isinstance(r, Prob):
        return f"P({formula_to_source(r.formula)})"
    if isinstance(r, RBin):
        p = _APREC[r.op]
        s = f"{real_to_source(r.left, p)} {r.op} {real_to_source(r.right, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"not a real expression: {r!r}")


def prob_to_source(f: ProbFormula, prec: int = 0) -> str:
    if isinstance(f, PRel):
        s = f"{real_to_source(f.left)} {f.op} {real_to_source(f.right)}"
        return f"({s})" if prec >= 4 else s
    if isinstance(f, PNot):
        return f"!{prob_to_source(f.body, 4)}"
    if isinstance(f, PAnd):
        s = f"{prob_to_source(f.left, 3)} && {prob_to_source(f.right, 4)}"
        return f"({s})" if prec > 3 else s
    if isinstance(f, POr):
        s = f"{prob_to_source(f.left, 2)} || {prob_to_source(f.right, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(f, PImplies):
        s = f"{prob_to_source(f.left, 2)} -> {prob_to_source(f.right, 1)}"
        return f"({s})" if prec > 1 else s
    raise TypeError(f"not a probabilistic formula: {f!r}")
