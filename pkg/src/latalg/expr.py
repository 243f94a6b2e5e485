"""Expression language for lattice-algebra terms over the reals.

A term is built from six core node kinds: the constant ``0``, variables,
real scaling, addition, join (pointwise maximum) and a product.  Meet,
positive part, negative part, absolute value and arithmetic negation are
accepted as sugar and removed by :func:`desugar`.  Terms are immutable and
hashable, so they may be shared freely across threads; every operation in
this module is pure.

Concrete syntax (see :func:`parse`)::

    expr  := add (("\\/" | "/\\") add)*        lattice ops bind loosest
    add   := mul (("+" | "-") mul)*
    mul   := unary ("*" unary)*                product binds tightest
    unary := "-" unary | atom
    atom  := number "*" unary | number | ident
           | "(" expr ")" | ("pos" | "neg" | "abs") "(" expr ")"

A numeric literal followed by ``*`` denotes scaling, while ``expr * expr``
is the algebra product; the leading numeric token disambiguates.  The
signature has no constants other than 0, so a bare numeric literal is only
legal when it spells zero (``0``, ``0.0``, ...).
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "Expr", "Zero", "Var", "Scale", "Add", "Join", "Mul",
    "Meet", "Pos", "NegPart", "Abs", "Neg",
    "Assignment", "ParseError", "MissingVariableError",
    "parse", "print_expr", "desugar", "complexity", "variables",
    "eval_real", "eval_pointwise", "substitute", "contains_product",
    "random_expr", "cosh_sinh_witness",
]

#: An assignment maps variable names to values (reals here; model elements
#: in the model modules).  Any mapping works.
Assignment = Mapping[str, float]

_RESERVED = frozenset({"pos", "neg", "abs"})


class ExprError(ValueError):
    """Base class for errors raised by this module."""


class ParseError(ExprError):
    """Syntax error, carrying the offending position in the input text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class MissingVariableError(ExprError):
    """An assignment does not cover a free variable."""


class Expr:
    """Base class of all term nodes.  Instances are immutable."""

    __slots__ = ()


@dataclass(frozen=True)
class Zero(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if not self.name.isidentifier() or not self.name.isascii():
            raise ExprError(f"variable name must be an ASCII identifier: {self.name!r}")
        if self.name in _RESERVED:
            raise ExprError(f"{self.name!r} is a reserved word")


@dataclass(frozen=True)
class Scale(Expr):
    coeff: float
    child: Expr

    def __post_init__(self):
        if not math.isfinite(self.coeff):
            raise ExprError(f"scaling coefficient must be finite, got {self.coeff!r}")


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Join(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


# Sugar kinds, eliminated by desugar().

@dataclass(frozen=True)
class Meet(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pos(Expr):
    child: Expr


@dataclass(frozen=True)
class NegPart(Expr):
    child: Expr


@dataclass(frozen=True)
class Abs(Expr):
    child: Expr


@dataclass(frozen=True)
class Neg(Expr):
    child: Expr


_CORE_KINDS = (Zero, Var, Scale, Add, Join, Mul)


def desugar(e: Expr) -> Expr:
    """Rewrite ``e`` using only the six core kinds, preserving semantics.

    Meet becomes ``-((-a) \\/ (-b))``, ``pos(a)`` becomes ``a \\/ 0``,
    ``neg(a)`` becomes ``(-a) \\/ 0`` and ``abs(a)`` becomes ``a \\/ (-a)``.
    Arithmetic negation folds into an immediate scaling node, so printed
    negative coefficients round-trip structurally.
    """
    if isinstance(e, (Zero, Var)):
        return e
    if isinstance(e, Scale):
        return Scale(e.coeff, desugar(e.child))
    if isinstance(e, Add):
        return Add(desugar(e.left), desugar(e.right))
    if isinstance(e, Join):
        return Join(desugar(e.left), desugar(e.right))
    if isinstance(e, Mul):
        return Mul(desugar(e.left), desugar(e.right))
    if isinstance(e, Neg):
        return _negate(desugar(e.child))
    if isinstance(e, Meet):
        return _negate(Join(_negate(desugar(e.left)), _negate(desugar(e.right))))
    if isinstance(e, Pos):
        return Join(desugar(e.child), Zero())
    if isinstance(e, NegPart):
        return Join(_negate(desugar(e.child)), Zero())
    if isinstance(e, Abs):
        d = desugar(e.child)
        return Join(d, _negate(d))
    raise TypeError(f"not an expression node: {e!r}")


def _negate(e: Expr) -> Expr:
    if isinstance(e, Scale):
        return Scale(-e.coeff, e.child)
    return Scale(-1.0, e)


def complexity(e: Expr) -> int:
    """1 for leaves (0 and variables); otherwise one more than the deepest child."""
    if isinstance(e, (Zero, Var)):
        return 1
    if isinstance(e, (Scale, Pos, NegPart, Abs, Neg)):
        return 1 + complexity(e.child)
    return 1 + max(complexity(e.left), complexity(e.right))


def variables(e: Expr) -> tuple[str, ...]:
    """Free variables of ``e``, sorted lexicographically."""
    out: set[str] = set()
    _collect_vars(e, out)
    return tuple(sorted(out))


def _collect_vars(e: Expr, out: set) -> None:
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, (Scale, Pos, NegPart, Abs, Neg)):
        _collect_vars(e.child, out)
    elif not isinstance(e, Zero):
        _collect_vars(e.left, out)
        _collect_vars(e.right, out)


def substitute(e: Expr, replacements: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (simultaneously)."""
    if isinstance(e, Var):
        return replacements.get(e.name, e)
    if isinstance(e, Zero):
        return e
    if isinstance(e, Scale):
        return Scale(e.coeff, substitute(e.child, replacements))
    if isinstance(e, (Pos, NegPart, Abs, Neg)):
        return type(e)(substitute(e.child, replacements))
    return type(e)(substitute(e.left, replacements), substitute(e.right, replacements))


def contains_product(e: Expr) -> bool:
    if isinstance(e, Mul):
        return True
    if isinstance(e, (Zero, Var)):
        return False
    if isinstance(e, (Scale, Pos, NegPart, Abs, Neg)):
        return contains_product(e.child)
    return contains_product(e.left) or contains_product(e.right)


# ---------------------------------------------------------------------------
# Evaluation

def eval_real(e: Expr, assignment: Assignment) -> float:
    """Evaluate ``e`` over the reals (join = max).

    Raises :class:`MissingVariableError` if a free variable is not covered.
    """
    if isinstance(e, Zero):
        return 0.0
    if isinstance(e, Var):
        try:
            return float(assignment[e.name])
        except KeyError:
            raise MissingVariableError(f"no value for variable {e.name!r}") from None
    if isinstance(e, Scale):
        return e.coeff * eval_real(e.child, assignment)
    if isinstance(e, Add):
        return eval_real(e.left, assignment) + eval_real(e.right, assignment)
    if isinstance(e, Join):
        return max(eval_real(e.left, assignment), eval_real(e.right, assignment))
    if isinstance(e, Mul):
        return eval_real(e.left, assignment) * eval_real(e.right, assignment)
    if isinstance(e, Meet):
        return min(eval_real(e.left, assignment), eval_real(e.right, assignment))
    if isinstance(e, Pos):
        return max(eval_real(e.child, assignment), 0.0)
    if isinstance(e, NegPart):
        return max(-eval_real(e.child, assignment), 0.0)
    if isinstance(e, Abs):
        return abs(eval_real(e.child, assignment))
    if isinstance(e, Neg):
        return -eval_real(e.child, assignment)
    raise TypeError(f"not an expression node: {e!r}")


def eval_pointwise(e: Expr, env: Mapping[str, "np.ndarray | float"]):
    """Vectorized real evaluation: variables may be bound to numpy arrays.

    All arrays must broadcast against each other; the product is the plain
    pointwise product.  Returns an array (or a scalar if every binding is
    scalar).
    """
    if isinstance(e, Zero):
        return 0.0
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise MissingVariableError(f"no value for variable {e.name!r}") from None
    if isinstance(e, Scale):
        return e.coeff * eval_pointwise(e.child, env)
    if isinstance(e, Add):
        return eval_pointwise(e.left, env) + eval_pointwise(e.right, env)
    if isinstance(e, Join):
        return np.maximum(eval_pointwise(e.left, env), eval_pointwise(e.right, env))
    if isinstance(e, Mul):
        return eval_pointwise(e.left, env) * eval_pointwise(e.right, env)
    if isinstance(e, Meet):
        return np.minimum(eval_pointwise(e.left, env), eval_pointwise(e.right, env))
    if isinstance(e, Pos):
        return np.maximum(eval_pointwise(e.child, env), 0.0)
    if isinstance(e, NegPart):
        return np.maximum(-eval_pointwise(e.child, env), 0.0)
    if isinstance(e, Abs):
        return np.abs(eval_pointwise(e.child, env))
    if isinstance(e, Neg):
        return -eval_pointwise(e.child, env)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>\\/|/\\|[-+*()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unknown token {text[i]!r}", i)
        kind = m.lastgroup
        tokens.append((kind, m.group(), i))
        i = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, text, pos = self.next()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}, found {text or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        e = self.parse_lat()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {text!r}", pos)
        return e

    def parse_lat(self) -> Expr:
        left = self.parse_add()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "\\/":
                self.next()
                left = Join(left, self.parse_add())
            elif kind == "op" and text == "/\\":
                self.next()
                left = Meet(left, self.parse_add())
            else:
                return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "+":
                self.next()
                left = Add(left, self.parse_mul())
            elif kind == "op" and text == "-":
                self.next()
                left = Add(left, Neg(self.parse_mul()))
            else:
                return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text == "*":
                self.next()
                left = Mul(left, self.parse_unary())
            else:
                return left

    def parse_unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            return Neg(self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        kind, text, pos = self.next()
        if kind == "num":
            value = float(text)
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "*":
                self.next()
                return Scale(value, self.parse_unary())
            if value == 0.0:
                return Zero()
            raise ParseError(
                f"bare constant {text!r} is not a term (only 0; write c*term for scaling)", pos
            )
        if kind == "ident":
            if text in _RESERVED:
                self.expect_op("(")
                inner = self.parse_lat()
                self.expect_op(")")
                return {"pos": Pos, "neg": NegPart, "abs": Abs}[text](inner)
            return Var(text)
        if kind == "op" and text == "(":
            inner = self.parse_lat()
            self.expect_op(")")
            return inner
        raise ParseError(f"unexpected {text or 'end of input'!r}", pos)


def parse(text: str) -> Expr:
    """Parse ``text`` into a desugared expression."""
    return desugar(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Printing

# Binding levels, loosest to tightest.  A node is parenthesized when printed
# in a context demanding a tighter level than its own.
_LAT, _ADD, _MUL, _UNARY, _ATOM = range(5)


def print_expr(e: Expr) -> str:
    """Render ``e`` so that ``parse(print_expr(e)) == desugar(e)`` structurally."""
    return _print(desugar(e), _LAT)


def _print(e: Expr, need: int) -> str:
    if isinstance(e, Zero):
        return "0"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Join):
        s = f"{_print(e.left, _LAT)} \\/ {_print(e.right, _ADD)}"
        level = _LAT
    elif isinstance(e, Add):
        s = f"{_print(e.left, _ADD)} + {_print(e.right, _MUL)}"
        level = _ADD
    elif isinstance(e, Mul):
        # A bare "0" factor would re-parse as a scaling coefficient.
        left = "(0)" if isinstance(e.left, Zero) else _print(e.left, _MUL)
        right = "(0)" if isinstance(e.right, Zero) else _print(e.right, _UNARY)
        s = f"{left} * {right}"
        level = _MUL
    elif isinstance(e, Scale):
        c = e.coeff
        sign = "-" if (c < 0 or (c == 0 and math.copysign(1.0, c) < 0)) else ""
        # Parenthesized zero: a trailing bare "0" would bind to a following "*".
        child = "(0)" if isinstance(e.child, Zero) else _print(e.child, _UNARY)
        s = f"{sign}{abs(c)!r}*{child}"
        level = _UNARY
    else:
        raise TypeError(f"print_expr expects a core node, got {e!r}")
    if level < need:
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# Seeded random expressions

#: Node-kind distribution of :func:`random_expr` above the leaf level.
_NODE_KINDS = (("add", 0.28), ("join", 0.28), ("mul", 0.22), ("scale", 0.22))
_LEAF_VAR_P = 0.85


def random_expr(
    rng: random.Random,
    var_names: tuple[str, ...] = ("x", "y", "z"),
    max_complexity: int = 8,
    allow_product: bool = True,
) -> Expr:
    """Seeded random core expression with complexity at most ``max_complexity``.

    Distribution: a leaf is a variable with probability 0.85 and 0 otherwise;
    internal nodes are add/join/mul/scale with weights .28/.28/.22/.22 (mul
    weight redistributed to scale when products are disabled).  Scaling
    coefficients are uniform in [-2, 2].
    """
    if max_complexity <= 1:
        if rng.random() < _LEAF_VAR_P:
            return Var(rng.choice(var_names))
        return Zero()
    kinds, weights = zip(*_NODE_KINDS)
    if not allow_product:
        weights = (0.28, 0.28, 0.0, 0.44)
    kind = rng.choices(kinds, weights=weights, k=1)[0]
    if kind == "scale":
        return Scale(rng.uniform(-2.0, 2.0),
                     random_expr(rng, var_names, max_complexity - 1, allow_product))
    left = random_expr(rng, var_names, rng.randint(1, max_complexity - 1), allow_product)
    right = random_expr(rng, var_names, rng.randint(1, max_complexity - 1), allow_product)
    if kind == "add":
        return Add(left, right)
    if kind == "join":
        return Join(left, right)
    return Mul(left, right)


# ---------------------------------------------------------------------------
# A curated witness

def cosh_sinh_witness(k: int, var: str = "x", unit_var: str = "one") -> Expr:
    """Truncated ``t*cosh(t)**2 - t*sinh(t)**2`` with the unit as a variable.

    Both summands are products, so the term evaluates to exactly zero under
    any zero product, while with ``unit_var`` bound to 1 its real value is
    within the series remainder of ``t`` on [-1, 1].  The signature has no
    constant 1, hence the extra variable.
    """
    if k < 1:
        raise ExprError("k must be >= 1")
    t = Var(var)
    one = Var(unit_var)

    def power(base: Expr, exponent: int) -> Expr:
        acc = base
        for _ in range(exponent - 1):
            acc = Mul(acc, base)
        return acc

    cosh_terms: Expr = one
    for j in range(1, k + 1):
        cosh_terms = Add(cosh_terms, Scale(1.0 / math.factorial(2 * j), power(t, 2 * j)))
    sinh_terms: Expr = t
    for j in range(1, k + 1):
        sinh_terms = Add(sinh_terms, Scale(1.0 / math.factorial(2 * j + 1), power(t, 2 * j + 1)))
    return Add(
        Mul(t, Mul(cosh_terms, cosh_terms)),
        Scale(-1.0, Mul(t, Mul(sinh_terms, sinh_terms))),
    )
