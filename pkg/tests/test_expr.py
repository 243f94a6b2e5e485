import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latalg.expr import (
    Abs, Add, Join, Meet, MissingVariableError, Mul, Neg, NegPart, ParseError,
    Pos, Scale, Var, Zero, complexity, contains_product, desugar, eval_real,
    parse, print_expr, random_expr, substitute, variables,
)


def test_parse_join_zero():
    assert parse("x \\/ 0") == Join(Var("x"), Zero())


def test_parse_desugars_witness():
    expected = Join(
        Add(
            Mul(Join(Var("x"), Zero()), Join(Var("x"), Zero())),
            Scale(-1.0, Join(Var("x"), Zero())),
        ),
        Zero(),
    )
    assert parse("pos(pos(x)*pos(x) - pos(x))") == expected


def test_parse_leading_number_is_scale():
    assert parse("2*(x + y)") == Scale(2.0, Add(Var("x"), Var("y")))


def test_parse_expr_times_expr_is_product():
    assert parse("x*y") == Mul(Var("x"), Var("y"))


def test_parse_meet_abs_neg():
    assert parse("x /\\ y") == desugar(Meet(Var("x"), Var("y")))
    assert parse("abs(x)") == Join(Var("x"), Scale(-1.0, Var("x")))
    assert parse("neg(x)") == Join(Scale(-1.0, Var("x")), Zero())


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as err:
        parse("x + ")
    assert err.value.position == 4
    with pytest.raises(ParseError):
        parse("x ? y")
    with pytest.raises(ParseError):
        parse("(x + y")


def test_bare_nonzero_constant_rejected():
    assert parse("0") == Zero()
    assert parse("0.0") == Zero()
    assert parse("0e3") == Zero()
    with pytest.raises(ParseError):
        parse("2")
    with pytest.raises(ParseError):
        parse("x + 1")


def test_print_examples():
    assert print_expr(Join(Var("x"), Zero())) == "x \\/ 0"
    assert print_expr(Zero()) == "0"
    assert print_expr(Scale(-1.0, Var("x"))) == "-1.0*x"


def test_print_scale_parenthesizes_loose_children():
    e = Scale(2.0, Add(Var("x"), Var("y")))
    assert parse(print_expr(e)) == e
    e2 = Scale(2.0, Mul(Var("x"), Var("y")))
    assert parse(print_expr(e2)) == e2


def test_complexity_examples():
    assert complexity(Var("x")) == 1
    assert complexity(Zero()) == 1
    assert complexity(Join(Var("x"), Zero())) == 2
    assert complexity(Mul(Join(Var("x"), Zero()), Var("y"))) == 3


def test_complexity_exceeds_children():
    rng = random.Random(7)
    for _ in range(50):
        e = random_expr(rng, ("x", "y"), 9)
        if isinstance(e, (Zero, Var)):
            continue
        kids = [e.child] if hasattr(e, "child") else [e.left, e.right]
        assert all(complexity(k) < complexity(e) for k in kids)


def test_eval_examples():
    assert eval_real(parse("x \\/ 0"), {"x": -2.0}) == 0.0
    wit = parse("pos(pos(x)*pos(x) - pos(x))")
    assert eval_real(wit, {"x": 2.0}) == 2.0
    assert eval_real(wit, {"x": 0.5}) == 0.0


def test_eval_missing_variable():
    with pytest.raises(MissingVariableError):
        eval_real(Var("x"), {})


def test_desugar_examples():
    x, y = Var("x"), Var("y")
    assert desugar(Meet(x, y)) == Scale(-1.0, Join(Scale(-1.0, x), Scale(-1.0, y)))
    assert desugar(Abs(x)) == Join(x, Scale(-1.0, x))
    assert desugar(Pos(x)) == Join(x, Zero())
    assert desugar(NegPart(x)) == Join(Scale(-1.0, x), Zero())
    assert desugar(Neg(Scale(2.0, x))) == Scale(-2.0, x)


def test_round_trip_1000_random_expressions():
    rng = random.Random(20240)
    for _ in range(1000):
        e = random_expr(rng, ("x", "y", "z"), 12)
        assert parse(print_expr(e)) == desugar(e)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**9), x=st.floats(-5, 5), y=st.floats(-5, 5))
def test_desugar_preserves_semantics(seed, x, y):
    e = random_expr(random.Random(seed), ("x", "y"), 7)
    a = {"x": x, "y": y}
    assert eval_real(e, a) == eval_real(desugar(e), a)


def _eval_fraction(e, a):
    if isinstance(e, Zero):
        return Fraction(0)
    if isinstance(e, Var):
        return a[e.name]
    if isinstance(e, Scale):
        return Fraction(e.coeff) * _eval_fraction(e.child, a)
    if isinstance(e, Add):
        return _eval_fraction(e.left, a) + _eval_fraction(e.right, a)
    if isinstance(e, Join):
        return max(_eval_fraction(e.left, a), _eval_fraction(e.right, a))
    raise AssertionError("product-free terms only")


def test_dyadic_exactness_product_free():
    # Scaling by dyadics, addition and max are exact in binary floating point,
    # so float evaluation must coincide with exact rational evaluation.
    rng = random.Random(99)

    def dyadic():
        return rng.randrange(-64, 65) / 2 ** rng.randrange(0, 5)

    for _ in range(200):
        e = random_expr(rng, ("x", "y"), 8, allow_product=False)
        e = _dyadicize(e, rng)
        a = {"x": dyadic(), "y": dyadic()}
        exact = _eval_fraction(desugar(e), {k: Fraction(v) for k, v in a.items()})
        assert eval_real(e, a) == float(exact)


def _dyadicize(e, rng):
    if isinstance(e, Scale):
        return Scale(rng.randrange(-8, 9) / 4.0, _dyadicize(e.child, rng))
    if isinstance(e, (Zero, Var)):
        return e
    return type(e)(_dyadicize(e.left, rng), _dyadicize(e.right, rng))


def test_complexity_monotone_under_substitution():
    rng = random.Random(5)
    for _ in range(50):
        e = random_expr(rng, ("x", "y"), 6)
        deeper = random_expr(rng, ("x",), rng.randint(2, 6))
        assert complexity(substitute(e, {"x": deeper})) >= complexity(e)


def test_variables_sorted_and_contains_product():
    e = parse("b*a + c")
    assert variables(e) == ("a", "b", "c")
    assert contains_product(e)
    assert not contains_product(parse("a + b \\/ c"))


def test_scale_requires_finite_coefficient():
    with pytest.raises(ValueError):
        Scale(math.inf, Var("x"))
    with pytest.raises(ValueError):
        Scale(math.nan, Var("x"))


def test_reserved_words_need_parentheses():
    with pytest.raises(ParseError):
        parse("pos + x")
    with pytest.raises(ValueError):
        Var("abs")


def test_print_accepts_sugar():
    e = Abs(Var("x"))
    assert parse(print_expr(e)) == desugar(e)
    assert print_expr(Pos(Var("x"))) == "x \\/ 0"
