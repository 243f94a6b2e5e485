import random

import numpy as np
import pytest

from latalg.expr import (
    Add, Join, Mul, Scale, Var, Zero, cosh_sinh_witness, eval_real, parse,
    random_expr, variables,
)
from latalg.rewrite import (
    NormalForm, NormalFormBudgetError, Polynomial, check_normal_form,
    normal_form, normal_form_to_expr, polynomial_majorant, product_kill,
    zero_simplify,
)


def test_product_kill_examples():
    x, y = Var("x"), Var("y")
    assert product_kill(Mul(x, y)) == Zero()
    assert product_kill(Add(Mul(x, y), Join(x, y))) == Add(Zero(), Join(x, y))
    killed = product_kill(cosh_sinh_witness(4))
    assert killed == Add(Zero(), Scale(-1.0, Zero()))
    assert eval_real(killed, {}) == 0.0


def test_product_kill_positive_homogeneity():
    # Killed terms are positively homogeneous; powers of two make it exact.
    rng = random.Random(11)
    for _ in range(100):
        e = product_kill(random_expr(rng, ("x", "y"), 9))
        a = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2)}
        for t in (0.5, 2.0, 8.0, 0.0):
            scaled = {k: t * v for k, v in a.items()}
            assert eval_real(e, scaled) == t * eval_real(e, a)


def test_zero_simplify_rules():
    x = Var("x")
    assert zero_simplify(Add(Zero(), x)) == x
    assert zero_simplify(Add(x, Zero())) == x
    assert zero_simplify(Scale(1.0, x)) == x
    assert zero_simplify(Scale(-3.0, Zero())) == Zero()
    assert zero_simplify(Join(Zero(), Zero())) == Zero()
    # join with zero is not collapsed: that is a lattice fact, not a neutral one
    assert zero_simplify(Join(x, Zero())) == Join(x, Zero())


def test_normal_form_var():
    nf = normal_form(Var("x"))
    assert nf.pos == (Polynomial.symbol("x+"),)
    assert nf.neg == (Polynomial.symbol("x-"),)


def test_normal_form_product_expansion():
    nf = normal_form(Mul(Var("x"), Var("y")))
    assert nf.pos == (Polynomial({("x+", "y+"): 1.0, ("x-", "y-"): 1.0}),)
    assert nf.neg == (Polynomial({("x+", "y-"): 1.0, ("x-", "y+"): 1.0}),)
    check_normal_form(Mul(Var("x"), Var("y")), nf, points=100, seed=1)


def test_normal_form_join_with_zero():
    e = parse("x \\/ 0")
    nf = normal_form(e)
    assert len(nf.pos) >= 1 and len(nf.neg) >= 1
    check_normal_form(e, nf, points=100, seed=2)


def test_normal_form_random_agreement():
    rng = random.Random(42)
    built = 0
    for i in range(60):
        e = random_expr(rng, ("x", "y"), 8)
        try:
            nf = normal_form(e)
        except NormalFormBudgetError:
            continue
        built += 1
        check_normal_form(e, nf, points=100, seed=i, rel_tol=1e-6)
    assert built >= 50


def test_normal_form_budget_aborts():
    # Repeated squaring of sums blows up; a small budget must abort cleanly.
    e = Var("x")
    for _ in range(6):
        e = Mul(Add(e, Var("y")), Add(e, Var("z")))
    with pytest.raises(NormalFormBudgetError):
        normal_form(e, budget=500)


def test_normal_form_to_expr_examples():
    nf = NormalForm((Polynomial.symbol("x+"),), (Polynomial.symbol("x-"),))
    e = normal_form_to_expr(nf)
    for v in (-2.0, -0.5, 0.0, 1.5):
        assert eval_real(e, {"x": v}) == v

    single = NormalForm((Polynomial({("x+", "y-"): 2.0}),), (Polynomial.zero(),))
    e2 = normal_form_to_expr(single)
    assert eval_real(e2, {"x": 3.0, "y": -2.0}) == pytest.approx(2.0 * 3.0 * 2.0)


def test_normal_form_round_trip_oracle():
    rng = random.Random(17)
    verified = 0
    for i in range(15):
        e = random_expr(rng, ("x", "y"), 5)
        try:
            nf = normal_form(e)
            nf2 = normal_form(normal_form_to_expr(nf), budget=200_000)
        except NormalFormBudgetError:
            continue
        verified += 1
        for _ in range(30):
            a = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2)}
            lhs, rhs = float(nf.evaluate(a)), float(nf2.evaluate(a))
            assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))
    assert verified >= 8


def test_split_decomposition_one_variable():
    # With the negative splits pinned to zero a one-variable normal form
    # reproduces the positive-axis values, and symmetrically.
    for i in range(20):
        e = random_expr(random.Random(300 + i), ("x",), 6)
        nf = normal_form(e)
        for lam in (0.25, 1.0, 2.5):
            plus = nf.evaluate_split({"x+": lam, "x-": 0.0})
            assert abs(plus - eval_real(e, {"x": lam})) <= 1e-9 * (1 + abs(plus))
            minus = nf.evaluate_split({"x+": 0.0, "x-": lam})
            assert abs(minus - eval_real(e, {"x": -lam})) <= 1e-9 * (1 + abs(minus))


def test_normal_form_json_round_trip():
    nf = normal_form(parse("x*y + (x \\/ 0)"))
    data = nf.to_json()
    assert set(data) == {"pos", "neg"}
    back = NormalForm.from_json(data)
    for i in range(20):
        rng = random.Random(i)
        a = {"x": rng.uniform(-2, 2), "y": rng.uniform(-2, 2)}
        assert float(nf.evaluate(a)) == float(back.evaluate(a))


def test_polynomial_invariants():
    with pytest.raises(ValueError):
        Polynomial({(): 1.0})
    p = Polynomial({("x",): 1.0, ("y",): -1.0})
    assert (p - p).is_zero()
    q = Polynomial.symbol("x") * Polynomial.symbol("x")
    assert q.terms == {("x", "x"): 1.0}


def test_majorant_examples():
    assert polynomial_majorant(Var("x")) == Polynomial.symbol("x")
    assert polynomial_majorant(Mul(Var("x"), Var("x"))) == Polynomial({("x", "x"): 1.0})
    m = polynomial_majorant(parse("x*y + (x \\/ y)"))
    assert m == Polynomial({("x", "y"): 1.0, ("x",): 1.0, ("y",): 1.0})


def test_majorant_dominates_10k_points():
    rng = random.Random(8)
    for i in range(20):
        e = random_expr(rng, ("x", "y"), 7)
        m = polynomial_majorant(e)
        pts = np.random.default_rng(i).uniform(-3, 3, (500, 2))
        for x, y in pts:
            lhs = abs(eval_real(e, {"x": x, "y": y}))
            rhs = float(m.evaluate({"x": abs(x), "y": abs(y)}))
            assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_majorant_coefficients_nonnegative_no_constant():
    rng = random.Random(21)
    for _ in range(50):
        m = polynomial_majorant(random_expr(rng, ("x", "y", "z"), 8))
        assert all(c >= 0 for c in m.terms.values())
        assert all(len(mono) > 0 for mono in m.terms)


def test_normal_form_agrees_in_weighted_models():
    from latalg.models import random_weighted_grid

    rng = random.Random(33)
    nprng = np.random.default_rng(33)
    for i in range(10):
        e = random_expr(rng, ("x", "y"), 6)
        try:
            nf = normal_form(e)
        except NormalFormBudgetError:
            continue
        back = normal_form_to_expr(nf)
        model = random_weighted_grid(nprng, 6)
        assignment = {v: model.random_element(nprng) for v in set(variables(e)) | set(variables(back))}
        lhs = model.evaluate(e, assignment).values
        rhs = model.evaluate(back, assignment).values
        scale = 1.0 + float(np.max(np.abs(lhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * scale


def test_normal_form_transport_through_model_suite():
    from latalg.models import model_suite

    e = parse("x*y + (x \\/ 0) + -0.5*y")
    nf = normal_form(e)
    back = normal_form_to_expr(nf)
    rng = np.random.default_rng(91)
    for model in model_suite(seed=91, weighted=5, diagonal=5, zero_points=4):
        assignment = {v: model.random_element(rng)
                      for v in set(variables(e)) | set(variables(back))}
        lhs = model.evaluate(e, assignment).values
        rhs = model.evaluate(back, assignment).values
        assert np.max(np.abs(lhs - rhs), initial=0.0) <= 1e-9 * (1.0 + np.max(np.abs(lhs), initial=0.0))
