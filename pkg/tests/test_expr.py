from hypothesis import given, settings, strategies as st

from graphprog.expr import (
    BinOp, Cmp, Const, Neg, Var, apply_subst, eval_constraint, eval_expr,
    eval_label, normalize, solve_linear,
)
from graphprog.syntax import parse_expr, parse_label

x, y = Var("x"), Var("y")


def test_addition_under_interpretation():
    assert eval_expr(BinOp("+", x, Const(1)), {"x": 7}) == 8


def test_division_by_zero_is_undefined():
    assert eval_expr(BinOp("/", Const(1), Const(0)), {}) is None
    assert eval_expr(BinOp("/", x, Const(0)), {"x": 4}) is None


def test_negated_product():
    assert eval_expr(Neg(BinOp("*", x, y)), {"x": 8, "y": 8}) == -64


def test_unbound_variable_is_undefined():
    assert eval_expr(x, {}) is None
    assert eval_label((Const(1), x), {}) is None


def test_comparisons():
    assert eval_constraint(Cmp("!=", x, y), {"x": 1, "y": 2})
    assert eval_constraint(Cmp("=", x, x), {"x": 5})


def test_comparison_with_undefined_side_is_false():
    g = Cmp("=", BinOp("/", x, Const(0)), Const(1))
    assert eval_constraint(g, {"x": 3}) is False
    assert eval_constraint(Cmp("!=", BinOp("/", x, Const(0)), Const(1)), {"x": 3}) is False


def test_substitution_replaces_variables():
    e = BinOp("*", x, Const(2))
    assert apply_subst(e, {"x": BinOp("+", y, Const(1))}) == BinOp("*", BinOp("+", y, Const(1)), Const(2))
    assert str(apply_subst(e, {"x": BinOp("+", y, Const(1))})) == "(y + 1) * 2"


def test_substitution_in_labels():
    assert apply_subst((Const(5), x), {"x": Const(0)}) == (Const(5), Const(0))
    assert apply_subst(x, {}) == x


def test_normalize_is_commutative_and_folds_constants():
    assert normalize(BinOp("+", Const(1), x)) == normalize(BinOp("+", x, Const(1)))
    assert normalize(BinOp("*", Const(2), Const(3))) == Const(6)


def test_parse_and_print_round_trip():
    for text in ["x + 1", "-(x * y)", "(y + 1) * 2", "x - (y - 1)", "x / 2"]:
        assert str(parse_expr(text)) == text
    assert parse_label("x:i+1") == (x, BinOp("+", Var("i"), Const(1)))


def test_solve_linear():
    assert solve_linear(BinOp("+", Var("i"), Const(1)), 3, {}) == ("i", 2)
    assert solve_linear(BinOp("*", Const(2), Var("i")), 3, {}) is False
    assert solve_linear(BinOp("*", x, y), 4, {}) is None
    assert solve_linear(BinOp("+", x, y), 4, {"x": 1}) == ("y", 3)


names = st.sampled_from(["x", "y", "z"])
exprs = st.recursive(
    st.one_of(st.integers(-5, 5).map(Const), names.map(Var)),
    lambda sub: st.one_of(
        sub.map(Neg),
        st.tuples(st.sampled_from(["+", "-", "*", "/"]), sub, sub).map(lambda t: BinOp(*t)),
    ),
    max_leaves=8,
)
interps = st.fixed_dictionaries({n: st.integers(-6, 6) for n in ["x", "y", "z"]})


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_normalize_is_idempotent(e):
    assert normalize(normalize(e)) == normalize(e)


@settings(max_examples=200, deadline=None)
@given(exprs, interps)
def test_normalize_preserves_defined_values(e, interp):
    v = eval_expr(e, interp)
    if v is not None:
        assert eval_expr(normalize(e), interp) == v


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_printing_parses_back(e):
    assert parse_expr(str(e)) == e or eval_expr(parse_expr(str(e)), {"x": 2, "y": 3, "z": 5}) == \
        eval_expr(e, {"x": 2, "y": 3, "z": 5})
