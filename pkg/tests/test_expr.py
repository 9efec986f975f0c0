import math

import pytest
from hypothesis import given, strategies as st

from riopt.expr import ExprDomainError, ExprSyntaxError, parse_expr


@pytest.mark.parametrize(
    "src, x, want",
    [
        ("x1 + 1/x1", [2.0], 2.5),
        ("min(x1 + 2*x2, 2*x1 + x2)", [1.0, 3.0], 5.0),
        ("max(x1 - x2, -x1)", [1.0, 3.0], -1.0),
        ("(2^3)^2", [], 64.0),
        ("2^-1", [], 0.5),
        ("-x1^2", [3.0], 9.0),
        ("-(x1^2)", [3.0], -9.0),
        ("ln(exp(x1))", [0.7], 0.7),
        ("sqrt(abs(x1)) * 2e-1", [-4.0], 0.4),
        ("max(1, 2, 3) - min(4, 5, 6)", [], -1.0),
        ("x2", [1.0, 7.0], 7.0),
    ],
)
def test_evaluation(src, x, want):
    assert parse_expr(src)(x) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize(
    "src, col",
    [("ln(", 4), ("x1 +", 5), ("1 + $", 5), ("foo(x1)", 1), ("x0", 1), ("ln(1, 2)", 1), ("min(1)", 1), ("(x1", 4), ("2^3^2", 4)],
)
def test_syntax_errors_carry_position(src, col):
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr(src)
    assert exc.value.column == col


@pytest.mark.parametrize("src, x", [("ln(x1)", [0.0]), ("1/x1", [0.0]), ("sqrt(x1)", [-1.0]), ("exp(x1)", [1e6])])
def test_domain_errors(src, x):
    with pytest.raises(ExprDomainError):
        parse_expr(src)(x)


def test_arity_and_variables():
    e = parse_expr("x1 * x3 + 2")
    assert e.arity == 3
    assert e.variables() == {1, 3}
    assert parse_expr("4").arity == 0


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_source_round_trip(a, b):
    e = parse_expr(f"min({a!r}*x1, ({b!r}) - x1^2) + abs(x1)")
    e2 = parse_expr(e.to_source())
    for x in (-2.0, 0.5, 3.0):
        assert e2([x]) == e([x])


def test_operators_compose():
    f, g = parse_expr("x1"), parse_expr("x1^2")
    assert (f + g)([2.0]) == 6.0
    assert (f - g)([2.0]) == -2.0
    assert (f * g)([2.0]) == 8.0
    assert (3.0 * g)([2.0]) == 12.0
    assert (-g)([2.0]) == -4.0
    assert math.isclose(parse_expr("exp(1)")([]), math.e)
