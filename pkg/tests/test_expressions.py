import math

import numpy as np
import pytest

from polydg.errors import ExprSyntaxError
from polydg.expressions import parse_expr

X, Y = 0.5, 0.25

# expression source, hand-written equivalent
TABLE = [
    ("1+x", lambda x, y: 1 + x),
    ("x*y", lambda x, y: x * y),
    ("exp(x*y)", lambda x, y: math.exp(x * y)),
    ("2", lambda x, y: 2.0),
    ("pi", lambda x, y: math.pi),
    ("x - y - 1", lambda x, y: x - y - 1),
    ("x/y/2", lambda x, y: x / y / 2),
    ("x^2", lambda x, y: x**2),
    ("2^3^2", lambda x, y: 512.0),
    ("-x^2", lambda x, y: -(x**2)),
    ("x^-2", lambda x, y: x**-2),
    ("-x*y", lambda x, y: -x * y),
    ("--x", lambda x, y: x),
    ("(1+x)*(1-y)", lambda x, y: (1 + x) * (1 - y)),
    ("sin(pi*x)*sin(pi*y)", lambda x, y: math.sin(math.pi * x) * math.sin(math.pi * y)),
    ("cos(x)^2 + sin(x)^2", lambda x, y: 1.0),
    ("1 + x*y^2", lambda x, y: 1 + x * y**2),
    ("exp(-(x^2 + y^2))", lambda x, y: math.exp(-(x**2 + y**2))),
    ("1.5e2 + 0.5", lambda x, y: 150.5),
    ("2*pi^2*sin(pi*x)*sin(pi*y)", lambda x, y: 2 * math.pi**2 * math.sin(math.pi * x) * math.sin(math.pi * y)),
]


@pytest.mark.parametrize("src,ref", TABLE, ids=[t[0] for t in TABLE])
def test_evaluation_table(src, ref):
    expr = parse_expr(src)
    assert expr(X, Y) == pytest.approx(ref(X, Y), rel=1e-15, abs=1e-15)


def test_spec_point_values():
    assert parse_expr("1+x")(0.5, 0.25) == 1.5
    assert parse_expr("x*y")(0.5, 0.25) == 0.125
    assert parse_expr("exp(x*y)")(0.5, 0.25) == pytest.approx(1.1331484530668263, rel=1e-15)


@pytest.mark.parametrize("src,ref", TABLE, ids=[t[0] for t in TABLE])
def test_print_parse_round_trip(src, ref):
    first = parse_expr(src)
    second = parse_expr(first.to_source())
    assert first == second
    assert second.to_source() == first.to_source()  # printing is idempotent


def test_vectorized_evaluation():
    expr = parse_expr("sin(pi*x) + y^2")
    x = np.linspace(0, 1, 7)
    y = np.linspace(0, 1, 7)
    np.testing.assert_allclose(expr(x, y), np.sin(np.pi * x) + y**2)


def test_precedence_against_python():
    cases = ["1+2*3", "(1+2)*3", "4/2/2", "1-2-3", "2*3^2", "-2^2"]
    py = [1 + 2 * 3, (1 + 2) * 3, 4 / 2 / 2, 1 - 2 - 3, 2 * 3**2, -(2**2)]
    for src, expected in zip(cases, py):
        assert parse_expr(src)(0.0, 0.0) == expected


class TestErrors:
    def test_unknown_identifier_with_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse_expr("x + z")
        assert err.value.position == 4

    def test_unknown_function(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("tan(x)")

    def test_truncated_input(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("1 +")

    def test_unbalanced_paren(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("(x + 1")

    def test_trailing_garbage(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("x 1")

    def test_stray_character(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("x + $")

    def test_function_requires_parens(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("sin x")

    def test_non_string(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr(42)
