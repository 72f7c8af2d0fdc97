"""
Tests for scalar expressions: parsing, printing, derivatives, zero tests, evaluation
"""

import math
import random
from fractions import Fraction

import pytest

from jlie.errors import (
    ChartError, ChartMismatchError, ExprSyntaxError, MissingCoordinateError,
    PoleError, UnknownIdentifierError
)
from jlie.models import ZeroStatus
from jlie.scalar import Chart, Expr, differentiate, evaluate, is_zero, parse_expr

SL2 = Chart("sl2", ("a", "b", "g"))
RECTIFIED = Chart("rectified", ("s", "t"))
R4 = Chart("r4", ("x1", "x2", "x3", "x4"))


def _random_polynomial(rng, chart, degree):
    total = Expr.zero(chart)
    for _ in range(4):
        term = Expr.constant(chart, rng.randint(-3, 3))
        for _ in range(rng.randint(0, degree)):
            term = term * Expr.coordinate(chart, rng.choice(chart.coords))
        total = total + term
    return total


# ==================== Charts ====================

class TestChart:
    def test_coordinates_are_ordered(self):
        chart = Chart("c", ("x", "y"))
        assert chart.dim == 2
        assert chart.index("y") == 1

    def test_duplicate_coordinate_rejected(self):
        with pytest.raises(ChartError):
            Chart("c", ("x", "x"))

    def test_exp_is_not_a_coordinate(self):
        with pytest.raises(ChartError):
            Chart("c", ("exp",))

    def test_unknown_coordinate(self, plane):
        with pytest.raises(UnknownIdentifierError):
            plane.index("z")


# ==================== Parsing and Printing ====================

class TestParse:
    def test_sl2_hamiltonian(self):
        h1 = parse_expr("1+2*b*g", SL2)
        b, g = Expr.coordinate(SL2, "b"), Expr.coordinate(SL2, "g")
        assert h1 == 1 + 2 * b * g

    def test_zero(self, plane):
        assert parse_expr("0", plane).is_literal_zero

    def test_rational_function_round_trip(self, plane):
        f = parse_expr("x^2/(x - y)", plane)
        text = f.to_text()
        assert text == "(x^2)/(x - y)"
        assert parse_expr(text, plane).to_text() == text

    def test_canonical_form_cancels(self, plane):
        assert parse_expr("x^2/(x-y)", plane) == parse_expr("x^3/(x^2-x*y)", plane)

    def test_canonical_denominator_is_monic(self, plane):
        p, q = parse_expr("x/(2*y)", plane).canonical
        assert str(p.as_expr()) == "x/2"
        assert str(q.as_expr()) == "y"

    def test_is_polynomial(self, plane):
        assert parse_expr("x^2 + y", plane).is_polynomial
        assert parse_expr("(x^2 - y^2)/(x - y)", plane).is_polynomial
        assert not parse_expr("1/x", plane).is_polynomial
        assert not parse_expr("exp(s)", RECTIFIED).is_polynomial

    def test_graded_lex_printing(self, space):
        assert parse_expr("1 + z + x*y + x^3", space).to_text() == "x^3 + x*y + z + 1"

    def test_rational_literal(self, plane):
        assert parse_expr("3/4*x", plane).to_text() == "3/4*x"

    def test_negation_binds_after_power(self, plane):
        assert parse_expr("-x^2", plane).to_text() == "-x^2"

    def test_negative_exponent(self, plane):
        assert parse_expr("x^-2", plane) == parse_expr("1/x^2", plane)

    def test_exp_round_trip(self):
        f = parse_expr("exp(t) * s", RECTIFIED)
        assert f.has_exp
        text = f.to_text()
        assert parse_expr(text, RECTIFIED) == f

    @pytest.mark.parametrize("text", ["exp(s)*exp(-s) - 1", "exp(t)*s - exp(-t)/2", "exp(s*t)^2 + 1/exp(t)"])
    def test_exp_printing_is_stable(self, text):
        first = parse_expr(text, RECTIFIED).to_text()
        second = parse_expr(first, RECTIFIED).to_text()
        assert second == first
        assert parse_expr(second, RECTIFIED).to_text() == first

    def test_whitespace_is_insignificant(self, plane):
        assert parse_expr("  x*   y ", plane) == parse_expr("x*y", plane)

    @pytest.mark.parametrize("text", ["x +", "(x", "x y", "2^x", "", "x ** 2"])
    def test_syntax_errors(self, plane, text):
        with pytest.raises(ExprSyntaxError):
            parse_expr(text, plane)

    def test_division_by_literal_zero(self, plane):
        with pytest.raises(ExprSyntaxError):
            parse_expr("x/0", plane)

    def test_unknown_identifier_is_named(self, plane):
        with pytest.raises(UnknownIdentifierError) as exc:
            parse_expr("x + q", plane)
        assert exc.value.name == "q"
        assert exc.value.position == 4


# ==================== Arithmetic ====================

class TestArithmetic:
    def test_chart_mismatch(self, plane, space):
        with pytest.raises(ChartMismatchError):
            Expr.coordinate(plane, "x") + Expr.coordinate(space, "x")

    def test_float_constants_rejected(self, plane):
        with pytest.raises(TypeError):
            Expr.coordinate(plane, "x") * 0.5

    def test_fraction_constants(self, plane):
        assert Expr.coordinate(plane, "x") * Fraction(1, 2) == parse_expr("x/2", plane)

    def test_division_by_zero_constant(self, plane):
        with pytest.raises(PoleError):
            Expr.coordinate(plane, "x") / 0


# ==================== Derivatives ====================

class TestDifferentiate:
    def test_power(self, plane):
        assert differentiate(parse_expr("x^2", plane), "x").to_text() == "2*x"

    def test_exp_is_its_own_derivative(self):
        f = parse_expr("exp(t)", RECTIFIED)
        assert differentiate(f, "t") == f

    def test_quotient_rule(self):
        f = parse_expr("-1/(x1-x2)", R4)
        expected = parse_expr("1/(x1-x2)^2", R4)
        assert is_zero(differentiate(f, "x1") - expected).status == ZeroStatus.PROVEN_ZERO

    def test_quotient_rule_matches_finite_differences(self):
        f = parse_expr("-1/(x1-x2)", R4)
        df = differentiate(f, "x1")
        rng = random.Random(5)
        h = 1e-5
        for _ in range(5):
            point = {c: rng.uniform(-2, 2) for c in R4.coords}
            point["x2"] = point["x1"] + rng.choice([-1, 1]) * rng.uniform(0.5, 1.5)
            plus = dict(point, x1=point["x1"] + h)
            minus = dict(point, x1=point["x1"] - h)
            numeric = (evaluate(f, plus) - evaluate(f, minus)) / (2 * h)
            exact = evaluate(df, point)
            assert abs(numeric - exact) <= 1e-8 * max(1.0, abs(exact))

    def test_unknown_coordinate(self, plane):
        with pytest.raises(UnknownIdentifierError):
            differentiate(parse_expr("x", plane), "z")

    def test_linearity(self, space):
        rng = random.Random(1)
        for _ in range(5):
            f = _random_polynomial(rng, space, 3)
            g = _random_polynomial(rng, space, 3)
            a, b = Fraction(rng.randint(-5, 5), 3), Fraction(rng.randint(1, 5), 2)
            lhs = differentiate(f * a + g * b, "y")
            rhs = differentiate(f, "y") * a + differentiate(g, "y") * b
            assert is_zero(lhs - rhs).status == ZeroStatus.PROVEN_ZERO

    def test_product_rule(self, space):
        rng = random.Random(2)
        for _ in range(5):
            f = _random_polynomial(rng, space, 4)
            g = _random_polynomial(rng, space, 4)
            lhs = differentiate(f * g, "z")
            rhs = f * differentiate(g, "z") + g * differentiate(f, "z")
            assert is_zero(lhs - rhs).status == ZeroStatus.PROVEN_ZERO

    def test_chain_rule_through_exp(self):
        f = parse_expr("exp(s*t)", RECTIFIED)
        expected = parse_expr("t*exp(s*t)", RECTIFIED)
        assert is_zero(differentiate(f, "s") - expected, seed=0).is_zero

    def test_derivative_matches_central_difference(self, space):
        f = parse_expr("x^2*y/(1 + x^2) + z^3", space)
        df = differentiate(f, "x")
        rng = random.Random(3)
        h = 1e-5
        for _ in range(5):
            point = {c: rng.uniform(-2, 2) for c in space.coords}
            numeric = (
                evaluate(f, dict(point, x=point["x"] + h)) - evaluate(f, dict(point, x=point["x"] - h))
            ) / (2 * h)
            exact = evaluate(df, point)
            assert abs(numeric - exact) <= 1e-6 * max(1.0, abs(exact))


# ==================== Zero Tests ====================

class TestIsZero:
    def test_binomial_expansion(self, plane):
        f = parse_expr("(x+y)^2 - x^2 - 2*x*y - y^2", plane)
        assert is_zero(f).status == ZeroStatus.PROVEN_ZERO

    def test_nonzero_polynomial(self, plane):
        assert is_zero(parse_expr("x - y", plane)).status == ZeroStatus.PROVEN_NONZERO

    def test_derivative_of_exp_collapses(self):
        f = differentiate(parse_expr("exp(t)", RECTIFIED), "s")
        assert f.is_literal_zero
        assert is_zero(f).status == ZeroStatus.PROVEN_ZERO

    def test_exp_identity_is_probable(self):
        verdict = is_zero(parse_expr("exp(t)*exp(-t) - 1", RECTIFIED), seed=0)
        assert verdict.status == ZeroStatus.PROBABLY_ZERO
        assert verdict.n_samples == 20
        assert verdict.tolerance == 1e-30
        assert not verdict.is_proven

    def test_exp_nonzero_has_witness(self):
        verdict = is_zero(parse_expr("exp(t) - 1 - t", RECTIFIED), seed=0)
        assert verdict.status == ZeroStatus.PROBABLY_NONZERO
        assert set(verdict.witness) == {"s", "t"}

    def test_seeded_verdicts_are_reproducible(self):
        f = parse_expr("exp(s) - s", RECTIFIED)
        assert is_zero(f, seed=7) == is_zero(f, seed=7)

    def test_exact_equality_agrees_with_canonical_form(self, plane):
        f = parse_expr("(x^2 - y^2)/(x - y)", plane)
        g = parse_expr("x + y", plane)
        assert (is_zero(f - g).status == ZeroStatus.PROVEN_ZERO) == (f == g)


# ==================== Evaluation ====================

class TestEvaluate:
    def test_exact_rational(self, plane):
        assert evaluate(parse_expr("x^2", plane), {"x": 3, "y": 0}) == Fraction(9)

    def test_sl2_hamiltonian_value(self):
        h2 = parse_expr("g*(1+b*g)/a", SL2)
        assert evaluate(h2, {"a": 1, "b": 0, "g": 1}) == 1

    def test_pole(self, plane):
        with pytest.raises(PoleError):
            evaluate(parse_expr("1/(x-y)", plane), {"x": 1, "y": 1})

    def test_pole_on_float_path(self, plane):
        with pytest.raises(PoleError):
            evaluate(parse_expr("1/(x-y)", plane), {"x": 1.0, "y": 1.0})

    @pytest.mark.parametrize("point", [{"x": 1, "y": 0}, {"x": 1.0, "y": 0.0}])
    def test_removable_singularity_is_a_pole(self, plane, point):
        with pytest.raises(PoleError) as exc:
            evaluate(parse_expr("(x^2-1)/(x-1)", plane), point)
        assert "x - 1" in str(exc.value)

    def test_missing_coordinate(self, plane):
        with pytest.raises(MissingCoordinateError):
            evaluate(parse_expr("x", plane), {"x": 1})

    def test_float_result_for_exp(self):
        value = evaluate(parse_expr("exp(t)", RECTIFIED), {"s": 0, "t": 1})
        assert isinstance(value, float)
        assert value == pytest.approx(math.e, rel=1e-15)
