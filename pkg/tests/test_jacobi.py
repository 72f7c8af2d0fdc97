"""
Tests for Jacobi structures, Hamiltonian vector fields, the Jacobi bracket and the polynomial solver
"""

import random

import pytest

from jlie.errors import NonPolynomialError, UnusableStructureError
from jlie.jacobi import (
    check_jacobi, check_poisson, hamiltonian_vf, is_good, is_good_field, jacobi_bracket,
    kernel_contains, solve_hamiltonian
)
from jlie.models import ZeroStatus
from jlie.multivec import Multivector, VectorField, is_zero as mv_is_zero, lie_bracket
from jlie.scalar import Expr, is_zero, parse_expr


def _random_polynomial(rng, chart, degree=2):
    total = Expr.constant(chart, rng.randint(-2, 2))
    for _ in range(3):
        term = Expr.constant(chart, rng.randint(-3, 3))
        for _ in range(rng.randint(1, degree)):
            term = term * Expr.coordinate(chart, rng.choice(chart.coords))
        total = total + term
    return total


def _zero(f, seed=0):
    return is_zero(f, seed=seed).is_zero


@pytest.fixture
def noncompatible(plane):
    lam = Multivector.from_form(plane, {"degree": 2, "components": {"0,1": "x"}})
    return check_jacobi(lam, VectorField.partial(plane, "x"))


# ==================== Compatibility ====================

class TestCheckJacobi:
    def test_heisenberg(self, heisenberg_structure):
        assert heisenberg_structure.usable
        assert heisenberg_structure.jacobi_verdict.status == ZeroStatus.PROVEN_ZERO
        assert heisenberg_structure.reeb_verdict.status == ZeroStatus.PROVEN_ZERO
        assert not heisenberg_structure.is_poisson

    def test_sl2(self, sl2_structure):
        assert sl2_structure.usable
        assert sl2_structure.proven

    def test_planar_bivector_without_reeb(self, plane):
        lam = Multivector.from_form(plane, {"degree": 2, "components": {"0,1": "x^3 - y + 2"}})
        J = check_poisson(lam)
        assert J.usable
        assert J.is_poisson

    def test_riccati_r4_is_poisson(self, riccati_r4):
        J = riccati_r4.structure()
        assert J.usable
        assert J.is_poisson

    def test_reeb_must_preserve_bivector(self, noncompatible):
        assert not noncompatible.usable
        assert noncompatible.reeb_verdict.status == ZeroStatus.PROVEN_NONZERO
        with pytest.raises(UnusableStructureError):
            noncompatible.require_usable()

    def test_unusable_structure_is_refused(self, noncompatible, plane):
        with pytest.raises(UnusableStructureError):
            hamiltonian_vf(noncompatible, parse_expr("x", plane))

    def test_certificates(self, heisenberg_structure):
        names = [c.name for c in heisenberg_structure.certificates()]
        assert names == ["[L,L] - 2 R^L", "[R,L]"]


# ==================== Hamiltonian Vector Fields ====================

class TestHamiltonianVF:
    def test_heisenberg_first_generator(self, heisenberg, heisenberg_structure):
        pair = hamiltonian_vf(heisenberg_structure, parse_expr("-y", heisenberg.chart))
        assert pair.field == heisenberg.fields["X1"]
        assert pair.good

    def test_heisenberg_second_generator(self, heisenberg, heisenberg_structure):
        pair = hamiltonian_vf(heisenberg_structure, parse_expr("x", heisenberg.chart))
        assert pair.field == heisenberg.fields["X2"]

    def test_constant_function_gives_reeb_field(self, heisenberg, heisenberg_structure):
        pair = hamiltonian_vf(heisenberg_structure, Expr.constant(heisenberg.chart, 1))
        assert pair.field == heisenberg.fields["X3"]
        assert pair.good

    def test_zero_function(self, heisenberg, heisenberg_structure):
        assert hamiltonian_vf(heisenberg_structure, Expr.zero(heisenberg.chart)).field.is_literal_zero

    @pytest.mark.parametrize("index", [1, 2, 3])
    def test_sl2_hamiltonians_reproduce_fields(self, sl2, sl2_structure, index):
        pair = hamiltonian_vf(sl2_structure, sl2.functions[f"h{index}"])
        difference = pair.field - sl2.fields[f"X{index}"]
        assert mv_is_zero(difference).status == ZeroStatus.PROVEN_ZERO
        assert pair.good

    @pytest.mark.parametrize("index", [1, 2, 3])
    def test_riccati_r4_hamiltonians(self, riccati_r4, index):
        J = riccati_r4.structure()
        pair = hamiltonian_vf(J, riccati_r4.functions[f"h{index}"])
        difference = pair.field - riccati_r4.fields[f"X{index}"]
        assert mv_is_zero(difference).status == ZeroStatus.PROVEN_ZERO

    def test_kernel_of_rectified_model(self, rectified):
        J = rectified.structure()
        f = rectified.functions["kernel"]
        verdict = mv_is_zero(hamiltonian_vf(J, f).field)
        assert verdict.is_zero
        assert kernel_contains(J, f)

    def test_heisenberg_kernel_membership(self, heisenberg, heisenberg_structure):
        assert not kernel_contains(heisenberg_structure, parse_expr("y", heisenberg.chart))

    def test_good_field(self, heisenberg, heisenberg_structure):
        assert is_good_field(heisenberg_structure, heisenberg.fields["X2"], parse_expr("x", heisenberg.chart))


# ==================== Jacobi Bracket ====================

class TestJacobiBracket:
    def test_heisenberg_generators(self, heisenberg, heisenberg_structure):
        f = parse_expr("-y", heisenberg.chart)
        g = parse_expr("x", heisenberg.chart)
        assert jacobi_bracket(heisenberg_structure, f, g).to_text() == "1"

    def test_sl2_table(self, sl2, sl2_structure):
        h1, h2, h3 = (sl2.functions[f"h{i}"] for i in (1, 2, 3))
        assert _zero(jacobi_bracket(sl2_structure, h1, h2) + h2 * 2)
        assert _zero(jacobi_bracket(sl2_structure, h1, h3) - h3 * 2)
        assert _zero(jacobi_bracket(sl2_structure, h2, h3) + h1)

    def test_self_bracket_vanishes(self, sl2, sl2_structure):
        h2 = sl2.functions["h2"]
        assert jacobi_bracket(sl2_structure, h2, h2).is_literal_zero

    def test_antisymmetry(self, heisenberg, heisenberg_structure):
        rng = random.Random(31)
        chart = heisenberg.chart
        for _ in range(5):
            f, g = _random_polynomial(rng, chart), _random_polynomial(rng, chart)
            total = jacobi_bracket(heisenberg_structure, f, g) + jacobi_bracket(heisenberg_structure, g, f)
            assert _zero(total)

    def test_jacobi_identity(self, heisenberg, heisenberg_structure):
        rng = random.Random(37)
        J = heisenberg_structure
        for _ in range(3):
            f, g, h = (_random_polynomial(rng, heisenberg.chart) for _ in range(3))
            total = (
                jacobi_bracket(J, f, jacobi_bracket(J, g, h))
                + jacobi_bracket(J, g, jacobi_bracket(J, h, f))
                + jacobi_bracket(J, h, jacobi_bracket(J, f, g))
            )
            assert _zero(total)

    @pytest.mark.parametrize("name", ["heisenberg", "sl2"])
    def test_morphism_law(self, request, name):
        manifest = request.getfixturevalue(name)
        J = request.getfixturevalue(f"{name}_structure")
        rng = random.Random(41)
        for _ in range(3):
            f, g = _random_polynomial(rng, manifest.chart), _random_polynomial(rng, manifest.chart)
            lhs = lie_bracket(hamiltonian_vf(J, f).field, hamiltonian_vf(J, g).field)
            rhs = hamiltonian_vf(J, jacobi_bracket(J, f, g)).field
            assert mv_is_zero(lhs - rhs).status == ZeroStatus.PROVEN_ZERO

    def test_good_functions_closed_under_bracket(self, sl2, sl2_structure):
        h = [sl2.functions[f"h{i}"] for i in (1, 2, 3)]
        for f in h:
            for g in h:
                assert is_good(sl2_structure, jacobi_bracket(sl2_structure, f, g))

    def test_good_functions_closed_on_rectified_model(self, rectified):
        J = rectified.structure()
        chart = rectified.chart
        goods = [parse_expr(text, chart) for text in ("exp(t)", "t^2 + 1", "t*exp(2*t)")]
        for f in goods:
            assert is_good(J, f)
            for g in goods:
                assert is_good(J, jacobi_bracket(J, f, g))

    def test_derivation_law_for_good_functions(self, sl2, sl2_structure):
        rng = random.Random(43)
        J = sl2_structure
        g = sl2.functions["h1"]
        for _ in range(3):
            f, h = _random_polynomial(rng, sl2.chart), _random_polynomial(rng, sl2.chart)
            total = jacobi_bracket(J, g, f * h) - f * jacobi_bracket(J, g, h) - h * jacobi_bracket(J, g, f)
            assert _zero(total)

    def test_leibniz_fails_with_reeb_field(self, heisenberg, heisenberg_structure):
        chart = heisenberg.chart
        J = heisenberg_structure
        f, g, h = parse_expr("z", chart), parse_expr("x", chart), parse_expr("y", chart)
        defect = jacobi_bracket(J, f, g * h) - g * jacobi_bracket(J, f, h) - h * jacobi_bracket(J, f, g)
        assert is_zero(defect).status == ZeroStatus.PROVEN_NONZERO

    def test_poisson_bracket_is_leibniz(self, riccati_r4):
        J = riccati_r4.structure()
        rng = random.Random(47)
        for _ in range(3):
            f, g, h = (_random_polynomial(rng, riccati_r4.chart) for _ in range(3))
            defect = jacobi_bracket(J, f, g * h) - g * jacobi_bracket(J, f, h) - h * jacobi_bracket(J, f, g)
            assert is_zero(defect).status == ZeroStatus.PROVEN_ZERO


# ==================== Good Functions ====================

class TestIsGood:
    def test_sl2_hamiltonian(self, sl2, sl2_structure):
        assert is_good(sl2_structure, sl2.functions["h3"])

    def test_heisenberg_vertical_coordinate(self, heisenberg, heisenberg_structure):
        assert not is_good(heisenberg_structure, parse_expr("z", heisenberg.chart))

    def test_rectified_exponential(self, rectified):
        assert is_good(rectified.structure(), rectified.functions["kernel"])


# ==================== Hamiltonian Solver ====================

class TestSolveHamiltonian:
    def test_riccati_quadratic_field(self, riccati_r1):
        J = riccati_r1.structure()
        f = solve_hamiltonian(J, riccati_r1.fields["X3"], 2)
        assert f.to_text() == "x^2"

    def test_zero_field(self, riccati_r1):
        J = riccati_r1.structure()
        f = solve_hamiltonian(J, VectorField.from_list(riccati_r1.chart, ["0"]), 2)
        assert f.is_literal_zero

    def test_heisenberg_linear(self, heisenberg, heisenberg_structure):
        f = solve_hamiltonian(heisenberg_structure, heisenberg.fields["X2"], 1)
        assert f.to_text() == "x"

    def test_solution_reproduces_field(self, heisenberg, heisenberg_structure):
        for X in heisenberg.fields.values():
            f = solve_hamiltonian(heisenberg_structure, X, 2)
            assert hamiltonian_vf(heisenberg_structure, f).field == X

    def test_inconsistent_system(self, heisenberg, heisenberg_structure):
        X = VectorField.from_list(heisenberg.chart, ["x", "0", "0"])
        assert solve_hamiltonian(heisenberg_structure, X, 1) is None

    def test_non_polynomial_field(self, sl2, sl2_structure):
        with pytest.raises(NonPolynomialError):
            solve_hamiltonian(sl2_structure, sl2.fields["X2"], 2)
