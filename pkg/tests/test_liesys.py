"""
Tests for Lie systems: closure, structure constants, function algebras and t-dependent objects
"""

from fractions import Fraction

import pytest

from jlie.errors import JlieError, LengthMismatchError, NonGoodFunctionError
from jlie.liesys import (
    ExceedsBound, VGAlgebra, assemble_hamiltonian, assemble_tdvf, build_function_algebra,
    check_admits_hamiltonian, check_constant_of_motion, decompose, is_hamiltonian_algebra,
    lie_closure, reproduces_basis, riccati_fields
)
from jlie.models import ZeroStatus
from jlie.multivec import VectorField, is_zero as mv_is_zero
from jlie.scalar import Chart, parse_expr

LINE = Chart("line", ("x",))


def _fields(*coefficients):
    return [VectorField.from_list(LINE, [c]) for c in coefficients]


@pytest.fixture(scope="module")
def heisenberg_algebra(heisenberg):
    return lie_closure(list(heisenberg.fields.values()))


@pytest.fixture(scope="module")
def sl2_algebra(sl2):
    return lie_closure(list(sl2.fields.values()))


# ==================== Span Membership ====================

class TestDecompose:
    def test_vector_field_in_span(self):
        target = VectorField.from_list(LINE, ["3 - 2*x^2"])
        result = decompose(target, _fields("1", "x", "x^2"))
        assert result.coefficients == (Fraction(3), Fraction(0), Fraction(-2))
        assert not result.probabilistic

    def test_vector_field_outside_span(self):
        assert decompose(VectorField.from_list(LINE, ["x^3"]), _fields("1", "x")) is None

    def test_rational_functions(self, riccati_r4):
        h1, h3 = riccati_r4.functions["h1"], riccati_r4.functions["h3"]
        result = decompose(h1 * 2 - h3, [h1, h3])
        assert result.coefficients == (Fraction(2), Fraction(-1))

    def test_exp_functions_are_sampled(self, rectified):
        chart = rectified.chart
        basis = [parse_expr("exp(t)", chart), parse_expr("t", chart)]
        result = decompose(parse_expr("3*exp(t)", chart), basis, seed=0)
        assert result.coefficients == (Fraction(3), Fraction(0))
        assert result.probabilistic

    def test_empty_basis(self):
        assert decompose(VectorField.from_list(LINE, ["0"]), []).coefficients == ()
        assert decompose(VectorField.from_list(LINE, ["1"]), []) is None


# ==================== Closure ====================

class TestLieClosure:
    def test_riccati_basis_is_closed(self):
        V = lie_closure(riccati_fields(1))
        assert V.dim == 3
        assert V.constant(0, 1, 0) == 1
        assert V.constant(0, 2, 1) == 2
        assert V.constant(1, 2, 2) == 1

    def test_single_field(self):
        assert lie_closure(_fields("1")).dim == 1

    def test_bracket_is_added(self):
        V = lie_closure(_fields("1", "x^2"))
        assert V.dim == 3
        assert V.basis[2] == VectorField.from_list(LINE, ["2*x"])

    def test_dependent_fields_are_skipped(self):
        assert lie_closure(_fields("1", "2")).dim == 1

    def test_exceeds_bound(self):
        result = lie_closure(_fields("1", "x^3"), max_dim=5)
        assert isinstance(result, ExceedsBound)
        assert result.max_dim == 5
        assert len(result.partial_basis) == 6
        assert "possibly infinite-dimensional" in result.message

    def test_bound_below_generator_count(self):
        with pytest.raises(JlieError):
            lie_closure(_fields("1", "x"), max_dim=1)

    def test_coupled_riccati(self):
        V = lie_closure(riccati_fields(2))
        assert V.dim == 3
        assert V.chart.coords == ("x1", "x2")

    def test_heisenberg_fields(self, heisenberg, heisenberg_algebra):
        assert list(heisenberg_algebra.basis) == list(heisenberg.fields.values())
        assert heisenberg_algebra.bracket_in_basis(0, 1) == [0, 0, 1]

    def test_structure_constants_are_antisymmetric(self, sl2_algebra):
        for (i, j, k), c in sl2_algebra.structure_constants.items():
            assert sl2_algebra.constant(j, i, k) == -c

    def test_residuals_vanish(self, sl2_algebra):
        for _, _, residual in sl2_algebra.residuals():
            assert mv_is_zero(residual).status == ZeroStatus.PROVEN_ZERO

    def test_export(self):
        export = lie_closure(riccati_fields(1)).to_export()
        assert export.chart == ["x"]
        assert export.structure_constants["0,1,0"] == "1"
        assert export.structure_constants["1,0,0"] == "-1"


# ==================== Hamiltonian Algebras ====================

class TestHamiltonianAlgebra:
    def test_heisenberg(self, heisenberg_structure, heisenberg_algebra):
        hams = is_hamiltonian_algebra(heisenberg_structure, heisenberg_algebra, 1)
        assert [h.to_text() for h in hams] == ["-y", "x", "1"]

    def test_riccati_on_the_line(self, riccati_r1):
        J = riccati_r1.structure()
        V = lie_closure(list(riccati_r1.fields.values()))
        assert [h.to_text() for h in is_hamiltonian_algebra(J, V, 2)] == ["1", "x", "x^2"]

    def test_empty_basis(self, heisenberg, heisenberg_structure):
        V = VGAlgebra(heisenberg.chart, (), {})
        assert is_hamiltonian_algebra(heisenberg_structure, V, 1) == []


class TestFunctionAlgebra:
    def test_sl2_table(self, sl2, sl2_structure, sl2_algebra):
        hams = [sl2.functions[f"h{i}"] for i in (1, 2, 3)]
        A = build_function_algebra(sl2_structure, sl2_algebra, hams)
        assert A.names == ("h1", "h2", "h3")
        assert A.bracket_table[(0, 1)] == (0, -2, 0)
        assert A.bracket_table[(0, 2)] == (0, 0, 2)
        assert A.bracket_table[(1, 2)] == (-1, 0, 0)
        assert all(s.is_literal_zero for s in A.central.values())

    def test_heisenberg_table(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        hams = [heisenberg.functions[f"h{i}"] for i in (1, 2, 3)]
        A = build_function_algebra(heisenberg_structure, heisenberg_algebra, hams)
        assert A.bracket_table[(0, 1)] == (0, 0, 1)
        assert A.bracket_table[(0, 2)] == (0, 0, 0)
        assert A.bracket_table[(1, 2)] == (0, 0, 0)
        assert len(A.generators) == 3

    def test_single_generator(self, riccati_r1):
        J = riccati_r1.structure()
        V = lie_closure([riccati_r1.fields["X1"]])
        A = build_function_algebra(J, V, [parse_expr("1", riccati_r1.chart)])
        assert A.bracket_table == {}
        assert A.central == {}

    def test_length_mismatch(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        with pytest.raises(LengthMismatchError):
            build_function_algebra(heisenberg_structure, heisenberg_algebra, [heisenberg.functions["h1"]])

    def test_non_good_function(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        chart = heisenberg.chart
        hams = [parse_expr("z", chart), heisenberg.functions["h2"], heisenberg.functions["h3"]]
        with pytest.raises(NonGoodFunctionError):
            build_function_algebra(heisenberg_structure, heisenberg_algebra, hams)

    @pytest.mark.parametrize("name", ["heisenberg", "sl2"])
    def test_hamiltonians_reproduce_basis(self, request, name):
        manifest = request.getfixturevalue(name)
        J = request.getfixturevalue(f"{name}_structure")
        V = request.getfixturevalue(f"{name}_algebra")
        A = build_function_algebra(J, V, [manifest.functions[f"h{i}"] for i in (1, 2, 3)])
        assert reproduces_basis(J, A, V)

    def test_export(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        hams = [heisenberg.functions[f"h{i}"] for i in (1, 2, 3)]
        export = build_function_algebra(heisenberg_structure, heisenberg_algebra, hams).to_export()
        assert export.generators == {"h1": "-y", "h2": "x", "h3": "1"}
        assert export.structure_constants == {"0,1,2": "1"}


class TestConstantOfMotion:
    def test_sl2_casimir(self, sl2, sl2_structure, sl2_algebra):
        hams = [sl2.functions[f"h{i}"] for i in (1, 2, 3)]
        A = build_function_algebra(sl2_structure, sl2_algebra, hams)
        casimir = hams[0] * hams[0] + hams[1] * hams[2] * 4
        assert check_constant_of_motion(sl2_structure, casimir, A)

    def test_constant_on_poisson_fixture(self, riccati_r4):
        J = riccati_r4.structure()
        V = lie_closure(list(riccati_r4.fields.values()))
        A = build_function_algebra(J, V, [riccati_r4.functions[f"h{i}"] for i in (1, 2, 3)])
        assert check_constant_of_motion(J, parse_expr("1", riccati_r4.chart), A)

    def test_coordinate_is_not_conserved(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        hams = [heisenberg.functions[f"h{i}"] for i in (1, 2, 3)]
        A = build_function_algebra(heisenberg_structure, heisenberg_algebra, hams)
        assert not check_constant_of_motion(heisenberg_structure, parse_expr("x", heisenberg.chart), A)


# ==================== t-Dependent Objects ====================

class TestTimeDependent:
    def test_riccati_assembly(self):
        V = lie_closure(riccati_fields(1))
        X = assemble_tdvf(V, ["1", "0", "1"])
        expected = VectorField.from_list(V.chart, ["1 + x^2"])
        assert X.at(0) == expected
        assert X.at(Fraction(7, 3)) == expected

    def test_zero_coefficients(self):
        V = lie_closure(riccati_fields(1))
        assert assemble_tdvf(V, [0, 0, 0]).at(1).is_literal_zero

    def test_heisenberg_assembly(self, heisenberg, heisenberg_algebra):
        X = assemble_tdvf(heisenberg_algebra, ["1", "t", "t^2"])
        expected = VectorField.from_list(heisenberg.chart, ["1", "2", "2*x + 4"])
        assert X.at(2) == expected

    def test_length_mismatch(self, heisenberg_algebra):
        with pytest.raises(LengthMismatchError):
            assemble_tdvf(heisenberg_algebra, ["1", "t"])

    def test_hamiltonian_generates_field(self, heisenberg, heisenberg_structure, heisenberg_algebra):
        hams = [heisenberg.functions[f"h{i}"] for i in (1, 2, 3)]
        A = build_function_algebra(heisenberg_structure, heisenberg_algebra, hams)
        b = ["1", "t", "t^2 - 1"]
        X = assemble_tdvf(heisenberg_algebra, b)
        h = assemble_hamiltonian(A, b)
        assert h.at(2) == parse_expr("-y + 2*x + 3", heisenberg.chart)
        assert check_admits_hamiltonian(heisenberg_structure, X, h, [0, Fraction(1, 2), 3])
