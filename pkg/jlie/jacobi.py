"""
Jacobi Structures
Compatibility checks, Hamiltonian vector fields, the Jacobi bracket and a polynomial Hamiltonian solver
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import sympy
from sympy.polys.monomials import itermonomials
from sympy.polys.orderings import monomial_key

from .errors import ChartMismatchError, DegreeError, NonPolynomialError, UnusableStructureError
from .multivec import (
    Multivector, VectorField, apply, as_vector_field, contract, is_zero as mv_is_zero,
    schouten_nijenhuis, sharp, wedge
)
from .scalar import Chart, Expr, is_zero
from .schemas import Certificate, ZeroVerdict

logger = logging.getLogger(__name__)


# ==================== Types ====================

@dataclass(frozen=True)
class JacobiStructure:
    """A chart with a bivector, a Reeb vector field and the verdicts of both compatibility conditions"""
    chart: Chart
    lambda_: Multivector
    reeb: VectorField
    jacobi_verdict: ZeroVerdict
    reeb_verdict: ZeroVerdict
    jacobi_residual: Multivector
    reeb_residual: Multivector

    @property
    def usable(self) -> bool:
        return self.jacobi_verdict.is_zero and self.reeb_verdict.is_zero

    @property
    def is_poisson(self) -> bool:
        return self.reeb.is_literal_zero

    @property
    def proven(self) -> bool:
        return self.jacobi_verdict.is_proven and self.reeb_verdict.is_proven

    def require_usable(self) -> None:
        if not self.usable:
            raise UnusableStructureError(
                f"compatibility conditions fail on chart '{self.chart.name}': "
                f"[L,L]-2R^L = {self.jacobi_residual.to_text()}, [R,L] = {self.reeb_residual.to_text()}"
            )

    def certificates(self) -> List[Certificate]:
        return [
            Certificate(name="[L,L] - 2 R^L", expr=self.jacobi_residual.to_text(), verdict=self.jacobi_verdict),
            Certificate(name="[R,L]", expr=self.reeb_residual.to_text(), verdict=self.reeb_verdict),
        ]


@dataclass(frozen=True)
class HamiltonianPair:
    """Hamiltonian vector field together with its Hamiltonian function"""
    field: VectorField
    function: Expr
    good: bool


def _require_same_chart(J: JacobiStructure, *exprs) -> None:
    for item in exprs:
        if item.chart != J.chart:
            raise ChartMismatchError(
                f"'{item.chart.name}' does not match the structure's chart '{J.chart.name}'"
            )


# ==================== Structures ====================

def check_jacobi(lambda_: Multivector, reeb: Multivector, seed: Optional[int] = None) -> JacobiStructure:
    """
    Verify [L, L] = 2 R ^ L and [R, L] = 0

    Args:
        lambda_: Bivector field
        reeb: Reeb vector field (zero for a Poisson structure)
        seed: Sampling seed for exp-bearing coefficients

    Returns:
        JacobiStructure: Structure with both verdicts; usable iff both are zero

    Raises:
        DegreeError: Degrees are not (2, 1)
        ChartMismatchError: Inputs live on different charts
    """
    if lambda_.degree != 2:
        raise DegreeError(f"bivector expected, got degree {lambda_.degree}")
    reeb = as_vector_field(reeb)
    if lambda_.chart != reeb.chart:
        raise ChartMismatchError("bivector and Reeb field live on different charts")

    jacobi_residual = schouten_nijenhuis(lambda_, lambda_) - wedge(reeb, lambda_).scale(2)
    reeb_residual = schouten_nijenhuis(reeb, lambda_)
    structure = JacobiStructure(
        chart=lambda_.chart,
        lambda_=lambda_,
        reeb=reeb,
        jacobi_verdict=mv_is_zero(jacobi_residual, seed=seed),
        reeb_verdict=mv_is_zero(reeb_residual, seed=seed),
        jacobi_residual=jacobi_residual,
        reeb_residual=reeb_residual,
    )
    if structure.usable:
        logger.info("✅ Jacobi structure verified on chart '%s'", lambda_.chart.name)
    else:
        logger.info("❌ Jacobi compatibility fails on chart '%s'", lambda_.chart.name)
    return structure


def check_poisson(lambda_: Multivector, seed: Optional[int] = None) -> JacobiStructure:
    """Poisson structure as the Jacobi structure with zero Reeb field"""
    return check_jacobi(lambda_, Multivector.zero(lambda_.chart, 1), seed=seed)


# ==================== Hamiltonian Calculus ====================

def hamiltonian_vf(J: JacobiStructure, f: Expr, seed: Optional[int] = None) -> HamiltonianPair:
    """X_f = sharp(L, f) + f R, with the good flag R f = 0"""
    J.require_usable()
    _require_same_chart(J, f)
    field = as_vector_field(sharp(J.lambda_, f) + J.reeb.scale(f))
    good = is_zero(apply(J.reeb, f), seed=seed).is_zero
    return HamiltonianPair(field=field, function=f, good=good)


def jacobi_bracket(J: JacobiStructure, f: Expr, g: Expr) -> Expr:
    """{f, g} = L(df, dg) + f R g - g R f"""
    J.require_usable()
    _require_same_chart(J, f, g)
    value = contract(J.lambda_, f, g) + f * apply(J.reeb, g) - g * apply(J.reeb, f)
    return value.reduced()


def is_good(J: JacobiStructure, f: Expr, seed: Optional[int] = None) -> bool:
    """True iff R f is zero"""
    J.require_usable()
    _require_same_chart(J, f)
    return is_zero(apply(J.reeb, f), seed=seed).is_zero


def kernel_contains(J: JacobiStructure, f: Expr, seed: Optional[int] = None) -> bool:
    """True iff the Hamiltonian vector field of f vanishes"""
    return mv_is_zero(hamiltonian_vf(J, f, seed=seed).field, seed=seed).is_zero


def is_good_field(J: JacobiStructure, X: VectorField, f: Expr, seed: Optional[int] = None) -> bool:
    """True iff X = X_f and f is a good Hamiltonian function"""
    pair = hamiltonian_vf(J, f, seed=seed)
    return pair.good and mv_is_zero(pair.field - X, seed=seed).is_zero


# ==================== Hamiltonian Solver ====================

def _require_polynomial(name: str, P: Multivector) -> None:
    for value in P.components.values():
        if not value.is_polynomial:
            raise NonPolynomialError(f"{name} has a non-polynomial coefficient {value.to_text()}")


def _ansatz(chart: Chart, max_degree: int) -> Tuple[sympy.Expr, List[sympy.Dummy]]:
    symbols = chart.symbols
    monomials = sorted(itermonomials(list(symbols), max_degree), key=monomial_key("grlex", list(symbols)))
    unknowns = [sympy.Dummy(f"c{i}") for i in range(len(monomials))]
    return sympy.Add(*(c * m for c, m in zip(unknowns, monomials))), unknowns


def solve_hamiltonian(J: JacobiStructure, X: VectorField, max_degree: int) -> Optional[Expr]:
    """
    Find a polynomial f with X_f = X

    Equates monomial coefficients of X_f - X for a general polynomial of total
    degree at most max_degree and solves the exact linear system. Free
    parameters are set to zero.

    Args:
        J: Usable Jacobi structure with polynomial coefficients
        X: Vector field with polynomial coefficients
        max_degree: Total degree bound of the ansatz

    Returns:
        Optional[Expr]: A Hamiltonian function, or None if the system is inconsistent

    Raises:
        NonPolynomialError: A coefficient of J or X is not polynomial
    """
    J.require_usable()
    X = as_vector_field(X)
    _require_same_chart(J, X)
    _require_polynomial("bivector", J.lambda_)
    _require_polynomial("Reeb field", J.reeb)
    _require_polynomial("vector field", X)
    if max_degree < 0:
        raise DegreeError("max_degree must be non-negative")

    chart = J.chart
    symbols = chart.symbols
    f, unknowns = _ansatz(chart, max_degree)

    components = [sympy.Integer(0)] * chart.dim
    for (i, j), coefficient in J.lambda_.components.items():
        c = coefficient.evaluated
        components[j] += c * sympy.diff(f, symbols[i])
        components[i] -= c * sympy.diff(f, symbols[j])
    for i in range(chart.dim):
        components[i] += f * J.reeb.component(i).evaluated - X.component(i).evaluated

    equations = []
    for residual in components:
        poly = sympy.Poly(sympy.expand(residual), *symbols)
        equations.extend(poly.coeffs())
    solutions = sympy.linsolve(equations, unknowns)
    if solutions == sympy.EmptySet:
        logger.debug("no Hamiltonian of degree <= %d for %s", max_degree, X.to_text())
        return None

    values = next(iter(solutions))
    free = {c: 0 for c in unknowns}
    solved = f.subs(dict(zip(unknowns, (sympy.sympify(v).subs(free) for v in values))))
    return Expr(chart, sympy.expand(solved)).reduced()
