"""
Lie Systems
Vessiot-Guldberg Lie algebras, t-dependent vector fields, function algebras of
Jacobi-Lie Hamiltonian systems and constants of motion
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import sympy

from .config import get_settings
from .errors import (
    InconsistentAlgebraError, JlieError, LengthMismatchError, NonGoodFunctionError
)
from .jacobi import JacobiStructure, hamiltonian_vf, jacobi_bracket, solve_hamiltonian
from .multivec import (
    Multivector, VectorField, as_vector_field, is_zero as mv_is_zero, lie_bracket,
    linear_combination
)
from .scalar import Chart, Expr, evaluate, is_zero, parse_expr
from .schemas import AlgebraExport, FunctionAlgebraExport

logger = logging.getLogger(__name__)

TIME_CHART = Chart("time", ("t",))

Element = Union[Multivector, Expr]
Constants = Dict[Tuple[int, int, int], Fraction]


# ==================== Span Membership ====================

@dataclass(frozen=True)
class Decomposition:
    """Constant coefficients of a target in a basis"""
    coefficients: Tuple[Fraction, ...]
    probabilistic: bool = False


def _components(item: Element, keys: Sequence[tuple]) -> List[sympy.Expr]:
    if isinstance(item, Expr):
        return [item.evaluated]
    return [item.coefficient(*key).evaluated for key in keys]


def _has_exp(item: Element) -> bool:
    if isinstance(item, Expr):
        return item.has_exp
    return any(value.has_exp for value in item.components.values())


def _to_fraction(value: sympy.Expr) -> Fraction:
    if not value.is_Rational:
        raise JlieError(f"non-rational span coefficient {value}")
    return Fraction(int(value.p), int(value.q))


def decompose(target: Element, basis: Sequence[Element], seed: Optional[int] = None) -> Optional[Decomposition]:
    """
    Express target as a real-constant combination of basis elements

    Works for multivectors of one degree and for functions. Exp-free inputs
    are decided exactly by equating numerator coefficients; exp-bearing
    inputs are fitted at seeded sample points and the fit is re-checked.

    Args:
        target: Element to decompose
        basis: Candidate spanning elements on the same chart
        seed: Sampling seed for the exp-bearing path

    Returns:
        Optional[Decomposition]: Coefficients, or None if target is not in the span
    """
    basis = list(basis)
    chart = target.chart
    if isinstance(target, Multivector):
        key_set = set(target.components)
        for item in basis:
            key_set.update(item.components)
        keys = sorted(key_set)
    else:
        keys = [()]
    if not basis:
        return Decomposition(()) if target.is_literal_zero else None

    if _has_exp(target) or any(_has_exp(item) for item in basis):
        return _decompose_sampled(target, basis, keys, seed)

    unknowns = [sympy.Dummy(f"c{k}") for k in range(len(basis))]
    target_parts = _components(target, keys)
    basis_parts = [_components(item, keys) for item in basis]
    equations = []
    for position, goal in enumerate(target_parts):
        residual = goal - sympy.Add(*(c * parts[position] for c, parts in zip(unknowns, basis_parts)))
        numerator, _ = sympy.fraction(sympy.together(residual))
        numerator = sympy.expand(numerator)
        if numerator == 0:
            continue
        equations.extend(sympy.Poly(numerator, *chart.symbols).coeffs())
    solutions = sympy.linsolve(equations, unknowns) if equations else sympy.FiniteSet(tuple(unknowns))
    if solutions == sympy.EmptySet:
        return None
    values = next(iter(solutions))
    free = {c: 0 for c in unknowns}
    return Decomposition(tuple(_to_fraction(sympy.sympify(v).subs(free)) for v in values))


def _decompose_sampled(target: Element, basis: List[Element], keys, seed: Optional[int]) -> Optional[Decomposition]:
    settings = get_settings()
    chart = target.chart
    rng = random.Random(settings.seed if seed is None else seed)
    functions = [
        sympy.lambdify(chart.symbols, _components(item, keys), modules="mpmath")
        for item in [target] + basis
    ]
    n_points = max(settings.zero_samples, 2 * len(basis))
    rows, rhs = [], []
    attempts = 0
    with mpmath.workprec(settings.zero_precision_bits):
        while len(rows) < n_points * len(keys):
            if attempts >= settings.resample_budget:
                raise JlieError("too many poles while sampling for span membership", exit_code=1)
            attempts += 1
            point = [mpmath.mpf(rng.randint(-16, 16)) / rng.randint(1, 8) for _ in chart.coords]
            try:
                values = [fn(*point) for fn in functions]
            except (ZeroDivisionError, OverflowError, ValueError):
                continue
            for position in range(len(keys)):
                rhs.append(values[0][position])
                rows.append([values[k + 1][position] for k in range(len(basis))])
        solution, residual = mpmath.qr_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
    coefficients = tuple(
        Fraction(mpmath.nstr(solution[k], 25)).limit_denominator(10 ** 6) for k in range(len(basis))
    )
    remainder = target - _combine(basis, coefficients)
    verdict = mv_is_zero(remainder, seed=seed) if isinstance(remainder, Multivector) else is_zero(remainder, seed=seed)
    if not verdict.is_zero:
        logger.debug("sampled fit rejected, residual %s", residual)
        return None
    return Decomposition(coefficients, probabilistic=True)


def _combine(basis: Sequence[Element], coefficients: Sequence[Fraction]) -> Element:
    if isinstance(basis[0], Expr):
        total = Expr.zero(basis[0].chart)
        for item, c in zip(basis, coefficients):
            total = total + item * c
        return total
    return linear_combination(basis, coefficients)


# ==================== Vessiot-Guldberg Lie Algebras ====================

@dataclass(frozen=True)
class VGAlgebra:
    """Basis of vector fields closed under the Lie bracket, with structure constants"""
    chart: Chart
    basis: Tuple[VectorField, ...]
    structure_constants: Constants
    probabilistic: bool = False

    @property
    def dim(self) -> int:
        return len(self.basis)

    def constant(self, i: int, j: int, k: int) -> Fraction:
        return self.structure_constants.get((i, j, k), Fraction(0))

    def bracket_in_basis(self, i: int, j: int) -> List[Fraction]:
        return [self.constant(i, j, k) for k in range(self.dim)]

    def residuals(self) -> List[Tuple[int, int, Multivector]]:
        """[X_i, X_j] - sum_k c_ijk X_k for every pair i < j"""
        out = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                bracket = lie_bracket(self.basis[i], self.basis[j])
                expansion = linear_combination(self.basis, self.bracket_in_basis(i, j))
                out.append((i, j, bracket - expansion))
        return out

    def to_export(self) -> AlgebraExport:
        return AlgebraExport(
            chart=list(self.chart.coords),
            basis=[X.to_form() for X in self.basis],
            structure_constants={f"{i},{j},{k}": str(c) for (i, j, k), c in sorted(self.structure_constants.items())},
            probabilistic=self.probabilistic,
        )


@dataclass(frozen=True)
class ExceedsBound:
    """Closure stopped after the basis outgrew max_dim"""
    max_dim: int
    partial_basis: Tuple[VectorField, ...] = field(default=())

    @property
    def message(self) -> str:
        return f"generated Lie algebra exceeds dimension {self.max_dim}; possibly infinite-dimensional"


def structure_constants(basis: Sequence[VectorField], seed: Optional[int] = None) -> Tuple[Constants, bool]:
    """c_ijk with [X_i, X_j] = sum_k c_ijk X_k; raises InconsistentAlgebraError if a bracket leaves the span"""
    constants: Constants = {}
    probabilistic = False
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            decomposition = decompose(lie_bracket(basis[i], basis[j]), basis, seed=seed)
            if decomposition is None:
                raise InconsistentAlgebraError(f"[X{i + 1}, X{j + 1}] is not in the span of the basis")
            probabilistic = probabilistic or decomposition.probabilistic
            for k, c in enumerate(decomposition.coefficients):
                if c:
                    constants[(i, j, k)] = c
                    constants[(j, i, k)] = -c
    return constants, probabilistic


def lie_closure(
    fields: Sequence[VectorField],
    max_dim: Optional[int] = None,
    seed: Optional[int] = None,
) -> Union[VGAlgebra, ExceedsBound]:
    """
    Smallest Lie algebra containing the given vector fields

    Brackets are added until every pairwise bracket lies in the span of the
    current independent basis, or the basis grows beyond max_dim.

    Args:
        fields: Generating vector fields on one chart
        max_dim: Dimension bound (defaults to the configured bound)
        seed: Sampling seed for exp-bearing coefficients

    Returns:
        VGAlgebra on success, ExceedsBound when the bound is exceeded
    """
    fields = [as_vector_field(X) for X in fields]
    max_dim = get_settings().max_dim if max_dim is None else max_dim
    if not fields:
        raise JlieError("lie_closure needs at least one vector field")
    if max_dim < len(fields):
        raise JlieError(f"max_dim {max_dim} is smaller than the number of generators {len(fields)}")
    chart = fields[0].chart

    basis: List[VectorField] = []
    probabilistic = False
    for X in fields:
        if X.is_literal_zero:
            continue
        membership = decompose(X, basis, seed=seed)
        if membership is None:
            basis.append(X)
        else:
            probabilistic = probabilistic or membership.probabilistic

    pending = [(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))]
    while pending:
        i, j = pending.pop(0)
        bracket = lie_bracket(basis[i], basis[j])
        if bracket.is_literal_zero:
            continue
        membership = decompose(bracket, basis, seed=seed)
        if membership is not None:
            probabilistic = probabilistic or membership.probabilistic
            continue
        basis.append(bracket)
        logger.debug("closure gained %s", bracket.to_text())
        if len(basis) > max_dim:
            logger.info("⚠️ closure exceeded max_dim=%d", max_dim)
            return ExceedsBound(max_dim=max_dim, partial_basis=tuple(basis))
        new = len(basis) - 1
        pending.extend((k, new) for k in range(new))

    constants, sampled = structure_constants(basis, seed=seed)
    return VGAlgebra(chart, tuple(basis), constants, probabilistic or sampled)


def riccati_fields(n: int = 1) -> List[VectorField]:
    """
    Coupled Riccati basis sum d_i, sum x_i d_i, sum x_i^2 d_i

    n = 1 gives the scalar Riccati equation on chart ["x"]; otherwise the
    chart is ["x1", ..., "xn"].
    """
    if n < 1:
        raise JlieError("n must be at least 1")
    coords = ("x",) if n == 1 else tuple(f"x{i}" for i in range(1, n + 1))
    chart = Chart(f"riccati_r{n}", coords)
    fields = []
    for template in ("1", "{c}", "{c}^2"):
        fields.append(VectorField.from_list(chart, [template.format(c=c) for c in coords]))
    return fields


# ==================== Hamiltonian Algebras ====================

def is_hamiltonian_algebra(J: JacobiStructure, V: VGAlgebra, max_degree: int) -> List[Optional[Expr]]:
    """Polynomial Hamiltonian per basis element; None marks an inconclusive element, not a disproof"""
    J.require_usable()
    return [solve_hamiltonian(J, X, max_degree) for X in V.basis]


@dataclass(frozen=True)
class FunctionAlgebra:
    """Span of the Hamiltonians h_i and the central elements s_ij with its bracket table"""
    structure: JacobiStructure
    generators: Tuple[Expr, ...]
    names: Tuple[str, ...]
    n_hamiltonians: int
    central: Dict[Tuple[int, int], Expr]
    bracket_table: Dict[Tuple[int, int], Tuple[Fraction, ...]]

    @property
    def hamiltonians(self) -> Tuple[Expr, ...]:
        return self.generators[:self.n_hamiltonians]

    def to_export(self) -> FunctionAlgebraExport:
        constants = {}
        for (u, v), coefficients in sorted(self.bracket_table.items()):
            for w, c in enumerate(coefficients):
                if c:
                    constants[f"{u},{v},{w}"] = str(c)
        return FunctionAlgebraExport(
            chart=list(self.structure.chart.coords),
            generators={name: h.to_text() for name, h in zip(self.names, self.generators)},
            structure_constants=constants,
        )


def build_function_algebra(
    J: JacobiStructure,
    V: VGAlgebra,
    hams: Sequence[Expr],
    seed: Optional[int] = None,
) -> FunctionAlgebra:
    """
    Function Lie algebra of a Jacobi-Lie Hamiltonian system

    Forms s_ij = {h_i, h_j} - sum_k c_ijk h_k, checks that each has zero
    Hamiltonian vector field, and re-expands every bracket of the generators
    h_i, s_ij in their span.

    Raises:
        LengthMismatchError: One Hamiltonian per basis element is required
        NonGoodFunctionError: Some h_i is not a good Hamiltonian function of X_i
        InconsistentAlgebraError: Some s_ij has a nonzero Hamiltonian field or a bracket leaves the span
    """
    J.require_usable()
    hams = list(hams)
    if len(hams) != V.dim:
        raise LengthMismatchError(f"{len(hams)} Hamiltonians for a basis of dimension {V.dim}")

    for i, (X, h) in enumerate(zip(V.basis, hams)):
        pair = hamiltonian_vf(J, h, seed=seed)
        if not pair.good:
            raise NonGoodFunctionError(f"h{i + 1} = {h.to_text()} is not a good Hamiltonian function")
        if not mv_is_zero(pair.field - X, seed=seed).is_zero:
            raise NonGoodFunctionError(f"h{i + 1} = {h.to_text()} is not a Hamiltonian function of X{i + 1}")

    generators: List[Expr] = list(hams)
    names = [f"h{i + 1}" for i in range(len(hams))]
    central: Dict[Tuple[int, int], Expr] = {}
    for i in range(V.dim):
        for j in range(i + 1, V.dim):
            s = jacobi_bracket(J, hams[i], hams[j])
            for k in range(V.dim):
                c = V.constant(i, j, k)
                if c:
                    s = s - hams[k] * c
            s = s.reduced()
            central[(i, j)] = s
            if is_zero(s, seed=seed).is_zero:
                continue
            if not mv_is_zero(hamiltonian_vf(J, s, seed=seed).field, seed=seed).is_zero:
                raise InconsistentAlgebraError(
                    f"s{i + 1}{j + 1} = {s.to_text()} has a nonzero Hamiltonian vector field"
                )
            if decompose(s, generators, seed=seed) is None:
                generators.append(s)
                names.append(f"s{i + 1}{j + 1}")

    table: Dict[Tuple[int, int], Tuple[Fraction, ...]] = {}
    for u in range(len(generators)):
        for v in range(u + 1, len(generators)):
            bracket = jacobi_bracket(J, generators[u], generators[v])
            expansion = decompose(bracket, generators, seed=seed)
            if expansion is None:
                raise InconsistentAlgebraError(
                    f"{{{names[u]}, {names[v]}}} = {bracket.to_text()} is not in the generator span"
                )
            table[(u, v)] = expansion.coefficients

    logger.info("✅ function algebra of dimension %d built", len(generators))
    return FunctionAlgebra(
        structure=J,
        generators=tuple(generators),
        names=tuple(names),
        n_hamiltonians=len(hams),
        central=central,
        bracket_table=table,
    )


def check_constant_of_motion(
    J: JacobiStructure,
    f: Expr,
    A: FunctionAlgebra,
    seed: Optional[int] = None,
) -> bool:
    """True iff {f, h} vanishes for every generator h"""
    J.require_usable()
    for name, h in zip(A.names, A.generators):
        if not is_zero(jacobi_bracket(J, f, h), seed=seed).is_zero:
            logger.debug("{f, %s} is nonzero", name)
            return False
    return True


def reproduces_basis(J: JacobiStructure, A: FunctionAlgebra, V: VGAlgebra, seed: Optional[int] = None) -> bool:
    """True iff X_{h_i} equals the i-th basis element for every Hamiltonian h_i"""
    if len(A.hamiltonians) != V.dim:
        return False
    return all(
        mv_is_zero(hamiltonian_vf(J, h, seed=seed).field - X, seed=seed).is_zero
        for h, X in zip(A.hamiltonians, V.basis)
    )


# ==================== t-Dependent Objects ====================

def _time_exprs(b: Sequence[Union[Expr, str, int, Fraction]]) -> Tuple[Expr, ...]:
    out = []
    for value in b:
        if isinstance(value, Expr):
            out.append(value)
        elif isinstance(value, str):
            out.append(parse_expr(value, TIME_CHART))
        else:
            out.append(Expr.constant(TIME_CHART, value))
    return tuple(out)


def _time_value(expr: Expr, tau: Union[int, Fraction, float]) -> Fraction:
    value = evaluate(expr, {"t": tau})
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class TDepVectorField:
    """X_t = sum_i b_i(t) X_i"""
    algebra: VGAlgebra
    coefficients: Tuple[Expr, ...]

    @property
    def chart(self) -> Chart:
        return self.algebra.chart

    def at(self, tau: Union[int, Fraction, float]) -> VectorField:
        """Frozen field at time tau"""
        values = [_time_value(b, tau) for b in self.coefficients]
        return as_vector_field(linear_combination(self.algebra.basis, values))


@dataclass(frozen=True)
class TDepHamiltonian:
    """h_t = sum_i b_i(t) h_i"""
    algebra: FunctionAlgebra
    coefficients: Tuple[Expr, ...]

    def at(self, tau: Union[int, Fraction, float]) -> Expr:
        total = Expr.zero(self.algebra.structure.chart)
        for b, h in zip(self.coefficients, self.algebra.hamiltonians):
            total = total + h * _time_value(b, tau)
        return total


def assemble_tdvf(V: VGAlgebra, b: Sequence[Union[Expr, str, int, Fraction]]) -> TDepVectorField:
    """Bundle a VG algebra with t-dependent coefficients b_i(t)"""
    if len(b) != V.dim:
        raise LengthMismatchError(f"{len(b)} coefficients for a basis of dimension {V.dim}")
    return TDepVectorField(V, _time_exprs(b))


def assemble_hamiltonian(A: FunctionAlgebra, b: Sequence[Union[Expr, str, int, Fraction]]) -> TDepHamiltonian:
    """t-dependent Hamiltonian over the Hamiltonians h_i of a function algebra"""
    if len(b) != A.n_hamiltonians:
        raise LengthMismatchError(f"{len(b)} coefficients for {A.n_hamiltonians} Hamiltonians")
    return TDepHamiltonian(A, _time_exprs(b))


def check_admits_hamiltonian(
    J: JacobiStructure,
    X: TDepVectorField,
    h: TDepHamiltonian,
    times: Sequence[Union[int, Fraction, float]],
    seed: Optional[int] = None,
) -> bool:
    """True iff X_{h_tau} = X_tau at every sample time"""
    for tau in times:
        field_at = hamiltonian_vf(J, h.at(tau), seed=seed).field
        if not mv_is_zero(field_at - X.at(tau), seed=seed).is_zero:
            logger.debug("h_t fails to generate X_t at t=%s", tau)
            return False
    return True
