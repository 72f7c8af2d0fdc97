"""
Multivector Fields
Wedge product, Schouten-Nijenhuis bracket, Lie bracket and the musical map of a bivector
"""

import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

from .errors import ChartMismatchError, DegreeError, JlieError
from .models import ZeroStatus
from .scalar import Chart, Expr, Number, evaluate, is_zero as expr_is_zero, parse_expr
from .schemas import MultivectorForm, ZeroVerdict

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]
Terms = Dict[Key, sympy.Expr]


# ==================== Index Helpers ====================

def _sort_key(indices: Sequence[int]) -> Optional[Tuple[int, Key]]:
    """Sign of the sorting permutation and the sorted key; None on a repeated index"""
    if len(set(indices)) != len(indices):
        return None
    items = list(indices)
    sign = 1
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                sign = -sign
    return sign, tuple(items)


def _accumulate(terms: Terms, indices: Sequence[int], coefficient: sympy.Expr) -> None:
    sorted_key = _sort_key(indices)
    if sorted_key is None or coefficient == 0:
        return
    sign, key = sorted_key
    terms[key] = terms.get(key, sympy.Integer(0)) + sign * coefficient


def _parse_key(text: str, degree: int, dim: int) -> Key:
    if degree == 0:
        if text.strip():
            raise DegreeError(f"degree-0 form expects the empty key, got '{text}'")
        return ()
    try:
        key = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise DegreeError(f"malformed component key '{text}'") from None
    _check_key(key, degree, dim)
    return key


def _check_key(key: Key, degree: int, dim: int) -> None:
    if len(key) != degree:
        raise DegreeError(f"key {key} has length {len(key)}, expected {degree}")
    if any(b <= a for a, b in zip(key, key[1:])):
        raise DegreeError(f"key {key} is not strictly increasing")
    if any(i < 0 or i >= dim for i in key):
        raise DegreeError(f"key {key} has an index outside 0..{dim - 1}")


def _check_chart(*items) -> Chart:
    chart = items[0].chart
    for item in items[1:]:
        if item.chart != chart:
            raise ChartMismatchError(
                f"operands live on charts '{chart.name}' and '{item.chart.name}'"
            )
    return chart


# ==================== Multivector ====================

@dataclass(frozen=True, eq=False)
class Multivector:
    """
    Sparse k-vector field on a chart

    Components map strictly increasing index tuples to Expr coefficients;
    absent keys are zero. Degree 0 holds a single function under the key ().
    """
    chart: Chart
    degree: int
    components: Mapping[Key, Expr]

    def __post_init__(self):
        if self.degree < 0:
            raise DegreeError(f"negative degree {self.degree}")
        cleaned: Dict[Key, Expr] = {}
        for key, value in self.components.items():
            key = tuple(key)
            _check_key(key, self.degree, self.chart.dim)
            if value.chart != self.chart:
                raise ChartMismatchError("component lives on a different chart")
            value = value.reduced()
            if not value.is_literal_zero:
                cleaned[key] = value
        object.__setattr__(self, "components", MappingProxyType(dict(sorted(cleaned.items()))))

    # ---------- constructors ----------

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "Multivector":
        return _build(chart, degree, {})

    @classmethod
    def function(cls, f: Expr) -> "Multivector":
        return cls(f.chart, 0, {(): f})

    @classmethod
    def from_form(cls, chart: Chart, form: Union[MultivectorForm, dict]) -> "Multivector":
        """Build from the JSON form {"degree": k, "components": {"i,j": "<expr>"}}"""
        if not isinstance(form, MultivectorForm):
            form = MultivectorForm.model_validate(form)
        if form.degree > chart.dim and form.components:
            logger.debug("degree %d exceeds chart dimension, components ignored", form.degree)
            return cls.zero(chart, form.degree)
        components = {
            _parse_key(key, form.degree, chart.dim): parse_expr(text, chart)
            for key, text in form.components.items()
        }
        return _build_exprs(chart, form.degree, components)

    def to_form(self) -> MultivectorForm:
        return MultivectorForm(
            degree=self.degree,
            components={",".join(str(i) for i in key): value.to_text()
                        for key, value in self.components.items()},
        )

    # ---------- structure ----------

    @property
    def is_literal_zero(self) -> bool:
        return not self.components

    def coefficient(self, *indices: int) -> Expr:
        sorted_key = _sort_key(indices)
        if sorted_key is None:
            return Expr.zero(self.chart)
        sign, key = sorted_key
        value = self.components.get(key)
        if value is None:
            return Expr.zero(self.chart)
        return value if sign > 0 else -value

    def _terms(self) -> Terms:
        return {key: value.evaluated for key, value in self.components.items()}

    def to_text(self) -> str:
        if not self.components:
            return "0"
        if self.degree == 0:
            return self.components[()].to_text()
        pieces = []
        for key, value in self.components.items():
            basis = "^".join(f"d{self.chart.coords[i]}" for i in key)
            text = value.to_text()
            if text in ("1", "-1"):
                pieces.append(f"{text[:-1]}{basis}")
                continue
            if any(op in text.lstrip("-") for op in ("+", " - ", "/")):
                text = f"({text})"
            pieces.append(f"{text} * {basis}")
        out = pieces[0]
        for piece in pieces[1:]:
            out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return out

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_text()!r}, degree={self.degree})"

    # ---------- arithmetic ----------

    def __add__(self, other: "Multivector") -> "Multivector":
        chart = _check_chart(self, other)
        if other.degree != self.degree:
            raise DegreeError(f"cannot add degrees {self.degree} and {other.degree}")
        terms = self._terms()
        for key, value in other._terms().items():
            terms[key] = terms.get(key, sympy.Integer(0)) + value
        return _build(chart, self.degree, terms)

    def __neg__(self) -> "Multivector":
        return _build(self.chart, self.degree, {k: -v for k, v in self._terms().items()})

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def scale(self, factor: Union[Expr, int, sympy.Rational]) -> "Multivector":
        """Multiply every component by a function or rational constant"""
        if isinstance(factor, Expr):
            _check_chart(self, factor)
            value = factor.evaluated
        else:
            value = Expr.constant(self.chart, factor).raw
        return _build(self.chart, self.degree, {k: v * value for k, v in self._terms().items()})

    def __mul__(self, factor):
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multivector):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.degree == other.degree
            and dict(self.components) == dict(other.components)
        )

    def __hash__(self) -> int:
        return hash((self.chart, self.degree, tuple(self.components.items())))


class VectorField(Multivector):
    """Degree-1 multivector"""

    def __post_init__(self):
        if self.degree != 1:
            raise DegreeError(f"vector field must have degree 1, got {self.degree}")
        super().__post_init__()

    @classmethod
    def from_list(cls, chart: Chart, coefficients: Sequence[Union[Expr, str]]) -> "VectorField":
        """Vector field from one coefficient per coordinate (Expr or expression text)"""
        if len(coefficients) != chart.dim:
            raise DegreeError(
                f"expected {chart.dim} coefficients on chart '{chart.name}', got {len(coefficients)}"
            )
        components = {}
        for i, value in enumerate(coefficients):
            if isinstance(value, str):
                value = parse_expr(value, chart)
            components[(i,)] = value
        return cls(chart, 1, components)

    @classmethod
    def partial(cls, chart: Chart, coord: str) -> "VectorField":
        """Coordinate field d/d(coord)"""
        return cls(chart, 1, {(chart.index(coord),): Expr.constant(chart, 1)})

    def component(self, i: int) -> Expr:
        return self.coefficient(i)

    def as_list(self) -> List[Expr]:
        return [self.component(i) for i in range(self.chart.dim)]


def _build(chart: Chart, degree: int, terms: Terms) -> Multivector:
    if degree > chart.dim:
        terms = {}
    components = {key: Expr(chart, value) for key, value in terms.items() if value != 0}
    if degree == 1:
        return VectorField(chart, 1, components)
    return Multivector(chart, degree, components)


def _build_exprs(chart: Chart, degree: int, components: Mapping[Key, Expr]) -> Multivector:
    if degree == 1:
        return VectorField(chart, 1, components)
    return Multivector(chart, degree, components)


def as_vector_field(P: Multivector) -> VectorField:
    if isinstance(P, VectorField):
        return P
    if P.degree != 1:
        raise DegreeError(f"expected a vector field, got degree {P.degree}")
    return VectorField(P.chart, 1, dict(P.components))


# ==================== Exterior Algebra ====================

def _wedge_terms(left: Terms, right: Terms) -> Terms:
    result: Terms = {}
    for I, a in left.items():
        for J, b in right.items():
            _accumulate(result, I + J, a * b)
    return result


def wedge(P: Multivector, Q: Multivector) -> Multivector:
    """
    Wedge product P ^ Q

    Degree-0 factors act by multiplication. A result of degree above the
    chart dimension is the zero object.
    """
    chart = _check_chart(P, Q)
    degree = P.degree + Q.degree
    if degree > chart.dim:
        return Multivector.zero(chart, degree)
    return _build(chart, degree, _wedge_terms(P._terms(), Q._terms()))


# ==================== Brackets ====================

def _field_bracket(chart: Chart, f: sympy.Expr, k: int, g: sympy.Expr, l: int) -> Terms:
    """[f d_k, g d_l] = f (d_k g) d_l - g (d_l f) d_k"""
    symbols = chart.symbols
    terms: Terms = {}
    _accumulate(terms, (l,), f * sympy.diff(g, symbols[k]))
    _accumulate(terms, (k,), -g * sympy.diff(f, symbols[l]))
    return terms


def _bracket_with_function(chart: Chart, terms: Terms, f: sympy.Expr, degree: int) -> Terms:
    """[P, f]: contraction of df into the first slot of P"""
    symbols = chart.symbols
    result: Terms = {}
    for key, a in terms.items():
        for position, index in enumerate(key):
            sign = 1 if position % 2 == 0 else -1
            rest = key[:position] + key[position + 1:]
            _accumulate(result, rest, sign * a * sympy.diff(f, symbols[index]))
    return result


def schouten_nijenhuis(P: Multivector, Q: Multivector) -> Multivector:
    """
    Schouten-Nijenhuis bracket [P, Q]

    For decomposable arguments
    [X1^...^Xp, Y1^...^Yq] = (-1)^(p+1) sum_ij (-1)^(i+j) [Xi,Yj] ^ X1..^Xi..Xp ^ Y1..^Yj..Yq,
    extended bilinearly. With a function argument, [P, f] contracts df into the
    first slot of P, so [L, f] = sharp(L, f) and [X, f] = X(f); [f, Q] = [Q, f].
    The bracket is graded symmetric as [P, Q] = (-1)^(pq) [Q, P].

    Raises:
        ChartMismatchError: P and Q live on different charts
    """
    chart = _check_chart(P, Q)
    p, q = P.degree, Q.degree
    degree = max(p + q - 1, 0)
    if p == 0 and q == 0:
        return Multivector.zero(chart, 0)
    if degree > chart.dim:
        return Multivector.zero(chart, degree)

    if q == 0:
        f = Q.coefficient().evaluated
        return _build(chart, degree, _bracket_with_function(chart, P._terms(), f, p))
    if p == 0:
        f = P.coefficient().evaluated
        return _build(chart, degree, _bracket_with_function(chart, Q._terms(), f, q))

    one = sympy.Integer(1)
    outer = 1 if (p + 1) % 2 == 0 else -1
    result: Terms = {}
    for I, a in P._terms().items():
        xs = [(a, I[0])] + [(one, i) for i in I[1:]]
        for J, b in Q._terms().items():
            ys = [(b, J[0])] + [(one, j) for j in J[1:]]
            for i, (f, k) in enumerate(xs):
                for j, (g, l) in enumerate(ys):
                    bracket = _field_bracket(chart, f, k, g, l)
                    if not bracket:
                        continue
                    rest_x = [xs[m] for m in range(p) if m != i]
                    rest_y = [ys[n] for n in range(q) if n != j]
                    coefficient = sympy.Integer(outer * (1 if (i + j) % 2 == 0 else -1))
                    indices: List[int] = []
                    for c, index in rest_x + rest_y:
                        coefficient = coefficient * c
                        indices.append(index)
                    rest_terms: Terms = {}
                    _accumulate(rest_terms, indices, coefficient)
                    if not rest_terms:
                        continue
                    for key, value in _wedge_terms(bracket, rest_terms).items():
                        result[key] = result.get(key, sympy.Integer(0)) + value
    return _build(chart, degree, result)


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Commutator [X, Y] = X o Y - Y o X of two vector fields"""
    chart = _check_chart(X, Y)
    if X.degree != 1 or Y.degree != 1:
        raise DegreeError("lie_bracket expects two vector fields")
    symbols = chart.symbols
    x = X.as_list() if isinstance(X, VectorField) else as_vector_field(X).as_list()
    y = Y.as_list() if isinstance(Y, VectorField) else as_vector_field(Y).as_list()
    terms: Terms = {}
    for l in range(chart.dim):
        value = sympy.Integer(0)
        for k in range(chart.dim):
            value += x[k].evaluated * sympy.diff(y[l].evaluated, symbols[k])
            value -= y[k].evaluated * sympy.diff(x[l].evaluated, symbols[k])
        terms[(l,)] = value
    return _build(chart, 1, terms)


# ==================== Musical Map and Derivations ====================

def sharp(bivector: Multivector, f: Expr) -> VectorField:
    """
    Image of df under the bivector: sum_{i<j} L^ij ((d_i f) d_j - (d_j f) d_i)

    Raises:
        DegreeError: bivector is not of degree 2
        ChartMismatchError: f lives on another chart
    """
    if bivector.degree != 2:
        raise DegreeError(f"sharp expects a bivector, got degree {bivector.degree}")
    chart = _check_chart(bivector, f)
    symbols = chart.symbols
    value = f.evaluated
    terms: Terms = {}
    for (i, j), coefficient in bivector._terms().items():
        _accumulate(terms, (j,), coefficient * sympy.diff(value, symbols[i]))
        _accumulate(terms, (i,), -coefficient * sympy.diff(value, symbols[j]))
    return _build(chart, 1, terms)


def apply(X: VectorField, f: Expr) -> Expr:
    """X(f) = sum_i X^i d_i f"""
    chart = _check_chart(X, f)
    if X.degree != 1:
        raise DegreeError(f"apply expects a vector field, got degree {X.degree}")
    value = f.evaluated
    total = sympy.Integer(0)
    for (i,), coefficient in X._terms().items():
        total += coefficient * sympy.diff(value, chart.symbols[i])
    return Expr(chart, total).reduced()


def contract(bivector: Multivector, f: Expr, g: Expr) -> Expr:
    """L(df, dg)"""
    return apply(sharp(bivector, f), g)


# ==================== Zero Tests and Evaluation ====================

def is_zero(P: Multivector, seed: Optional[int] = None) -> ZeroVerdict:
    """
    Fold per-component zero verdicts into one

    A nonzero component decides the result. Otherwise the weakest certainty
    among the components is reported.
    """
    probable: Optional[ZeroVerdict] = None
    for key, value in P.components.items():
        verdict = expr_is_zero(value, seed=seed)
        if not verdict.is_zero:
            logger.debug("component %s of %s is nonzero", key, P.to_text())
            return verdict
        if not verdict.is_proven:
            probable = verdict
    return probable or ZeroVerdict(status=ZeroStatus.PROVEN_ZERO)


def evaluate_at(X: VectorField, point: Mapping[str, Number]) -> Tuple[Union[Number, float], ...]:
    """Numeric components of a vector field at a point"""
    return tuple(evaluate(c, point) for c in as_vector_field(X).as_list())


def linear_combination(basis: Sequence[Multivector], coefficients: Iterable) -> Multivector:
    """sum_i c_i P_i with rational constants c_i"""
    basis = list(basis)
    coefficients = list(coefficients)
    if not basis:
        raise JlieError("empty basis")
    if len(basis) != len(coefficients):
        raise DegreeError("coefficient count does not match the basis")
    total = Multivector.zero(basis[0].chart, basis[0].degree)
    for P, c in zip(basis, coefficients):
        if c != 0:
            total = total + P.scale(c)
    return total
