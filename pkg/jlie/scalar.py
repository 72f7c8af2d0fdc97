"""
Scalar Expressions on a Coordinate Chart
Parsing, differentiation, canonical forms, zero-testing and evaluation.
sympy supplies the expression trees and the exact rational-function arithmetic.
"""

import logging
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import List, Mapping, Optional, Tuple, Union

import mpmath
import sympy
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from .config import get_settings
from .errors import (
    ChartError, ChartMismatchError, EvaluationError, ExprSyntaxError,
    MissingCoordinateError, NonPolynomialError, PoleError, UnknownIdentifierError
)
from .models import ZeroStatus
from .schemas import ZeroVerdict

logger = logging.getLogger(__name__)

Number = Union[int, Fraction, float]
Scalar = Union["Expr", int, Fraction, sympy.Rational]

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = frozenset({"exp"})


# ==================== Chart ====================

@dataclass(frozen=True)
class Chart:
    """Named local coordinate system"""
    name: str
    coords: Tuple[str, ...]
    annotation: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise ChartError(f"chart '{self.name}' needs at least one coordinate")
        for coord in coords:
            if not _IDENTIFIER.match(coord) or coord in _RESERVED:
                raise ChartError(f"invalid coordinate name '{coord}'")
        if len(set(coords)) != len(coords):
            raise ChartError(f"duplicate coordinate names in {list(coords)}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @cached_property
    def symbols(self) -> Tuple[sympy.Symbol, ...]:
        return tuple(sympy.Symbol(coord, real=True) for coord in self.coords)

    def index(self, coord: str) -> int:
        try:
            return self.coords.index(coord)
        except ValueError:
            raise UnknownIdentifierError(coord) from None

    def symbol(self, coord: str) -> sympy.Symbol:
        return self.symbols[self.index(coord)]


def _evaluated(node: sympy.Basic) -> sympy.Basic:
    """Rebuild a possibly unevaluated tree with evaluation switched on"""
    if not node.args:
        return node
    return node.func(*(_evaluated(arg) for arg in node.args))


# ==================== Expr ====================

@dataclass(frozen=True, eq=False)
class Expr:
    """
    Immutable scalar function on a chart

    `raw` is the tree as built (parsed expressions keep their unevaluated
    shape); `evaluated` is the same tree with sympy's automatic evaluation.
    """
    chart: Chart
    raw: sympy.Expr

    def __post_init__(self):
        if self.raw.has(sympy.zoo, sympy.nan, sympy.oo):
            raise PoleError("division by the zero constant")
        unknown = self.raw.free_symbols - set(self.chart.symbols)
        if unknown:
            raise UnknownIdentifierError(sorted(str(s) for s in unknown)[0])

    # ---------- constructors ----------

    @classmethod
    def constant(cls, chart: Chart, value: Union[int, Fraction, sympy.Rational]) -> "Expr":
        return cls(chart, _as_rational(value))

    @classmethod
    def zero(cls, chart: Chart) -> "Expr":
        return cls(chart, sympy.Integer(0))

    @classmethod
    def coordinate(cls, chart: Chart, coord: str) -> "Expr":
        return cls(chart, chart.symbol(coord))

    # ---------- structure ----------

    @cached_property
    def evaluated(self) -> sympy.Expr:
        return _evaluated(self.raw)

    @cached_property
    def has_exp(self) -> bool:
        return self.raw.has(sympy.exp) or self.raw.has(sympy.E)

    @cached_property
    def canonical(self) -> Tuple[sympy.Poly, sympy.Poly]:
        """Reduced (numerator, denominator) pair; denominator has grlex leading coefficient 1"""
        if self.has_exp:
            raise NonPolynomialError("canonical form is only defined for exp-free expressions")
        symbols = self.chart.symbols
        num, den = sympy.fraction(sympy.cancel(self.evaluated))
        p = sympy.Poly(num, *symbols, domain=sympy.QQ)
        q = sympy.Poly(den, *symbols, domain=sympy.QQ)
        lead = q.LC(order="grlex")
        if lead != 1:
            p = p.quo_ground(lead)
            q = q.quo_ground(lead)
        return p, q

    @cached_property
    def canonical_key(self) -> tuple:
        p, q = self.canonical
        return tuple(p.terms(order="grlex")), tuple(q.terms(order="grlex"))

    @property
    def is_polynomial(self) -> bool:
        return not self.has_exp and self.canonical[1].is_one

    @property
    def is_literal_zero(self) -> bool:
        return self.evaluated == 0

    def reduced(self) -> "Expr":
        """Normalised copy used for stored multivector components"""
        return Expr(self.chart, sympy.cancel(self.evaluated))

    def to_text(self) -> str:
        if not self.has_exp:
            p, q = self.canonical
            names = self.chart.coords
            if q.is_one:
                return _format_poly(p, names)
            return f"({_format_poly(p, names)})/({_format_poly(q, names)})"
        return _GrammarPrinter().doprint(self.evaluated)

    @property
    def source_text(self) -> str:
        """Uncancelled text, as written up to evaluation; used in pole messages"""
        return _GrammarPrinter().doprint(self.evaluated)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Expr({self.to_text()!r} on {self.chart.name})"

    # ---------- arithmetic ----------

    def _coerce(self, other: Scalar) -> sympy.Expr:
        if isinstance(other, Expr):
            if other.chart != self.chart:
                raise ChartMismatchError(
                    f"expressions live on charts '{self.chart.name}' and '{other.chart.name}'"
                )
            return other.raw
        return _as_rational(other)

    def __add__(self, other: Scalar) -> "Expr":
        return Expr(self.chart, self.raw + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "Expr":
        return Expr(self.chart, self.raw - self._coerce(other))

    def __rsub__(self, other: Scalar) -> "Expr":
        return Expr(self.chart, self._coerce(other) - self.raw)

    def __mul__(self, other: Scalar) -> "Expr":
        return Expr(self.chart, self.raw * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "Expr":
        divisor = self._coerce(other)
        if _evaluated(divisor) == 0:
            raise PoleError("division by the zero constant")
        return Expr(self.chart, self.raw / divisor)

    def __rtruediv__(self, other: Scalar) -> "Expr":
        if self.is_literal_zero:
            raise PoleError("division by the zero constant")
        return Expr(self.chart, self._coerce(other) / self.raw)

    def __pow__(self, exponent: int) -> "Expr":
        if not isinstance(exponent, int):
            raise TypeError("only integer exponents are supported")
        if exponent < 0 and self.is_literal_zero:
            raise PoleError("negative power of the zero constant")
        return Expr(self.chart, self.raw ** exponent)

    def __neg__(self) -> "Expr":
        return Expr(self.chart, -self.raw)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Expr) or other.chart != self.chart:
            return NotImplemented
        if self.has_exp or other.has_exp:
            return self.evaluated == other.evaluated
        return self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        if self.has_exp:
            return hash((self.chart, self.evaluated))
        return hash((self.chart, self.canonical_key))

    # ---------- numerics ----------

    @cached_property
    def _mp_function(self):
        return sympy.lambdify(self.chart.symbols, self.raw, modules="mpmath")


def _as_rational(value) -> sympy.Rational:
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational constant expected, got {value!r}")
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(value, (int, sympy.Rational)):
        return sympy.Rational(value)
    raise TypeError(f"cannot use {value!r} as an expression constant")


# ==================== Printing ====================

def _format_poly(poly: sympy.Poly, names: Tuple[str, ...]) -> str:
    """Graded-lex canonical printing of one polynomial"""
    if poly.is_zero:
        return "0"
    pieces: List[str] = []
    for monom, coeff in poly.terms(order="grlex"):
        factors = [
            name if power == 1 else f"{name}^{power}"
            for name, power in zip(names, monom) if power
        ]
        mono = "*".join(factors)
        if not mono:
            pieces.append(str(coeff))
        elif coeff == 1:
            pieces.append(mono)
        elif coeff == -1:
            pieces.append(f"-{mono}")
        else:
            pieces.append(f"{coeff}*{mono}")
    text = pieces[0]
    for piece in pieces[1:]:
        text += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return text


class _GrammarPrinter(StrPrinter):
    """StrPrinter emitting '^' powers and exp(1) so output re-parses"""

    def _print_Pow(self, expr, rational=False):
        base, exponent = expr.args
        if exponent.is_Integer:
            if exponent < 0:
                return f"1/({self._print(sympy.Pow(base, -exponent, evaluate=False))})"
            if exponent == 1:
                return self._print(base)
            return f"{self.parenthesize(base, PRECEDENCE['Pow'], strict=True)}^{exponent}"
        return super()._print_Pow(expr, rational=rational)

    def _print_Exp1(self, expr):
        return "exp(1)"


# ==================== Parsing ====================

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    end = len(text)
    while pos < end:
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            start = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character '{text[start]}'", start)
        kind = match.lastgroup
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser for the expression grammar"""

    def __init__(self, text: str, chart: Chart):
        self.tokens = _tokenize(text)
        self.index = 0
        self.chart = chart
        self.names = dict(zip(chart.coords, chart.symbols))

    @property
    def tok(self) -> _Token:
        return self.tokens[self.index]

    def peek(self, offset: int) -> _Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.index += 1
            return True
        return False

    def expect(self, op: str) -> None:
        if not self.accept(op):
            found = self.tok.text or "end of input"
            raise ExprSyntaxError(f"expected '{op}' but found '{found}'", self.tok.pos)

    def parse(self) -> sympy.Expr:
        if self.tok.kind == "end":
            raise ExprSyntaxError("empty expression", 0)
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(f"unexpected token '{self.tok.text}'", self.tok.pos)
        return node

    def expr(self) -> sympy.Expr:
        node = self.term()
        while True:
            if self.accept("+"):
                node = sympy.Add(node, self.term(), evaluate=False)
            elif self.accept("-"):
                rhs = self.term()
                node = sympy.Add(node, sympy.Mul(sympy.Integer(-1), rhs, evaluate=False), evaluate=False)
            else:
                return node

    def term(self) -> sympy.Expr:
        node = self.factor()
        while True:
            if self.accept("*"):
                node = sympy.Mul(node, self.factor(), evaluate=False)
            elif self.tok.kind == "op" and self.tok.text == "/":
                pos = self.tok.pos
                self.index += 1
                divisor = self.factor()
                if divisor.is_Number and divisor == 0:
                    raise ExprSyntaxError("division by the zero constant", pos)
                node = sympy.Mul(node, sympy.Pow(divisor, -1, evaluate=False), evaluate=False)
            else:
                return node

    def factor(self) -> sympy.Expr:
        negate = self.accept("-")
        node = self.atom()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            if self.tok.kind != "int":
                raise ExprSyntaxError("integer exponent expected", self.tok.pos)
            exponent = sign * int(self.tok.text)
            if exponent < 0 and node.is_Number and node == 0:
                raise ExprSyntaxError("negative power of the zero constant", self.tok.pos)
            self.index += 1
            node = sympy.Pow(node, sympy.Integer(exponent), evaluate=False)
        if negate:
            node = sympy.Mul(sympy.Integer(-1), node, evaluate=False)
        return node

    def atom(self) -> sympy.Expr:
        tok = self.tok
        if tok.kind == "int":
            self.index += 1
            # rational literal p/q unless the denominator is raised to a power
            if (self.tok.kind == "op" and self.tok.text == "/" and self.peek(1).kind == "int"
                    and not (self.peek(2).kind == "op" and self.peek(2).text == "^")):
                den = self.peek(1)
                if int(den.text) == 0:
                    raise ExprSyntaxError("division by the zero constant", self.tok.pos)
                self.index += 2
                return sympy.Rational(int(tok.text), int(den.text))
            return sympy.Integer(int(tok.text))
        if tok.kind == "ident":
            self.index += 1
            if tok.text == "exp":
                self.expect("(")
                argument = self.expr()
                self.expect(")")
                return sympy.exp(argument, evaluate=False)
            if tok.text not in self.names:
                raise UnknownIdentifierError(tok.text, tok.pos)
            return self.names[tok.text]
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected token '{found}'", tok.pos)


# ==================== Operations ====================

def parse_expr(text: str, chart: Chart) -> Expr:
    """
    Parse expression text on a chart

    Args:
        text: Expression conforming to the grammar (rationals, coordinates,
            + - * /, integer powers, exp)
        chart: Chart whose coordinates may appear

    Returns:
        Expr: Parsed expression, keeping the tree as written

    Raises:
        ExprSyntaxError: Text does not conform to the grammar
        UnknownIdentifierError: Identifier is not a chart coordinate
    """
    return Expr(chart, _Parser(text, chart).parse())


def differentiate(f: Expr, coord: str) -> Expr:
    """Exact partial derivative with respect to a chart coordinate"""
    symbol = f.chart.symbol(coord)
    return Expr(f.chart, sympy.diff(f.evaluated, symbol))


def _sample_point(rng: random.Random, chart: Chart, box: int) -> List[Fraction]:
    point = []
    for _ in chart.coords:
        den = rng.randint(1, 8)
        point.append(Fraction(rng.randint(-box * den, box * den), den))
    return point


def is_zero(
    f: Expr,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> ZeroVerdict:
    """
    Decide whether an expression is identically zero

    Exp-free expressions are decided exactly from the canonical form.
    Expressions containing exp are sampled at seeded random rational points
    with high-precision arithmetic; poles are skipped and resampled.

    Args:
        f: Expression to test
        seed: Sampling seed (defaults to the configured seed)
        samples: Number of pole-free points (at least the configured minimum)
        tolerance: Absolute tolerance for a sample to count as zero

    Returns:
        ZeroVerdict: Proven status on the exact path, probable otherwise

    Raises:
        EvaluationError: Resample budget exhausted before enough pole-free points
    """
    if not f.has_exp:
        numerator, _ = f.canonical
        status = ZeroStatus.PROVEN_ZERO if numerator.is_zero else ZeroStatus.PROVEN_NONZERO
        return ZeroVerdict(status=status)

    settings = get_settings()
    seed = settings.seed if seed is None else seed
    samples = max(samples or settings.zero_samples, settings.zero_samples)
    tolerance = settings.zero_tolerance if tolerance is None else tolerance
    rng = random.Random(seed)
    function = f._mp_function

    hits = 0
    attempts = 0
    with mpmath.workprec(settings.zero_precision_bits):
        while hits < samples:
            if attempts >= settings.resample_budget:
                raise EvaluationError(
                    f"only {hits} of {samples} sample points avoided poles of {f.to_text()}"
                )
            attempts += 1
            point = _sample_point(rng, f.chart, settings.sample_box)
            args = [mpmath.mpf(p.numerator) / p.denominator for p in point]
            try:
                value = function(*args)
            except (ZeroDivisionError, OverflowError, ValueError):
                logger.debug("⚠️ pole hit while sampling %s, resampling", f.to_text())
                continue
            if not mpmath.isfinite(value):
                continue
            hits += 1
            if abs(value) > tolerance:
                witness = {c: str(p) for c, p in zip(f.chart.coords, point)}
                return ZeroVerdict(
                    status=ZeroStatus.PROBABLY_NONZERO,
                    n_samples=hits,
                    tolerance=tolerance,
                    witness=witness,
                )
    return ZeroVerdict(status=ZeroStatus.PROBABLY_ZERO, n_samples=samples, tolerance=tolerance)


def evaluate(f: Expr, point: Mapping[str, Number]) -> Union[Fraction, float]:
    """
    Evaluate an expression at a point

    Args:
        f: Expression
        point: Value for every chart coordinate

    Returns:
        Fraction for rational points on exp-free expressions, float otherwise

    Raises:
        MissingCoordinateError: A coordinate has no value
        PoleError: A denominator vanishes at the point
    """
    missing = [c for c in f.chart.coords if c not in point]
    if missing:
        raise MissingCoordinateError(f"no value for coordinate(s) {missing}")
    values = [point[c] for c in f.chart.coords]

    exact = not f.has_exp and all(
        isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values
    )
    if exact:
        mapping = {s: _as_rational(v) for s, v in zip(f.chart.symbols, values)}
        if sympy.fraction(sympy.together(f.evaluated))[1].xreplace(mapping) == 0:
            raise PoleError(f"pole of {f.source_text} at {dict(point)}")
        p, q = f.canonical
        den = q.as_expr().xreplace(mapping)
        value = sympy.Rational(p.as_expr().xreplace(mapping)) / den
        return Fraction(int(value.p), int(value.q))

    try:
        result = f._mp_function(*[mpmath.mpf(float(v)) for v in values])
    except ZeroDivisionError:
        raise PoleError(f"pole of {f.source_text} at {dict(point)}") from None
    result = float(result)
    if result != result or result in (float("inf"), float("-inf")):
        raise PoleError(f"non-finite value of {f.source_text} at {dict(point)}")
    return result
