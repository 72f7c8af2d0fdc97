"""
Planar Classification Registry
Table of finite-dimensional Lie algebras of planar vector fields and the
Prop-1 / Prop-2 obstruction detectors for Jacobi structures with L != 0 and R != 0
"""

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

from pydantic import ValidationError

from .config import get_settings
from .errors import (
    ChartError, ClosureError, ExcludedAlphaError, JlieError, MalformedWitnessError,
    ManifestError, ParameterRangeError, UnknownClassError
)
from .jacobi import check_jacobi, check_poisson
from .liesys import ExceedsBound, VGAlgebra, is_hamiltonian_algebra, lie_closure
from .models import CheckVerdict, Certainty, ObstructionStatus, TableVerdict, WitnessKind
from .multivec import (
    Multivector, VectorField, is_zero as mv_is_zero, lie_bracket, linear_combination, wedge
)
from .scalar import Chart, evaluate, parse_expr
from .schemas import (
    Certificate, CheckResult, ObstructionVerdict, RegistryEntry, TableReport, WitnessSpec
)

logger = logging.getLogger(__name__)

PLANE = Chart("plane", ("x", "y"))
PARAM_CHART = Chart("param", ("r",))

ParamValue = Union[str, int, Fraction]
Witness = Sequence[Union[Mapping[Union[int, str], ParamValue], Sequence[ParamValue]]]

CONSTRAINTS: Dict[str, Tuple[Callable[[Fraction], bool], str]] = {
    "any": (lambda v: True, "any rational"),
    "nonnegative": (lambda v: v >= 0, ">= 0"),
    "positive": (lambda v: v >= 1, ">= 1"),
    "nonzero_abs_le_1": (lambda v: v != 0 and abs(v) <= 1, "0 < |value| <= 1"),
}

PROP1_SCOPE = "no Jacobi structure with Lambda != 0 and R != 0 makes this algebra Hamiltonian (Prop-1 hypotheses)"
PROP2_SCOPE = "no planar Jacobi structure with Lambda != 0 and R != 0 makes this algebra Hamiltonian (Prop-2 hypotheses)"


# ==================== Registry Loading ====================

@lru_cache(maxsize=4)
def _read_registry(path: str) -> Tuple[RegistryEntry, ...]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = tuple(RegistryEntry.model_validate(item) for item in raw)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise ManifestError(f"cannot load registry {path}: {exc}") from exc
    ids = [entry.id for entry in entries]
    if len(set(ids)) != len(ids):
        raise ManifestError(f"duplicate class ids in registry {path}")
    return entries


_verified_paths: Set[Path] = set()
_verify_lock = threading.Lock()


def load_registry(path: Optional[Union[str, Path]] = None, verify: Optional[bool] = None) -> Dict[str, RegistryEntry]:
    """
    Load the classification registry

    Stored witnesses are re-checked symbolically the first time a registry file
    is loaded in the process.

    Args:
        path: Registry JSON file (defaults to the packaged table)
        verify: True forces re-verification, False skips it, None verifies on first load

    Returns:
        Dict[str, RegistryEntry]: Entries keyed by class id, in table order

    Raises:
        ManifestError: File is missing or does not match the schema
        MalformedWitnessError: A stored witness does not fire its detector
    """
    path = Path(path or get_settings().registry_path).resolve()
    entries = {entry.id: entry for entry in _read_registry(str(path))}
    if verify is False:
        return entries
    with _verify_lock:
        if verify is None and path in _verified_paths:
            return entries
        # marked first: witness checks reload the registry through get_entry
        _verified_paths.add(path)
    try:
        for entry in entries.values():
            if entry.witnesses:
                _verify_stored_witness(entry)
    except Exception:
        _verified_paths.discard(path)
        raise
    logger.info("✅ registry witnesses verified (%d classes)", len(entries))
    return entries


def get_entry(class_id: str) -> RegistryEntry:
    entries = load_registry()
    if class_id not in entries:
        raise UnknownClassError(f"unknown class id '{class_id}'")
    return entries[class_id]


def _verify_stored_witness(entry: RegistryEntry) -> None:
    params = dict(entry.witness_params)
    V = instantiate_class(entry.id, params)
    resolved = resolve_params(entry, params)
    verdict = run_stored_witness(entry, V, resolved)
    if not verdict.fires:
        raise MalformedWitnessError(f"stored witness of {entry.id} does not fire: {verdict.note}")


# ==================== Parameters and Templates ====================

def _constant(text: str) -> Fraction:
    expr = parse_expr(text, PARAM_CHART)
    if not expr.is_polynomial or expr.canonical[0].total_degree() > 0:
        raise ParameterRangeError(f"'{text}' is not a rational constant")
    return evaluate(expr, {"r": 0})


def _format_value(value: Fraction) -> str:
    if value.denominator == 1 and value >= 0:
        return str(value.numerator)
    return f"({value})"


def resolve_params(entry: RegistryEntry, params: Optional[Mapping[str, ParamValue]] = None) -> Dict[str, Fraction]:
    """Apply defaults and range checks to class parameters"""
    params = dict(params or {})
    unknown = set(params) - set(entry.params)
    if unknown:
        raise ParameterRangeError(f"{entry.id} has no parameter(s) {sorted(unknown)}")
    resolved: Dict[str, Fraction] = {}
    for name, spec in entry.params.items():
        raw = params.get(name, spec.default)
        value = raw if isinstance(raw, Fraction) else _constant(str(raw))
        if spec.kind == "integer" and value.denominator != 1:
            raise ParameterRangeError(f"{entry.id}: {name} must be an integer, got {value}")
        check, description = CONSTRAINTS[spec.constraint]
        if not check(value):
            raise ParameterRangeError(f"{entry.id}: {name} = {value} violates {name} {description}")
        resolved[name] = value
    return resolved


def _substitute(template: str, values: Mapping[str, str]) -> str:
    try:
        return template.format(**values)
    except (KeyError, IndexError) as exc:
        raise ManifestError(f"template '{template}' uses an unknown placeholder {exc}") from None


def expected_dimension(entry: RegistryEntry, resolved: Mapping[str, Fraction]) -> int:
    expr = parse_expr(entry.dimension, PARAM_CHART)
    return int(evaluate(expr, {"r": resolved.get("r", Fraction(0))}))


def basis_texts(
    entry: RegistryEntry,
    resolved: Mapping[str, Fraction],
    slots: Optional[Mapping[str, str]] = None,
) -> List[List[str]]:
    """Basis templates with parameters, families and function slots filled in"""
    values = {name: _format_value(v) for name, v in resolved.items()}
    texts = [[_substitute(c, values) for c in field] for field in entry.basis]
    slot_templates = {**entry.slots, **(slots or {})}
    r = resolved.get("r", Fraction(0))
    for family in entry.families:
        stop = int(evaluate(parse_expr(family.stop, PARAM_CHART), {"r": r}))
        for k in range(family.start, stop + 1):
            index = {family.var: str(k), "km1": str(k - 1)}
            filled = {name: f"({_substitute(t, index)})" for name, t in slot_templates.items()}
            texts.append([_substitute(c, {**values, **index, **filled}) for c in family.field])
    return texts


def instantiate_class(
    class_id: str,
    params: Optional[Mapping[str, ParamValue]] = None,
    slots: Optional[Mapping[str, str]] = None,
) -> VGAlgebra:
    """
    Build the Lie algebra of one table class on the plane

    Args:
        class_id: Table id such as "P4" or "I16"
        params: Class parameters ("alpha", "r"); defaults fill the rest
        slots: Optional templates in {k} overriding the xi / eta function slots

    Returns:
        VGAlgebra: Closed algebra of the documented dimension

    Raises:
        UnknownClassError: No such class id
        ParameterRangeError: Parameter outside its admissible range
        ClosureError: Basis does not close at the documented dimension
    """
    entry = get_entry(class_id)
    resolved = resolve_params(entry, params)
    fields = [VectorField.from_list(PLANE, texts) for texts in basis_texts(entry, resolved, slots)]
    dim = expected_dimension(entry, resolved)
    algebra = lie_closure(fields, max_dim=max(dim, len(fields)))
    if isinstance(algebra, ExceedsBound) or algebra.dim != dim:
        got = "more" if isinstance(algebra, ExceedsBound) else algebra.dim
        raise ClosureError(f"{class_id} closes at dimension {got}, expected {dim}")
    # stored witness indices refer to the template order
    if len(fields) != dim or list(algebra.basis) != fields:
        raise ClosureError(f"{class_id} template fields are not an independent basis of dimension {dim}")
    return algebra


# ==================== Detectors ====================

def _coefficient_vector(spec, dim: int, values: Mapping[str, str]) -> List[Fraction]:
    vector = [Fraction(0)] * dim
    if isinstance(spec, Mapping):
        items = spec.items()
    elif isinstance(spec, (list, tuple)):
        if len(spec) != dim:
            raise MalformedWitnessError(f"coefficient vector of length {len(spec)} for dimension {dim}")
        items = enumerate(spec)
    else:
        raise MalformedWitnessError(f"unsupported witness entry {spec!r}")
    for key, raw in items:
        try:
            index = int(key)
        except (TypeError, ValueError):
            raise MalformedWitnessError(f"bad basis index {key!r}") from None
        if not 0 <= index < dim:
            raise MalformedWitnessError(f"basis index {index} outside 0..{dim - 1}")
        if isinstance(raw, Fraction) or isinstance(raw, int):
            vector[index] = Fraction(raw)
        else:
            try:
                vector[index] = _constant(_substitute(str(raw), values))
            except JlieError as exc:
                raise MalformedWitnessError(f"bad coefficient {raw!r}: {exc.detail}") from None
    return vector


def _witness_fields(V: VGAlgebra, witness: Witness, count: int, values=None) -> List[Multivector]:
    if len(witness) != count:
        raise MalformedWitnessError(f"expected {count} coefficient vectors, got {len(witness)}")
    return [linear_combination(V.basis, _coefficient_vector(spec, V.dim, values or {})) for spec in witness]


def _require_plane(V: VGAlgebra) -> None:
    if V.chart.dim != 2:
        raise ChartError("obstruction detectors need a 2-dimensional chart")


def _certificate(name: str, P: Multivector, seed: Optional[int]) -> Certificate:
    return Certificate(name=name, expr=P.to_text(), verdict=mv_is_zero(P, seed=seed))


def _forms(fields: Sequence[Multivector]) -> List[Dict[str, str]]:
    return [field.to_form().components for field in fields]


def prop1_check(
    V: VGAlgebra,
    witness: Optional[Witness] = None,
    bound: Optional[int] = None,
    seed: Optional[int] = None,
) -> ObstructionVerdict:
    """
    Prop-1 detector: X1, X2 nonzero in V with [X1, X2] = X1 and X1 ^ X2 = 0

    Without a witness a bounded search runs over basis pairs (X_i, b X_j)
    with b = +-p/q, 1 <= p, q <= bound.

    Raises:
        MalformedWitnessError: Witness is not a pair of valid coefficient vectors
    """
    _require_plane(V)
    if witness is None:
        witness = search_prop1_witness(V, bound)
        if witness is None:
            bound = bound or get_settings().witness_bound
            return ObstructionVerdict(
                status=ObstructionStatus.INCONCLUSIVE,
                note=f"bounded search over basis pairs with coefficients +-p/q, p, q <= {bound}, found no witness",
            )
    X1, X2 = _witness_fields(V, witness, 2)
    certificates = [
        _certificate("X1", X1, seed),
        _certificate("X2", X2, seed),
        _certificate("[X1,X2] - X1", lie_bracket(X1, X2) - X1, seed),
        _certificate("X1 ^ X2", wedge(X1, X2), seed),
    ]
    holds = (
        not certificates[0].verdict.is_zero
        and not certificates[1].verdict.is_zero
        and certificates[2].verdict.is_zero
        and certificates[3].verdict.is_zero
    )
    proven = all(c.verdict.is_proven for c in certificates)
    if holds and proven:
        return ObstructionVerdict(
            status=ObstructionStatus.PROP1_FIRES,
            witness=_forms([X1, X2]),
            certificates=certificates,
            scope=PROP1_SCOPE,
        )
    return ObstructionVerdict(
        status=ObstructionStatus.INCONCLUSIVE,
        witness=_forms([X1, X2]),
        certificates=certificates,
        scope=PROP1_SCOPE,
        note="witness rejected" if not holds else "conditions hold only probabilistically",
    )


def _scales(bound: int) -> List[Fraction]:
    values = sorted({Fraction(p, q) for p in range(1, bound + 1) for q in range(1, bound + 1)})
    return [s for v in values for s in (v, -v)]


def search_prop1_witness(V: VGAlgebra, bound: Optional[int] = None) -> Optional[List[List[Fraction]]]:
    """
    Bounded search for a Prop-1 pair among scaled basis elements

    [X_i, b X_j] = X_i reduces to b c_ij = e_i on the structure constants,
    and X_i ^ X_j = 0 does not depend on b.
    """
    bound = bound or get_settings().witness_bound
    scales = set(_scales(bound))
    for i in range(V.dim):
        for j in range(V.dim):
            if i == j:
                continue
            row = V.bracket_in_basis(i, j)
            if any(c for k, c in enumerate(row) if k != i) or not row[i]:
                continue
            b = 1 / row[i]
            if b not in scales:
                continue
            if not wedge(V.basis[i], V.basis[j]).is_literal_zero:
                continue
            first = [Fraction(0)] * V.dim
            second = [Fraction(0)] * V.dim
            first[i] = Fraction(1)
            second[j] = b
            logger.debug("Prop-1 witness found: (X%d, %s X%d)", i + 1, b, j + 1)
            return [first, second]
    return None


def prop2_check(
    V: VGAlgebra,
    witness: Witness,
    alpha: Union[Fraction, int, str],
    seed: Optional[int] = None,
) -> ObstructionVerdict:
    """
    Prop-2 detector for a triple spanning a copy of <dx, dy, x dx + alpha y dy>

    Verifies [Y1,Y2] = 0, [Y1,Y3] = Y1, [Y2,Y3] = alpha Y2 and Y1 ^ Y2 != 0.

    Raises:
        ExcludedAlphaError: alpha is 0 or -1
        MalformedWitnessError: Witness is not a triple of valid coefficient vectors
    """
    _require_plane(V)
    alpha = alpha if isinstance(alpha, Fraction) else _constant(str(alpha))
    if alpha in (0, -1):
        raise ExcludedAlphaError(f"Prop-2 requires alpha outside {{0, -1}}, got {alpha}")
    Y1, Y2, Y3 = _witness_fields(V, witness, 3)
    certificates = [
        _certificate("[Y1,Y2]", lie_bracket(Y1, Y2), seed),
        _certificate("[Y1,Y3] - Y1", lie_bracket(Y1, Y3) - Y1, seed),
        _certificate("[Y2,Y3] - alpha*Y2", lie_bracket(Y2, Y3) - Y2.scale(alpha), seed),
        _certificate("Y1 ^ Y2", wedge(Y1, Y2), seed),
    ]
    holds = all(c.verdict.is_zero for c in certificates[:3]) and not certificates[3].verdict.is_zero
    proven = all(c.verdict.is_proven for c in certificates)
    status = ObstructionStatus.PROP2_FIRES if holds and proven else ObstructionStatus.INCONCLUSIVE
    return ObstructionVerdict(
        status=status,
        witness=_forms([Y1, Y2, Y3]),
        alpha=str(alpha),
        certificates=certificates,
        scope=PROP2_SCOPE,
        note=None if status == ObstructionStatus.PROP2_FIRES else "witness rejected",
    )


def run_stored_witness(
    entry: RegistryEntry,
    V: VGAlgebra,
    resolved: Mapping[str, Fraction],
    seed: Optional[int] = None,
) -> ObstructionVerdict:
    """Run the first stored witness applicable at these parameters"""
    values = {name: _format_value(v) for name, v in resolved.items()}
    for spec in entry.witnesses:
        if spec.kind == WitnessKind.PROP2:
            alpha = _constant(_substitute(spec.alpha or "", values))
            if alpha in (0, -1):
                continue
            triple = _resolved_vectors(spec, V.dim, values)
            return prop2_check(V, triple, alpha, seed=seed)
        return prop1_check(V, _resolved_vectors(spec, V.dim, values), seed=seed)
    return ObstructionVerdict(
        status=ObstructionStatus.INCONCLUSIVE,
        note=f"no stored witness of {entry.id} applies at {dict(values)}",
    )


def _resolved_vectors(spec: WitnessSpec, dim: int, values: Mapping[str, str]) -> List[List[Fraction]]:
    return [_coefficient_vector(vector, dim, values) for vector in spec.fields]


# ==================== Table Verification ====================

def resolve_verdict(entry: RegistryEntry, resolved: Mapping[str, Fraction]) -> TableVerdict:
    verdict = entry.verdict
    if verdict.kind != TableVerdict.POISSON_CONDITIONAL:
        return verdict.kind
    if resolved[verdict.param] == _constant(verdict.equals):
        return TableVerdict.POISSON
    return verdict.otherwise


def _hamiltonian_check(name: str, J, V: VGAlgebra, max_degree: int) -> CheckResult:
    if not J.usable:
        return CheckResult(
            name=name, verdict=CheckVerdict.FAIL, certainty=Certainty.PROVEN,
            detail="structure fails the compatibility conditions", certificates=J.certificates(),
        )
    hams = is_hamiltonian_algebra(J, V, max_degree)
    found = [h.to_text() if h is not None else None for h in hams]
    if all(h is not None for h in hams):
        return CheckResult(
            name=name, verdict=CheckVerdict.PASS, certainty=Certainty.PROVEN,
            detail=f"Hamiltonians {found}", certificates=J.certificates(),
        )
    return CheckResult(
        name=name, verdict=CheckVerdict.INCONCLUSIVE, certainty=Certainty.INCONCLUSIVE,
        detail=f"no polynomial Hamiltonian of degree <= {max_degree} for some basis element: {found}",
    )


def _obstruction_check(verdict: ObstructionVerdict) -> CheckResult:
    fires = verdict.fires and all(c.verdict.is_proven for c in verdict.certificates)
    return CheckResult(
        name=f"obstruction ({verdict.status.value})",
        verdict=CheckVerdict.PASS if fires else CheckVerdict.FAIL,
        certainty=Certainty.PROVEN if fires else Certainty.INCONCLUSIVE,
        detail=verdict.scope if fires else verdict.note,
        certificates=verdict.certificates,
    )


def verify_table(
    class_id: str,
    params: Optional[Mapping[str, ParamValue]] = None,
    max_degree: Optional[int] = None,
    bivector: Optional[Mapping[str, str]] = None,
    seed: Optional[int] = None,
) -> TableReport:
    """
    Cross-check the stored verdict of one class

    ReebOnly classes are solved against (0, R); No classes run their stored
    witness through the matching detector; Poisson classes are verified only
    against a supplied bivector and otherwise reported as asserted.

    Args:
        class_id: Table id
        params: Class parameters
        max_degree: Ansatz degree for Hamiltonian solving (default r + 2)
        bivector: Optional Poisson bivector components {"0,1": "<expr>"} on (x, y)
        seed: Sampling seed

    Returns:
        TableReport: Checks with verdicts, certainty levels and a conclusion
    """
    entry = get_entry(class_id)
    resolved = resolve_params(entry, params)
    if max_degree is None:
        max_degree = int(resolved.get("r", Fraction(2))) + 2
    checks: List[CheckResult] = []

    try:
        V = instantiate_class(class_id, resolved)
    except ClosureError as exc:
        checks.append(CheckResult(name="closure", verdict=CheckVerdict.FAIL, certainty=Certainty.PROVEN, detail=exc.detail))
        return TableReport(id=class_id, params=_param_text(resolved), checks=checks, conclusion="closure failure", passed=False)
    checks.append(CheckResult(
        name="closure", verdict=CheckVerdict.PASS, certainty=Certainty.PROVEN,
        detail=f"closed at dimension {V.dim}",
    ))

    verdict = resolve_verdict(entry, resolved)
    if verdict == TableVerdict.REEB_ONLY:
        reeb = VectorField.from_list(PLANE, entry.reeb)
        J = check_jacobi(Multivector.zero(PLANE, 2), reeb, seed=seed)
        checks.append(_hamiltonian_check(f"hamiltonian wrt (0, {reeb.to_text()})", J, V, max_degree))
        if entry.poisson_bivector:
            lam = Multivector.from_form(PLANE, {"degree": 2, "components": entry.poisson_bivector})
            checks.append(_hamiltonian_check(f"hamiltonian wrt ({lam.to_text()}, 0)", check_poisson(lam, seed=seed), V, max_degree))
        conclusion = f"ReebOnly(0, {reeb.to_text()}) verified"
    elif verdict == TableVerdict.NO:
        obstruction = run_stored_witness(entry, V, resolved, seed=seed)
        checks.append(_obstruction_check(obstruction))
        conclusion = f"No: {obstruction.status.value}"
    elif verdict == TableVerdict.NO_ASSERTED:
        checks.append(CheckResult(
            name="obstruction", verdict=CheckVerdict.ASSERTED, certainty=Certainty.ASSERTED,
            detail="excluded by a modification of the Prop-2 argument; asserted, not machine-proved",
        ))
        conclusion = "NoAsserted"
    else:
        supplied = bivector or entry.poisson_bivector
        if supplied:
            lam = Multivector.from_form(PLANE, {"degree": 2, "components": dict(supplied)})
            checks.append(_hamiltonian_check(f"hamiltonian wrt ({lam.to_text()}, 0)", check_poisson(lam, seed=seed), V, max_degree))
            conclusion = "Poisson verified against the supplied bivector"
        else:
            checks.append(CheckResult(
                name="poisson", verdict=CheckVerdict.ASSERTED, certainty=Certainty.ASSERTED,
                detail="Poisson status asserted (bivector external to this classification)",
            ))
            conclusion = "Poisson asserted"

    passed = all(check.positive for check in checks)
    if not passed:
        conclusion = f"{conclusion} (check failed)"
    logger.info("%s %s: %s", "✅" if passed else "❌", class_id, conclusion)
    return TableReport(
        id=class_id, params=_param_text(resolved), verdict=verdict, checks=checks, conclusion=conclusion, passed=passed,
    )


def _param_text(resolved: Mapping[str, Fraction]) -> Dict[str, str]:
    return {name: str(value) for name, value in resolved.items()}


def verify_all(jobs: Optional[int] = None, seed: Optional[int] = None) -> List[TableReport]:
    """verify_table for every class with default parameters, in table order"""
    ids = list(load_registry())
    jobs = jobs or get_settings().jobs
    if jobs <= 1:
        return [verify_table(class_id, seed=seed) for class_id in ids]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda class_id: verify_table(class_id, seed=seed), ids))
