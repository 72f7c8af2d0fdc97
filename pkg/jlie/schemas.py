"""
Pydantic Schemas for manifests, registry data and JSON reports
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from .models import (
    Certainty, CheckVerdict, ObstructionStatus, TableVerdict, WitnessKind, ZeroStatus
)

# ==================== Zero-Test Verdicts ====================

class ZeroVerdict(BaseModel):
    """Outcome of a zero test, with the certainty it was reached at"""
    model_config = ConfigDict(frozen=True)

    status: ZeroStatus
    n_samples: Optional[int] = None
    tolerance: Optional[float] = None
    witness: Optional[Dict[str, str]] = None

    @property
    def is_zero(self) -> bool:
        return self.status in (ZeroStatus.PROVEN_ZERO, ZeroStatus.PROBABLY_ZERO)

    @property
    def is_proven(self) -> bool:
        return self.status in (ZeroStatus.PROVEN_ZERO, ZeroStatus.PROVEN_NONZERO)

    @property
    def certainty(self) -> Certainty:
        return Certainty.PROVEN if self.is_proven else Certainty.PROBABLE


# ==================== Manifest Schemas ====================

class MultivectorForm(BaseModel):
    """JSON form of a multivector: 0-based index keys "i,j,..." to expression text"""
    degree: int = Field(..., ge=0)
    components: Dict[str, str] = Field(default_factory=dict)


class Manifest(BaseModel):
    """A chart with a Jacobi structure and optional named fields and functions"""
    model_config = ConfigDict(populate_by_name=True)

    name: Optional[str] = None
    chart: List[str] = Field(..., min_length=1)
    lambda_: MultivectorForm = Field(..., alias="lambda")
    reeb: MultivectorForm
    fields: Dict[str, MultivectorForm] = Field(default_factory=dict)
    functions: Dict[str, str] = Field(default_factory=dict)
    domain: Optional[str] = None


# ==================== Report Schemas ====================

class Certificate(BaseModel):
    """A symbolic check: the expression tested and its zero verdict"""
    name: str
    expr: str
    verdict: ZeroVerdict


class CheckResult(BaseModel):
    """One named check inside a report"""
    name: str
    verdict: CheckVerdict
    certainty: Certainty
    detail: Optional[str] = None
    certificates: List[Certificate] = Field(default_factory=list)

    @property
    def positive(self) -> bool:
        return self.verdict in (CheckVerdict.PASS, CheckVerdict.ASSERTED)


class Report(BaseModel):
    """Top-level CLI report"""
    command: List[str]
    inputs_digest: str
    checks: List[CheckResult] = Field(default_factory=list)
    result: Optional[dict] = None
    exit_status: int = 0


class ObstructionVerdict(BaseModel):
    """Outcome of a Prop-1 or Prop-2 detector run"""
    status: ObstructionStatus
    witness: Optional[List[Dict[str, str]]] = None
    alpha: Optional[str] = None
    certificates: List[Certificate] = Field(default_factory=list)
    scope: str = "no Jacobi structure with Lambda != 0 and R != 0 makes this algebra Hamiltonian"
    note: Optional[str] = None

    @property
    def fires(self) -> bool:
        return self.status != ObstructionStatus.INCONCLUSIVE


# ==================== Registry Schemas ====================

class ParameterSpec(BaseModel):
    """Admissible values of one class parameter"""
    kind: str = Field(..., pattern="^(rational|integer)$")
    default: str
    constraint: str


class FamilySpec(BaseModel):
    """Indexed run of basis fields, e.g. x^k dy for k = 2..r"""
    var: str = "k"
    start: int
    stop: str
    field: List[str]


class WitnessSpec(BaseModel):
    """Stored obstruction witness as coefficient vectors over the basis"""
    kind: WitnessKind
    fields: List[Dict[str, str]]
    alpha: Optional[str] = None


class VerdictSpec(BaseModel):
    """Last column of the table row"""
    kind: TableVerdict
    param: Optional[str] = None
    equals: Optional[str] = None
    otherwise: Optional[TableVerdict] = None


class RegistryEntry(BaseModel):
    """One class of the planar classification"""
    id: str
    lie_algebra: str
    params: Dict[str, ParameterSpec] = Field(default_factory=dict)
    slots: Dict[str, str] = Field(default_factory=dict)
    basis: List[List[str]]
    families: List[FamilySpec] = Field(default_factory=list)
    dimension: str
    verdict: VerdictSpec
    reeb: Optional[List[str]] = None
    poisson_bivector: Optional[Dict[str, str]] = None
    witnesses: List[WitnessSpec] = Field(default_factory=list)
    witness_params: Dict[str, str] = Field(default_factory=dict)
    note: Optional[str] = None


class TableReport(BaseModel):
    """verify_table output for one class"""
    id: str
    params: Dict[str, str]
    verdict: Optional[TableVerdict] = None
    checks: List[CheckResult]
    conclusion: str
    passed: bool


# ==================== Export Schemas ====================

class AlgebraExport(BaseModel):
    """VGAlgebra JSON export"""
    chart: List[str]
    basis: List[MultivectorForm]
    structure_constants: Dict[str, str]
    probabilistic: bool = False


class FunctionAlgebraExport(BaseModel):
    """FunctionAlgebra JSON export"""
    chart: List[str]
    generators: Dict[str, str]
    structure_constants: Dict[str, str]


class SuperpositionReport(BaseModel):
    """Result of the three-solution Riccati superposition check"""
    k: float
    max_residual: float
    residual_tolerance: float
    cross_ratio_drift: float
    drift_tolerance: float
    passed: bool
