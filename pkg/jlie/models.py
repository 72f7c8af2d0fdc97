"""
Enumerations shared by the library and its JSON reports
"""

import enum


class ZeroStatus(str, enum.Enum):
    PROVEN_ZERO = "ProvenZero"
    PROVEN_NONZERO = "ProvenNonzero"
    PROBABLY_ZERO = "ProbablyZero"
    PROBABLY_NONZERO = "ProbablyNonzero"


class Certainty(str, enum.Enum):
    PROVEN = "proven"
    PROBABLE = "probable"
    ASSERTED = "asserted"
    INCONCLUSIVE = "inconclusive"


class CheckVerdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    ASSERTED = "asserted"
    INCONCLUSIVE = "inconclusive"
    NOT_APPLICABLE = "not_applicable"


class ObstructionStatus(str, enum.Enum):
    PROP1_FIRES = "Prop1Fires"
    PROP2_FIRES = "Prop2Fires"
    INCONCLUSIVE = "Inconclusive"


class TableVerdict(str, enum.Enum):
    POISSON = "Poisson"
    POISSON_CONDITIONAL = "PoissonConditional"
    REEB_ONLY = "ReebOnly"
    NO = "No"
    NO_ASSERTED = "NoAsserted"


class WitnessKind(str, enum.Enum):
    PROP1 = "prop1"
    PROP2 = "prop2"
