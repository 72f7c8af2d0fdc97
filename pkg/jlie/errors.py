"""
Error Types
Every error carries a human-readable detail and the CLI exit code it maps to
"""

from typing import Optional

EXIT_FAILED_CHECK = 1
EXIT_BAD_INPUT = 2


class JlieError(Exception):
    """Base error for the toolkit"""

    exit_code: int = EXIT_BAD_INPUT

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


# ==================== Expressions and Charts ====================

class ChartError(JlieError):
    """Invalid chart definition"""


class ChartMismatchError(JlieError):
    """Operands live on different charts"""


class ExprSyntaxError(JlieError):
    """Expression text does not conform to the grammar"""

    def __init__(self, detail: str, position: int):
        super().__init__(f"{detail} at position {position}")
        self.position = position


class UnknownIdentifierError(JlieError):
    """Identifier is not a coordinate of the chart"""

    def __init__(self, name: str, position: Optional[int] = None):
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"unknown identifier '{name}'{where}")
        self.name = name
        self.position = position


class PoleError(JlieError):
    """A denominator vanishes at the evaluation point"""

    exit_code = EXIT_FAILED_CHECK

    def __init__(self, detail: str, time: Optional[float] = None):
        super().__init__(detail)
        self.time = time


class MissingCoordinateError(JlieError):
    """Evaluation point does not assign every chart coordinate"""


class EvaluationError(JlieError):
    """Sampling could not find enough pole-free points"""

    exit_code = EXIT_FAILED_CHECK


class NonPolynomialError(JlieError):
    """Polynomial-only routine received a rational or exp-bearing input"""


# ==================== Multivectors and Structures ====================

class DegreeError(JlieError):
    """Multivector has the wrong degree for the operation"""


class UnusableStructureError(JlieError):
    """Jacobi compatibility conditions are not verified"""

    exit_code = EXIT_FAILED_CHECK


class NonGoodFunctionError(JlieError):
    """A function expected to be a good Hamiltonian function is not"""

    exit_code = EXIT_FAILED_CHECK


class InconsistentAlgebraError(JlieError):
    """Bracket data does not match the hypotheses of the construction"""

    exit_code = EXIT_FAILED_CHECK


class LengthMismatchError(JlieError):
    """Coefficient list and basis have different lengths"""


# ==================== Registry and Detectors ====================

class UnknownClassError(JlieError):
    """No registry entry with this id"""


class ParameterRangeError(JlieError):
    """Class parameter outside its admissible range"""


class ClosureError(JlieError):
    """Registry basis does not close at its documented dimension"""

    exit_code = EXIT_FAILED_CHECK


class MalformedWitnessError(JlieError):
    """Witness coefficient vectors are invalid"""


class ExcludedAlphaError(JlieError):
    """Prop-2 detector called with alpha in {0, -1}"""


# ==================== Input Files and Numerics ====================

class ManifestError(JlieError):
    """Manifest file cannot be read or does not match the schema"""


class IntegrationError(JlieError):
    """Integration aborted (pole or non-finite state)"""

    exit_code = EXIT_FAILED_CHECK

    def __init__(self, detail: str, time: Optional[float] = None):
        super().__init__(detail)
        self.time = time


class CoincidentSolutionsError(JlieError):
    """Particular solutions are not pairwise distinct"""

    exit_code = EXIT_FAILED_CHECK
