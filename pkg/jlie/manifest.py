"""
Manifest Loading
Reads a JSON manifest (chart, bivector, Reeb field, named fields and functions)
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import ValidationError

from .config import get_settings
from .errors import ManifestError
from .jacobi import JacobiStructure, check_jacobi
from .multivec import Multivector, VectorField, as_vector_field
from .scalar import Chart, Expr, parse_expr
from .schemas import Manifest

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadedManifest:
    """Parsed manifest with its source digest"""
    name: str
    path: Path
    digest: str
    chart: Chart
    lambda_: Multivector
    reeb: VectorField
    fields: Dict[str, VectorField]
    functions: Dict[str, Expr]

    def structure(self, seed: Optional[int] = None) -> JacobiStructure:
        return check_jacobi(self.lambda_, self.reeb, seed=seed)

    def function(self, name_or_text: str) -> Expr:
        """Named manifest function, or expression text on the manifest chart"""
        if name_or_text in self.functions:
            return self.functions[name_or_text]
        return parse_expr(name_or_text, self.chart)


def resolve_manifest_path(path: Union[str, Path]) -> Path:
    """Path as given, else a packaged fixture with the same file name"""
    candidate = Path(path)
    if candidate.is_file():
        return candidate
    fixture = get_settings().fixtures_dir / candidate.name
    if fixture.is_file():
        return fixture
    fixture = fixture.with_suffix(".json")
    if fixture.is_file():
        return fixture
    raise ManifestError(f"manifest not found: {path}")


def load_manifest(path: Union[str, Path]) -> LoadedManifest:
    """
    Load and parse a manifest file

    Raises:
        ManifestError: File is unreadable or does not match the schema
        ExprSyntaxError: An expression does not parse
        UnknownIdentifierError: An expression uses a non-coordinate identifier
    """
    resolved = resolve_manifest_path(path)
    try:
        data = resolved.read_bytes()
        manifest = Manifest.model_validate(json.loads(data))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {resolved}: {exc}") from exc
    except ValidationError as exc:
        raise ManifestError(f"manifest {resolved} does not match the schema: {exc}") from exc

    name = manifest.name or resolved.stem
    chart = Chart(name, tuple(manifest.chart), annotation=manifest.domain)
    lambda_ = Multivector.from_form(chart, manifest.lambda_)
    reeb = Multivector.from_form(chart, manifest.reeb)
    if lambda_.degree != 2 or reeb.degree != 1:
        raise ManifestError(f"manifest {resolved}: lambda must have degree 2 and reeb degree 1")
    fields = {}
    for key, form in manifest.fields.items():
        field = Multivector.from_form(chart, form)
        if field.degree != 1:
            raise ManifestError(f"manifest field {key} must have degree 1")
        fields[key] = as_vector_field(field)
    functions = {key: parse_expr(text, chart) for key, text in manifest.functions.items()}
    logger.debug("loaded manifest %s from %s", name, resolved)
    return LoadedManifest(
        name=name,
        path=resolved,
        digest=hashlib.sha256(data).hexdigest(),
        chart=chart,
        lambda_=lambda_,
        reeb=as_vector_field(reeb),
        fields=fields,
        functions=functions,
    )
