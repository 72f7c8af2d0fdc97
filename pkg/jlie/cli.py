"""
Command-Line Interface
Batch commands that load manifests, run checks and print JSON reports
"""

import argparse
import hashlib
import json
import logging
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import configure_logging, get_settings
from .errors import EXIT_FAILED_CHECK, JlieError, ManifestError
from .gko import verify_all, verify_table
from .jacobi import jacobi_bracket, solve_hamiltonian
from .liesys import ExceedsBound, build_function_algebra, check_constant_of_motion, lie_closure
from .manifest import LoadedManifest, load_manifest
from .models import Certainty, CheckVerdict
from .numint import (
    DRIFT_TOLERANCE, builtin_system, com_drift, integrate, riccati_superposition_check,
    system_from_manifest
)
from .scalar import is_zero, parse_expr
from .schemas import CheckResult, Report

logger = logging.getLogger(__name__)

Outcome = Tuple[List[CheckResult], dict]

EXPRESSION_COMMANDS = ("bracket", "com")
GLOBAL_VALUE_OPTIONS = ("--seed", "--jobs", "--log-level")


# ==================== Helpers ====================

def _digest(argv: Sequence[str], manifests: Sequence[LoadedManifest]) -> str:
    payload = json.dumps(
        {"argv": list(argv), "files": {m.name: m.digest for m in manifests}},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _verdict_check(name: str, verdict, certificates=None) -> CheckResult:
    return CheckResult(
        name=name,
        verdict=CheckVerdict.PASS if verdict.is_zero else CheckVerdict.FAIL,
        certainty=verdict.certainty,
        certificates=certificates or [],
    )


def _pass(name: str, detail: Optional[str] = None) -> CheckResult:
    return CheckResult(name=name, verdict=CheckVerdict.PASS, certainty=Certainty.PROVEN, detail=detail)


def _parse_assignments(items: Optional[Sequence[str]], what: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise JlieError(f"{what} must look like KEY=VALUE, got '{item}'")
        out[key.strip()] = value.strip()
    return out


def _floats(text: str, what: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise JlieError(f"{what} must be comma-separated numbers, got '{text}'") from None


def _guard_expressions(argv: List[str]) -> List[str]:
    """Insert '--' after the manifest of bracket/com so '-y' parses as an expression"""
    i = 0
    while i < len(argv) and argv[i].startswith("-"):
        i += 2 if argv[i] in GLOBAL_VALUE_OPTIONS else 1
    if i >= len(argv) or argv[i] not in EXPRESSION_COMMANDS:
        return argv
    rest = argv[i + 1:]
    if not rest or "--" in rest or any(token in ("-h", "--help") for token in rest):
        return argv
    return argv[:i + 2] + ["--"] + rest[1:]


# ==================== Commands ====================

def cmd_check(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Verify both Jacobi compatibility conditions of a manifest"""
    manifest = load_manifest(args.manifest)
    manifests.append(manifest)
    J = manifest.structure(seed=seed)
    certificates = J.certificates()
    checks = [
        _verdict_check("[L,L] = 2 R^L", J.jacobi_verdict, certificates[:1]),
        _verdict_check("[R,L] = 0", J.reeb_verdict, certificates[1:]),
    ]
    result = {"usable": J.usable, "poisson": J.is_poisson, "domain": manifest.chart.annotation}
    return checks, result


def cmd_bracket(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Jacobi bracket of two functions in canonical form"""
    manifest = load_manifest(args.manifest)
    manifests.append(manifest)
    f = manifest.function(args.f)
    g = manifest.function(args.g)
    J = manifest.structure(seed=seed)
    J.require_usable()
    bracket = jacobi_bracket(J, f, g)
    return [_pass("structure usable")], {"f": f.to_text(), "g": g.to_text(), "bracket": bracket.to_text()}


def cmd_hamiltonian(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Polynomial Hamiltonian function for each manifest field"""
    manifest = load_manifest(args.manifest)
    manifests.append(manifest)
    J = manifest.structure(seed=seed)
    J.require_usable()
    names = args.field or list(manifest.fields)
    checks, found = [], {}
    for name in names:
        if name not in manifest.fields:
            raise ManifestError(f"manifest has no field '{name}'")
        h = solve_hamiltonian(J, manifest.fields[name], args.degree)
        found[name] = h.to_text() if h is not None else None
        if h is None:
            checks.append(CheckResult(
                name=f"hamiltonian {name}", verdict=CheckVerdict.INCONCLUSIVE,
                certainty=Certainty.INCONCLUSIVE, detail=f"no polynomial solution of degree <= {args.degree}",
            ))
        else:
            checks.append(_pass(f"hamiltonian {name}", found[name]))
    return checks, {"hamiltonians": found}


def cmd_closure(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Lie closure of the manifest fields"""
    manifest = load_manifest(args.manifest)
    manifests.append(manifest)
    algebra = lie_closure(list(manifest.fields.values()), max_dim=args.max_dim, seed=seed)
    if isinstance(algebra, ExceedsBound):
        check = CheckResult(
            name="closure", verdict=CheckVerdict.FAIL, certainty=Certainty.PROVEN, detail=algebra.message,
        )
        return [check], {"exceeds_bound": algebra.max_dim}
    certainty = Certainty.PROBABLE if algebra.probabilistic else Certainty.PROVEN
    check = CheckResult(
        name="closure", verdict=CheckVerdict.PASS, certainty=certainty, detail=f"dimension {algebra.dim}",
    )
    return [check], algebra.to_export().model_dump()


def cmd_table(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Verify one class of the planar table, or all of them"""
    if args.all:
        reports = verify_all(jobs=args.jobs, seed=seed)
    else:
        if not args.id:
            raise JlieError("table needs a class id or --all")
        bivector = _parse_assignments(args.bivector, "--bivector")
        reports = [verify_table(
            args.id, _parse_assignments(args.param, "--param"), args.degree, bivector or None, seed=seed,
        )]
    checks = [
        CheckResult(
            name=report.id,
            verdict=CheckVerdict.PASS if report.passed else CheckVerdict.FAIL,
            certainty=min((c.certainty for c in report.checks), key=_certainty_rank, default=Certainty.PROVEN),
            detail=report.conclusion,
        )
        for report in reports
    ]
    summary: Dict[str, int] = {}
    for report in reports:
        key = report.verdict.value if report.verdict else "closure failure"
        summary[key] = summary.get(key, 0) + 1
    return checks, {"classes": [r.model_dump(mode="json") for r in reports], "summary": summary}


def _certainty_rank(certainty: Certainty) -> int:
    return [Certainty.INCONCLUSIVE, Certainty.PROBABLE, Certainty.ASSERTED, Certainty.PROVEN].index(certainty)


def cmd_integrate(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Integrate a built-in or manifest system with RK4"""
    if args.manifest:
        manifest = load_manifest(args.manifest)
        manifests.append(manifest)
        coefficients = [c.strip() for c in (args.coeffs or "").split(";") if c.strip()]
        system = system_from_manifest(manifest, coefficients)
    elif args.system == "riccati":
        system = builtin_system("riccati", [args.a0, args.a1, args.a2])
    else:
        system = builtin_system(args.system, [args.b1, args.b2, args.b3])

    x0 = _floats(args.x0, "--x0")
    trajectory = integrate(system, x0, args.t0, args.t1, args.step)
    if args.csv:
        trajectory.to_csv(args.csv)
    checks = [_pass("integration", f"{len(trajectory.times) - 1} steps")]
    result: dict = {
        "final_state": dict(zip(trajectory.coords, trajectory.final_state)),
        "steps": len(trajectory.times) - 1,
    }
    if args.csv:
        result["csv"] = args.csv

    if args.com:
        f = parse_expr(args.com, system.chart)
        drift = com_drift(trajectory, f)
        result["drift"] = drift
        checks.append(CheckResult(
            name="constant of motion",
            verdict=CheckVerdict.PASS if drift < DRIFT_TOLERANCE else CheckVerdict.FAIL,
            certainty=Certainty.PROBABLE,
            detail=f"drift {drift:.3g} (tolerance {DRIFT_TOLERANCE:g})",
        ))

    if args.superposition:
        if args.system != "riccati" or args.manifest:
            raise JlieError("--superposition applies to --system riccati only")
        starts = _floats(args.superposition, "--superposition")
        if len(starts) != 3:
            raise JlieError("--superposition needs three initial values")
        solutions = [integrate(system, [value], args.t0, args.t1, args.step) for value in starts]
        report = riccati_superposition_check(solutions, args.k)
        result["superposition"] = report.model_dump()
        checks.append(CheckResult(
            name="superposition rule",
            verdict=CheckVerdict.PASS if report.passed else CheckVerdict.FAIL,
            certainty=Certainty.PROBABLE,
            detail=f"residual {report.max_residual:.3g}, cross-ratio drift {report.cross_ratio_drift:.3g}",
        ))
    return checks, result


def cmd_com(args, seed: int, manifests: List[LoadedManifest]) -> Outcome:
    """Constant-of-motion check against the manifest's function algebra"""
    manifest = load_manifest(args.manifest)
    manifests.append(manifest)
    J = manifest.structure(seed=seed)
    J.require_usable()
    fields = list(manifest.fields.values())
    algebra = lie_closure(fields, seed=seed)
    if isinstance(algebra, ExceedsBound):
        raise JlieError(algebra.message, exit_code=EXIT_FAILED_CHECK)
    if list(algebra.basis) != fields:
        raise JlieError(f"fields of {manifest.name} do not form a closed basis", exit_code=EXIT_FAILED_CHECK)
    A = build_function_algebra(J, algebra, list(manifest.functions.values()), seed=seed)
    f = manifest.function(args.f)
    brackets = {name: jacobi_bracket(J, f, h) for name, h in zip(A.names, A.generators)}
    constant = check_constant_of_motion(J, f, A, seed=seed)
    certainty = Certainty.PROVEN if not f.has_exp else Certainty.PROBABLE
    checks = [CheckResult(
        name="constant of motion",
        verdict=CheckVerdict.PASS if constant else CheckVerdict.FAIL,
        certainty=certainty,
        detail="; ".join(f"{{f,{name}}} = {b.to_text()}" for name, b in brackets.items()),
    )]
    witnesses = {name: b.to_text() for name, b in brackets.items() if not is_zero(b, seed=seed).is_zero}
    return checks, {"constant": constant, "function_algebra": A.to_export().model_dump(), "nonzero_brackets": witnesses}


COMMANDS: Dict[str, Callable[..., Outcome]] = {
    "check": cmd_check,
    "bracket": cmd_bracket,
    "hamiltonian": cmd_hamiltonian,
    "closure": cmd_closure,
    "table": cmd_table,
    "integrate": cmd_integrate,
    "com": cmd_com,
}


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jlie", description="Jacobi-Lie systems toolkit")
    parser.add_argument("--version", action="version", version=f"jlie {__version__}")
    parser.add_argument("--seed", type=int, default=None, help="seed for probabilistic zero tests (overrides JLIE_SEED)")
    parser.add_argument("--pretty", action="store_true", help="indent the JSON report")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads for table --all")
    parser.add_argument("--log-level", default=None, help="logging level on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify the Jacobi compatibility conditions")
    p.add_argument("manifest")

    p = sub.add_parser("bracket", help="Jacobi bracket of two functions")
    p.add_argument("manifest")
    p.add_argument("f", help="expression text or manifest function name")
    p.add_argument("g", help="expression text or manifest function name")

    p = sub.add_parser("hamiltonian", help="solve X_f = X for the manifest fields")
    p.add_argument("manifest")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--field", action="append", help="field name (repeatable; default all)")

    p = sub.add_parser("closure", help="Lie closure of the manifest fields")
    p.add_argument("manifest")
    p.add_argument("--max-dim", type=int, default=None)

    p = sub.add_parser("table", help="verify classes of the planar table")
    p.add_argument("id", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--param", action="append", help="class parameter KEY=VALUE")
    p.add_argument("--bivector", action="append", help="Poisson bivector component I,J=EXPR on (x, y)")
    p.add_argument("--degree", type=int, default=None, help="ansatz degree (default r + 2)")

    p = sub.add_parser("integrate", help="integrate a t-dependent Lie system")
    p.add_argument("--system", choices=["riccati", "heisenberg", "sl2"], default="riccati")
    p.add_argument("--manifest")
    p.add_argument("--coeffs", help="';'-separated coefficient expressions in t for the manifest fields")
    for name in ("a0", "a1", "a2", "b1", "b2", "b3"):
        p.add_argument(f"--{name}", default="0")
    p.add_argument("--x0", required=True)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--csv")
    p.add_argument("--com", help="function whose drift along the trajectory is measured")
    p.add_argument("--superposition", help="three comma-separated initial values")
    p.add_argument("--k", type=float, default=0.5)

    p = sub.add_parser("com", help="constant-of-motion check against the function algebra")
    p.add_argument("manifest")
    p.add_argument("f", help="expression text or manifest function name")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; the JSON report goes to stdout and the exit status is returned"""
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_guard_expressions(argv))
    configure_logging(args.log_level)
    seed = get_settings().seed if args.seed is None else args.seed

    manifests: List[LoadedManifest] = []
    try:
        checks, result = COMMANDS[args.command](args, seed, manifests)
        status = 0 if all(check.positive for check in checks) else EXIT_FAILED_CHECK
    except JlieError as exc:
        logger.error("❌ %s", exc.detail)
        checks, result, status = [], {"error": exc.detail}, exc.exit_code

    report = Report(
        command=argv,
        inputs_digest=_digest(argv, manifests),
        checks=checks,
        result=result,
        exit_status=status,
    )
    print(report.model_dump_json(indent=2 if args.pretty else None))
    return status
