"""
Command line entry point.

    threshold [global flags] classify   CONFIG
    threshold [global flags] eigenbasis CONFIG
    threshold [global flags] expand     CONFIG
    threshold [global flags] verify     CONFIG
    threshold [global flags] example    {star,family,freedim,spiderweb}

Exit codes: 0 when every check passes, 1 on verification failures, 2 on
input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..analysis.threshold import eigenspaces, projections
from ..config.settings import BACKENDS, Settings, get_settings
from ..errors import ThresholdError
from ..expansion.closed_forms import closed_form_G0_G1
from ..expansion.engine import resolvent_coefficients
from ..oracle.identities import identity_suite
from ..oracle.residuals import expansion_residual_report
from ..oracle.truncated import sample_sites, second_resolvent_check
from .examples import EXAMPLES, run_example
from .reports import (
    classification_record,
    eigenbasis_record,
    emit_reports,
    kernel_tables,
    ledger_record,
    residual_record,
)
from .run_config import RunConfig, RunContext, apply_overrides, build_run, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

COMMANDS = ("classify", "eigenbasis", "expand", "verify")
# closed forms are compared on at least this many sites
AGREEMENT_WINDOW = 8
ABLATION_SLOPE = -0.5


def configure_logging(settings: Settings, level: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, (level or settings.log_level).upper(), logging.INFO),
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        handlers=handlers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshold",
        description="Threshold classification and resolvent expansion for discrete Schrodinger operators on graphs with rays.",
    )
    parser.add_argument("--backend", choices=BACKENDS, default=None, help="Arithmetic backend.")
    parser.add_argument("--rank-tol", type=float, default=None, dest="rank_tol", help="Float rank tolerance.")
    parser.add_argument("--kernel-cap", type=int, default=None, dest="kernel_cap", help="Highest free kernel order.")
    parser.add_argument("--window", type=int, default=None, help="Number of sites in the report window.")
    parser.add_argument("--kappas", type=str, default=None, help="Comma separated decreasing kappa values.")
    parser.add_argument("--cutoff-const", type=float, default=None, dest="cutoff_const", help="Oracle cutoff constant c in L = c/kappa.")
    parser.add_argument("--out", type=str, default=None, help="Path of the JSON report; the text summary goes next to it.")
    parser.add_argument("--log-level", type=str, default=None, dest="log_level", help="Logging level override.")

    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("classify", "Classify the threshold and report the intermediate operators."),
        ("eigenbasis", "Also report the bound, resonance and non-resonance bases."),
        ("expand", "Also report G-2..G1 on the window and compare G0, G1 with the closed forms."),
        ("verify", "Also run the identity suite and the numeric residual check."),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("config", help="JSON run configuration.")
    example = commands.add_parser("example", help="Run a worked example.")
    example.add_argument("name", choices=EXAMPLES)
    return parser


def _parse_kappas(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    return [float(item) for item in text.replace(" ", "").split(",") if item]


def _summary_path(report_path: Optional[str], configured: Optional[str]) -> Optional[str]:
    if configured:
        return configured
    if report_path:
        return str(Path(report_path).with_suffix(".txt"))
    return None


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------
def analyze(command: str, context: RunContext) -> Dict[str, Any]:
    """Run a subcommand on a prepared context; the result is a report document."""
    config = context.config
    model = context.model
    perturbation = context.perturbation
    engine = config.engine
    sites = sample_sites(context.graph, engine.window)
    tol = 0.0 if model.backend.exact else 1e-9

    report = eigenspaces(model, perturbation)
    result: Dict[str, Any] = {
        "command": command,
        "backend": model.backend.name,
        "perturbation_mode": config.perturbation.mode,
        "rank": perturbation.k,
        "analysis": classification_record(report),
    }
    passed = True
    if command == "classify":
        result["passed"] = passed
        return result

    result["bases"] = eigenbasis_record(report, sites)
    if command == "eigenbasis":
        result["passed"] = passed
        return result

    coefficients = resolvent_coefficients(model, perturbation, report)
    agreement_sites = sample_sites(context.graph, max(engine.window, AGREEMENT_WINDOW))
    closed = closed_form_G0_G1(model, perturbation, report)
    agreement = {order: coefficients[order].agrees_on(closed[order], agreement_sites, tol) for order in (0, 1)}
    passed = passed and all(agreement.values())
    result["expansion"] = {
        "kernels": kernel_tables(coefficients.coefficients, sites),
        "closed_form_agreement": agreement,
    }
    if command == "expand":
        result["passed"] = passed
        return result

    bound, resonance = projections(model, perturbation, report)
    ledger = identity_suite(
        model, perturbation, coefficients.coefficients, bound, resonance, report=report, sites=sites
    )
    residuals = expansion_residual_report(
        model,
        perturbation,
        coefficients.coefficients,
        kappas=engine.kappas,
        cutoff_const=engine.cutoff_const,
        workers=engine.workers,
        sites=sites,
    )
    verification: Dict[str, Any] = {"identities": ledger_record(ledger), "residuals": residual_record(residuals)}
    passed = passed and ledger.passed and residuals.passed

    if not coefficients[-1].is_zero_on(sites, tol):
        ablation = expansion_residual_report(
            model,
            perturbation,
            coefficients.coefficients,
            kappas=engine.kappas,
            cutoff_const=engine.cutoff_const,
            workers=engine.workers,
            omit_orders=frozenset({-1}),
            sites=sites,
        )
        record = residual_record(ablation)
        record["detects_missing_order"] = ablation.worst_slope <= ABLATION_SLOPE
        verification["ablation"] = record

    if perturbation.k:
        check = second_resolvent_check(model, perturbation, engine.kappas[0], sites, engine.cutoff_const)
        verification["second_resolvent"] = {
            "kappa": check.kappa,
            "resolvent_deviation": check.resolvent_deviation,
            "coupling_deviation": check.coupling_deviation,
            "passed": check.passed(),
        }
        passed = passed and check.passed()

    result["verification"] = verification
    result["passed"] = passed
    return result


def _prepare(args: argparse.Namespace, settings: Settings) -> RunContext:
    config: RunConfig = load_config(args.config, settings)
    config = apply_overrides(
        config,
        {
            "name": args.backend,
            "rank_tol": args.rank_tol,
            "kernel_cap": args.kernel_cap,
            "window": args.window,
            "kappas": _parse_kappas(args.kappas),
            "cutoff_const": args.cutoff_const,
            "report": args.out,
        },
    )
    return build_run(config)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    configure_logging(settings, args.log_level)

    if args.command == "example":
        try:
            report = run_example(args.name, rank_tol=args.rank_tol or settings.rank_tol)
        except ThresholdError as exc:
            logger.error(f"Example {args.name} failed: {exc}")
            return EXIT_FAILED
        result = {
            "command": "example",
            "example": {"name": report.name, "data": report.data, "checks": list(report.checks)},
            "passed": report.passed,
        }
        try:
            summary = emit_reports(result, args.out, _summary_path(args.out, None))
        except ThresholdError as exc:
            logger.error(str(exc))
            return EXIT_INPUT
        sys.stdout.write(summary)
        return EXIT_OK if report.passed else EXIT_FAILED

    try:
        context = _prepare(args, settings)
    except (ThresholdError, ValueError) as exc:
        logger.error(f"Invalid input: {exc}")
        logger.debug("Input error details", exc_info=True)
        return EXIT_INPUT

    try:
        result = analyze(args.command, context)
    except ThresholdError as exc:
        logger.error(f"{args.command} failed: {exc}")
        logger.debug("Failure details", exc_info=True)
        return EXIT_FAILED

    report_path = context.config.output.report
    try:
        summary = emit_reports(result, report_path, _summary_path(report_path, context.config.output.summary))
    except ThresholdError as exc:
        logger.error(str(exc))
        return EXIT_INPUT
    sys.stdout.write(summary)
    return EXIT_OK if result["passed"] else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
