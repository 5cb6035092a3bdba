"""
Report emission: one JSON document and one text summary per run.

Exact numbers are written as "p/q" strings, floats as JSON numbers (non-finite
values as strings). Keys are sorted, so the same run always produces the same
bytes.
"""

from __future__ import annotations

import json
import logging
import math
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..analysis.threshold import EigenFunction, ThresholdReport
from ..errors import IoError
from ..expansion.operator_expr import OperatorExpr
from ..graph.graph import KVertex, RaySite, SiteIndex
from ..graph.ray_function import RayFunction
from ..oracle.identities import CheckResult, IdentityLedger
from ..oracle.residuals import ResidualReport
from .run_config import format_fraction

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if math.isfinite(number):
            return number
        return "inf" if number > 0 else ("-inf" if number < 0 else "nan")
    if isinstance(value, (KVertex, RaySite)):
        return str(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, Mapping):
        return {str(to_jsonable(key)): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, CheckResult):
        return {"name": value.name, "passed": value.passed, "detail": value.detail}
    raise TypeError(f"cannot serialize {type(value).__name__}")


# ----------------------------------------------------------------------
# Records
# ----------------------------------------------------------------------
def function_record(u: RayFunction, sites: Sequence[SiteIndex]) -> Dict[str, Any]:
    """Values on the window plus the tail polynomial of every ray."""
    return {
        "window": {str(site): u.value(site) for site in sites},
        "tails": {str(ray): list(u.tail(ray)) for ray in range(1, u.graph.ray_count + 1)},
    }


def classification_record(report: ThresholdReport) -> Dict[str, Any]:
    return {
        "classification": report.classification,
        "dims": {
            "nonresonance": report.dim_nonresonance,
            "resonance": report.dim_resonance,
            "bound": report.dim_bound,
        },
        "resonance_space_nonzero": report.resonance_space_nonzero,
        "matrices": {"M0": report.M0, "Q": report.Q, "m0": report.m0, "S": report.S},
    }


def _basis_record(items: Sequence[EigenFunction], sites: Sequence[SiteIndex]) -> List[Dict[str, Any]]:
    records = []
    for item in items:
        record = function_record(item.function, sites)
        record["leading"] = list(item.leading)
        record["squared_norm"] = item.squared_norm
        records.append(record)
    return records


def eigenbasis_record(report: ThresholdReport, sites: Sequence[SiteIndex]) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "bound": _basis_record(report.bound, sites),
        "resonance": _basis_record(report.resonance, sites),
        "nonresonance": _basis_record(report.nonresonance, sites),
        "kernel_v": [list(c) for c in report.kernel_v],
    }
    if report.orthonormal:
        record["orthonormal"] = {
            name: [function_record(u, sites) for u in functions] for name, functions in report.orthonormal.items()
        }
    return record


def kernel_tables(coefficients: Mapping[int, OperatorExpr], sites: Sequence[SiteIndex]) -> Dict[str, Any]:
    return {
        "sites": [str(site) for site in sites],
        "tables": {f"G{order}": coefficients[order].kernel_table(sites) for order in sorted(coefficients)},
    }


def ledger_record(ledger: IdentityLedger) -> Dict[str, Any]:
    return {"passed": ledger.passed, "checks": list(ledger.checks)}


def residual_record(report: ResidualReport) -> Dict[str, Any]:
    return {
        "passed": report.passed,
        "kappas": list(report.kappas),
        "omitted_orders": list(report.omitted),
        "min_slope": report.min_slope,
        "worst_slope": report.worst_slope,
        "worst_tail_slope": report.worst_tail_slope,
        "entries": [
            {
                "x": entry.x,
                "y": entry.y,
                "residuals": list(entry.residuals),
                "slope": entry.slope,
                "tail_slope": entry.tail_slope,
                "exact": entry.exact,
            }
            for entry in report.entries
        ],
    }


# ----------------------------------------------------------------------
# Emission
# ----------------------------------------------------------------------
def render_json(result: Mapping[str, Any]) -> str:
    return json.dumps(to_jsonable(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _check_lines(checks: Sequence[Any]) -> List[str]:
    lines = []
    for check in checks:
        if isinstance(check, Mapping):
            name, passed, detail = check.get("name"), check.get("passed"), check.get("detail", "")
        else:
            name, passed, detail = check.name, check.passed, check.detail
        mark = "PASS" if passed else "FAIL"
        lines.append(f"  [{mark}] {name}" + (f" ({detail})" if detail else ""))
    return lines


def text_summary(result: Mapping[str, Any]) -> str:
    """Human-readable digest of a result document."""
    lines = [f"Threshold analyzer: {result.get('command', 'run')}"]
    if "backend" in result:
        lines.append(f"Backend: {result['backend']}")
    analysis = result.get("analysis")
    if analysis:
        dims = analysis["dims"]
        lines.append(f"Classification: {to_jsonable(analysis['classification'])}")
        lines.append(
            f"Dimensions: non-resonance {dims['nonresonance']}, resonance {dims['resonance']}, bound {dims['bound']}"
        )
    expansion = result.get("expansion")
    if expansion and "closed_form_agreement" in expansion:
        agreement = expansion["closed_form_agreement"]
        lines.append("Closed forms: " + ", ".join(f"G{k} {'agree' if v else 'DIFFER'}" for k, v in sorted(agreement.items())))
    verification = result.get("verification")
    if verification:
        identities = verification.get("identities")
        if identities:
            lines.append("Identities:")
            lines.extend(_check_lines(identities["checks"]))
        residuals = verification.get("residuals")
        if residuals:
            lines.append(
                f"Residual slopes: worst {to_jsonable(residuals['worst_slope'])} "
                f"(tail {to_jsonable(residuals['worst_tail_slope'])}) "
                f"(minimum {residuals['min_slope']}) -> {'PASS' if residuals['passed'] else 'FAIL'}"
            )
        ablation = verification.get("ablation")
        if ablation:
            lines.append(f"Ablation without G-1: worst slope {to_jsonable(ablation['worst_slope'])}")
        second = verification.get("second_resolvent")
        if second:
            lines.append(f"Second resolvent check: {'PASS' if second['passed'] else 'FAIL'}")
    example = result.get("example")
    if example:
        lines.append(f"Example: {example['name']}")
        lines.extend(_check_lines(example["checks"]))
    lines.append(f"Overall: {'PASS' if result.get('passed', True) else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _write(path: str, text: str) -> None:
    try:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    logger.info(f"Wrote {path}")


def emit_reports(result: Mapping[str, Any], report_path: Optional[str], summary_path: Optional[str]) -> str:
    """Write the JSON report and the text summary; returns the summary text."""
    summary = text_summary(result)
    if report_path:
        _write(report_path, render_json(result))
    if summary_path:
        _write(summary_path, summary)
    return summary
