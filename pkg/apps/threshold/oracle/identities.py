"""Identity checks on the expansion coefficients, applied to deltas on a window."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

from ..analysis.threshold import ThresholdReport, apply_hamiltonian
from ..errors import NotFinitelySupported, PreconditionMomentNonzero
from ..expansion.operator_expr import OperatorExpr
from ..free.free_model import FreeModel, apply_free_coefficient
from ..graph.graph import SiteIndex
from ..graph.ray_function import RayFunction, pair
from ..perturbation.factored import FactoredPerturbation
from .truncated import sample_sites

logger = logging.getLogger(__name__)

FLOAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class IdentityLedger:
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> Tuple[CheckResult, ...]:
        return tuple(check for check in self.checks if not check.passed)


def _tolerance(model: FreeModel) -> float:
    return 0.0 if model.backend.exact else FLOAT_TOLERANCE


def _functions_agree(model: FreeModel, first: RayFunction, second: RayFunction) -> bool:
    return first.agrees_with(second, _tolerance(model))


def _check_on_deltas(
    model: FreeModel,
    name: str,
    sites: Sequence[SiteIndex],
    lhs: Callable[[RayFunction], RayFunction],
    rhs: Callable[[RayFunction], RayFunction],
) -> CheckResult:
    for site in sites:
        delta = RayFunction.delta(model.graph, site, model.backend.scalar(1))
        if not _functions_agree(model, lhs(delta), rhs(delta)):
            return CheckResult(name, False, f"fails at delta {site}")
    return CheckResult(name, True)


def _symmetric(model: FreeModel, name: str, expr: OperatorExpr, sites: Sequence[SiteIndex]) -> CheckResult:
    tol = _tolerance(model)
    for i, x in enumerate(sites):
        for y in sites[i + 1 :]:
            difference = expr.evaluate(x, y) - expr.evaluate(y, x)
            if difference != 0 and (tol == 0 or abs(float(difference)) > tol):
                return CheckResult(name, False, f"asymmetric at ({x}, {y})")
    return CheckResult(name, True)


def _agree(model: FreeModel, name: str, first: OperatorExpr, second: OperatorExpr, sites: Sequence[SiteIndex]) -> CheckResult:
    if first.agrees_on(second, sites, _tolerance(model)):
        return CheckResult(name, True)
    return CheckResult(name, False, "kernels differ on the window")


def identity_suite(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    coefficients: Mapping[int, OperatorExpr],
    bound: OperatorExpr,
    resonance: OperatorExpr,
    window: int = 6,
    report: Optional[ThresholdReport] = None,
    sites: Optional[Sequence[SiteIndex]] = None,
) -> IdentityLedger:
    """
    HG₋₂ = 0, HG₋₁ = 0, HG₀ = I − 𝖯, HG₁ = −G₋₁, symmetry of every G_j and
    the projection laws of 𝖯 and 𝒫.
    """
    sites = list(sites) if sites is not None else sample_sites(model.graph, window)
    zero = RayFunction.zero(model.graph)

    def H_after(order: int) -> Callable[[RayFunction], RayFunction]:
        return lambda u: apply_hamiltonian(model, perturbation, coefficients[order].apply(u))

    checks: List[CheckResult] = [
        _check_on_deltas(model, "H G-2 = 0", sites, H_after(-2), lambda u: zero),
        _check_on_deltas(model, "H G-1 = 0", sites, H_after(-1), lambda u: zero),
        _check_on_deltas(model, "H G0 = I - P", sites, H_after(0), lambda u: u - bound.apply(u)),
        _check_on_deltas(model, "H G1 = -G-1", sites, H_after(1), lambda u: -coefficients[-1].apply(u)),
    ]
    for order in sorted(coefficients):
        checks.append(_symmetric(model, f"G{order} symmetric", coefficients[order], sites))

    checks.append(_agree(model, "G-2 equals bound projection", coefficients[-2], bound, sites))
    checks.append(_agree(model, "G-1 equals resonance projection", coefficients[-1], resonance, sites))
    checks.append(_agree(model, "bound projection idempotent", bound @ bound, bound, sites))
    checks.append(_symmetric(model, "bound projection symmetric", bound, sites))
    checks.append(_symmetric(model, "resonance projection symmetric", resonance, sites))

    # resonance functions are not square summable; 𝒫 is idempotent for the
    # leading-coefficient form −⟨·, V G₀,₁ V ·⟩
    columns = list(perturbation.columns)
    if columns:
        V = OperatorExpr.outer(model, columns, perturbation.U, columns)
        folded = -(resonance @ V @ OperatorExpr.free(model, 1) @ V @ resonance)
        checks.append(_agree(model, "resonance projection idempotent", folded, resonance, sites))

    if report is not None:
        tol = _tolerance(model)
        spans = all(bound.apply(item.function).agrees_with(item.function, tol) for item in report.bound)
        checks.append(CheckResult("bound projection fixes bound states", spans))

    ledger = IdentityLedger(tuple(checks))
    if ledger.passed:
        logger.info(f"Identity suite: all {len(checks)} checks pass")
    else:
        logger.warning(f"Identity suite: {[check.name for check in ledger.failures]} failed")
    return ledger


def lemma_pairing_check(model: FreeModel, u1: RayFunction, u2: RayFunction) -> bool:
    """⟨u₂, G₀,₂u₁⟩ = −⟨G₀,₀u₂, G₀,₀u₁⟩ for u₁ with vanishing first moments."""
    if not (u1.is_finitely_supported() and u2.is_finitely_supported()):
        raise NotFinitelySupported("both arguments must be finitely supported")
    for alpha in range(1, model.graph.ray_count + 1):
        moment = pair(RayFunction.linear(model.graph, alpha), u1)
        if moment != 0:
            raise PreconditionMomentNonzero(f"<n^({alpha}), u1> = {moment} is not zero")
    lhs = pair(u2, apply_free_coefficient(model, 2, u1))
    rhs = -pair(apply_free_coefficient(model, 0, u2), apply_free_coefficient(model, 0, u1))
    if model.backend.exact:
        return lhs == rhs
    return abs(float(lhs) - float(rhs)) <= FLOAT_TOLERANCE * max(1.0, abs(float(lhs)))
