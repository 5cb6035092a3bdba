"""
Closed-form G₀ and G₁ for each threshold type, written with finite-rank
expressions only. With W_M = vM₀†v* and W_m = vm₀†v*:

  regular       G₀ = G₀₀ − G₀₀W_MG₀₀
  first kind    G₀ = G₀₀ − 𝒫VG₀₁ − G₀₁V𝒫 − (G₀₀ − 𝒫VG₀₁)W_M(G₀₀ − G₀₁V𝒫) + 𝒫VG₀₂V𝒫
  second kind   G₀ = (I − 𝖯)(G₀₀ − G₀₀W_MG₀₀)(I − 𝖯)
  third kind    G₀ = (I − 𝖯)[G₀₀ − G₀₀W_mG₀₁ − G₀₁W_mG₀₀
                     − G₀₀(I − W_mG₀₁)W_M(I − G₀₁W_m)G₀₀
                     + G₀₀W_mG₀₂W_mG₀₀ + G₀₀W_mG₀₀𝖯G₀₀W_mG₀₀](I − 𝖯)

G₁ always carries −P̃, the orthogonal non-resonance projection. It is built as
Σ_{αβ} Π_{αβ}|Ψ(𝐧^(α))⟩⟨Ψ(𝐧^(β))| where Ψ is the type's non-resonance map and
Π projects ℂ^N onto the complement of the resonance leading vectors, which is
the same operator for every orthonormal choice of complement basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..analysis.threshold import (
    ThresholdKind,
    ThresholdReport,
    bound_projection,
    eigenspaces,
    resonance_projection,
)
from ..free.free_model import FreeModel
from ..graph.ray_function import RayFunction
from ..perturbation.factored import FactoredPerturbation
from .operator_expr import OperatorExpr

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class _Pieces:
    I: OperatorExpr
    G00: OperatorExpr
    G01: OperatorExpr
    G02: OperatorExpr
    G03: OperatorExpr
    V: OperatorExpr
    W_M: OperatorExpr
    W_m: OperatorExpr
    bound: OperatorExpr
    resonance: OperatorExpr


def _pieces(model: FreeModel, perturbation: FactoredPerturbation, report: ThresholdReport) -> _Pieces:
    ops = report.operators
    columns = list(perturbation.columns)
    bound = bound_projection(ops)
    return _Pieces(
        I=OperatorExpr.identity(model),
        G00=OperatorExpr.free(model, 0),
        G01=OperatorExpr.free(model, 1),
        G02=OperatorExpr.free(model, 2),
        G03=OperatorExpr.free(model, 3),
        V=OperatorExpr.outer(model, columns, perturbation.U, columns),
        W_M=OperatorExpr.outer(model, columns, ops.M0_pinv, columns),
        W_m=OperatorExpr.outer(model, columns, ops.m0_pinv, columns),
        bound=bound,
        resonance=resonance_projection(ops, bound),
    )


def nonresonance_map(kind: ThresholdKind, p: _Pieces) -> OperatorExpr:
    """The operator taking 𝐧_γ̃ to Ψ_γ̃; always the identity plus dyads."""
    if kind is ThresholdKind.REGULAR:
        return p.I - p.G00 @ p.W_M
    if kind is ThresholdKind.FIRST_KIND:
        return p.I - (p.G00 - p.resonance @ p.V @ p.G01) @ p.W_M
    complement = p.I - p.bound
    if kind is ThresholdKind.SECOND_KIND:
        return complement @ (p.I - p.G00 @ p.W_M)
    return complement @ (p.I - p.G00 @ (p.I - p.W_m @ p.G01) @ p.W_M)


def nonresonance_projection(
    model: FreeModel,
    report: ThresholdReport,
    p: _Pieces,
) -> OperatorExpr:
    """P̃ = Σ_{αβ} Π_{αβ} |Ψ(𝐧^(α))⟩⟨Ψ(𝐧^(β))|"""
    backend = model.backend
    graph = model.graph
    n_rays = graph.ray_count
    leading = [backend.vector(item.leading) for item in report.resonance]
    if leading:
        span = backend.span(backend.column_stack(leading, n_rays))
        complement = backend.identity(n_rays) - backend.orthogonal_projection(span)
    else:
        complement = backend.identity(n_rays)
    mapping = nonresonance_map(report.classification, p)
    images = [mapping.apply(RayFunction.linear(graph, alpha)) for alpha in range(1, n_rays + 1)]
    if not backend.exact:
        images = [u.chop(backend.rank_tol * max(1.0, u.max_abs())) for u in images]
    return OperatorExpr.outer(model, images, complement, images)


def closed_form_G0(kind: ThresholdKind, p: _Pieces) -> OperatorExpr:
    if kind is ThresholdKind.REGULAR:
        return p.G00 - p.G00 @ p.W_M @ p.G00
    if kind is ThresholdKind.FIRST_KIND:
        PV = p.resonance @ p.V
        VP = p.V @ p.resonance
        left = p.G00 - PV @ p.G01
        right = p.G00 - p.G01 @ VP
        return p.G00 - PV @ p.G01 - p.G01 @ VP - left @ p.W_M @ right + PV @ p.G02 @ VP
    complement = p.I - p.bound
    if kind is ThresholdKind.SECOND_KIND:
        return complement @ (p.G00 - p.G00 @ p.W_M @ p.G00) @ complement
    core = (
        p.G00
        - p.G00 @ p.W_m @ p.G01
        - p.G01 @ p.W_m @ p.G00
        - p.G00 @ (p.I - p.W_m @ p.G01) @ p.W_M @ (p.I - p.G01 @ p.W_m) @ p.G00
        + p.G00 @ p.W_m @ p.G02 @ p.W_m @ p.G00
        + p.G00 @ p.W_m @ p.G00 @ p.bound @ p.G00 @ p.W_m @ p.G00
    )
    return complement @ core @ complement


def closed_form_G1(kind: ThresholdKind, p: _Pieces, tilde: OperatorExpr) -> OperatorExpr:
    if kind in (ThresholdKind.REGULAR, ThresholdKind.SECOND_KIND):
        return -tilde
    PV = p.resonance @ p.V
    VP = p.V @ p.resonance
    if kind is ThresholdKind.FIRST_KIND:
        left = p.I - (p.G00 - PV @ p.G01) @ p.W_M
        right = p.I - p.W_M @ (p.G00 - p.G01 @ VP)
        return (
            -tilde
            + PV @ p.G03 @ VP
            + PV @ p.G02 @ VP @ p.V @ p.G02 @ VP
            - left @ (p.I + p.G01 @ VP @ p.V) @ p.G02 @ VP
            - PV @ p.G02 @ (p.I + p.V @ PV @ p.G01) @ right
        )
    complement = p.I - p.bound
    left = complement @ (p.I - p.G00 @ (p.I - p.W_m @ p.G01) @ p.W_M)
    right = (p.I - p.W_M @ (p.I - p.G01 @ p.W_m) @ p.G00) @ complement
    return (
        -tilde
        + PV @ p.G03 @ VP
        - PV @ p.G02 @ p.W_m @ p.G02 @ VP
        - left @ (p.I - p.G01 @ p.W_m) @ p.G02 @ VP
        - PV @ p.G02 @ (p.I - p.W_m @ p.G01) @ right
    )


def closed_form_G0_G1(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    report: Optional[ThresholdReport] = None,
) -> Dict[int, OperatorExpr]:
    """{0: G₀, 1: G₁} from the closed formulas of the report's threshold type."""
    report = report if report is not None else eigenspaces(model, perturbation)
    p = _pieces(model, perturbation, report)
    kind = report.classification
    tilde = nonresonance_projection(model, report, p)
    result = {0: closed_form_G0(kind, p), 1: closed_form_G1(kind, p, tilde)}
    logger.info(f"Closed-form G0, G1 built for a {kind.value} threshold")
    return result
