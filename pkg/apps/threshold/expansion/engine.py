"""Resolvent expansion coefficients G₋₂..G₁ from the inversion cascade."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..analysis.threshold import (
    IntermediateOperators,
    ThresholdKind,
    ThresholdReport,
    classify_operators,
    intermediate_operators,
)
from ..free.free_model import FreeModel, free_columns
from ..perturbation.factored import FactoredPerturbation
from .cascade import MATRIX_ORDERS, CascadeResult, M_coefficients, invert_M
from .operator_expr import OperatorExpr, combine

logger = logging.getLogger(__name__)

LOWEST_ORDER = -2
HIGHEST_ORDER = 1
# G₀,ⱼ enters G_j only with j ≤ 3 for orders up to G₁
FREE_ORDERS = 3


@dataclass(frozen=True, eq=False)
class ResolventCoefficients:
    kind: ThresholdKind
    coefficients: Dict[int, OperatorExpr]
    cascade: CascadeResult

    def __getitem__(self, order: int) -> OperatorExpr:
        return self.coefficients[order]

    def orders(self):
        return sorted(self.coefficients)


def _sandwich_term(model: FreeModel, perturbation: FactoredPerturbation, left: int, matrix: np.ndarray, right: int) -> OperatorExpr:
    """G₀,left v X v* G₀,right"""
    if model.backend.is_zero_matrix(matrix):
        return OperatorExpr.zero(model)
    return OperatorExpr.outer(
        model,
        free_columns(model, perturbation, left),
        matrix,
        free_columns(model, perturbation, right),
    )


def assemble_coefficient(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    inverse: Dict[int, np.ndarray],
    order: int,
) -> OperatorExpr:
    """G_j = G₀,ⱼ − Σ_{j1+j2+j3=j} G₀,j1 v X_{j2} v* G₀,j3"""
    terms = []
    if order >= 0:
        terms.append(OperatorExpr.free(model, order))
    if perturbation.k:
        for j1 in range(0, FREE_ORDERS + 1):
            for j3 in range(0, FREE_ORDERS + 1):
                j2 = order - j1 - j3
                if j2 in inverse:
                    terms.append(-_sandwich_term(model, perturbation, j1, inverse[j2], j3))
    return combine(model, terms)


def resolvent_coefficients(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    report: Optional[ThresholdReport] = None,
) -> ResolventCoefficients:
    ops: IntermediateOperators = report.operators if report is not None else intermediate_operators(model, perturbation)
    kind = report.classification if report is not None else classify_operators(ops)
    backend = model.backend

    M_list = M_coefficients(model, perturbation, MATRIX_ORDERS)
    cascade = invert_M(backend, M_list, ops.M0_pinv, ops.Q, ops.m0_pinv, ops.S, top_order=HIGHEST_ORDER)
    coefficients = {
        order: assemble_coefficient(model, perturbation, cascade.inverse, order)
        for order in range(LOWEST_ORDER, HIGHEST_ORDER + 1)
    }
    logger.info(f"Resolvent coefficients G{LOWEST_ORDER}..G{HIGHEST_ORDER} assembled for a {kind.value} threshold")
    return ResolventCoefficients(kind, coefficients, cascade)
