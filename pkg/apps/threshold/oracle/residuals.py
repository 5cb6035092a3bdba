"""
Residual order measurement: how fast R(κ) − Σ_{j=−2}^{1} κʲ G_j vanishes.

One truncated solve per κ; the solves run in a thread pool and the report is
assembled in κ order, so the result does not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..expansion.operator_expr import OperatorExpr
from ..free.free_model import FreeModel
from ..graph.graph import SiteIndex
from ..perturbation.factored import FactoredPerturbation
from .truncated import DEFAULT_CUTOFF_CONST, resolvent_block, sample_sites

logger = logging.getLogger(__name__)

DEFAULT_MIN_SLOPE = 1.9
EXACT_RESIDUAL = 1e-10


@dataclass(frozen=True)
class ResidualEntry:
    x: SiteIndex
    y: SiteIndex
    residuals: Tuple[float, ...]
    slope: float
    exact: bool
    # local slope over the two smallest κ
    tail_slope: float = math.inf

    def passes(self, min_slope: float) -> bool:
        return self.exact or self.slope >= min_slope


@dataclass(frozen=True)
class ResidualReport:
    kappas: Tuple[float, ...]
    omitted: Tuple[int, ...]
    min_slope: float
    entries: Tuple[ResidualEntry, ...]

    @property
    def failures(self) -> Tuple[ResidualEntry, ...]:
        return tuple(entry for entry in self.entries if not entry.passes(self.min_slope))

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst_slope(self) -> float:
        slopes = [entry.slope for entry in self.entries if not entry.exact]
        return min(slopes) if slopes else math.inf

    @property
    def worst_tail_slope(self) -> float:
        slopes = [entry.tail_slope for entry in self.entries if not entry.exact]
        return min(slopes) if slopes else math.inf


def _check_kappas(kappas: Sequence[float]) -> Tuple[float, ...]:
    values = tuple(float(k) for k in kappas)
    if len(values) < 2:
        raise ValueError("at least two kappa values are needed to fit a slope")
    if any(k <= 0 for k in values) or any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError(f"kappa values must be positive and strictly decreasing, got {values}")
    return values


def fit_slope(kappas: Sequence[float], residuals: Sequence[float]) -> Tuple[float, bool]:
    """Least-squares slope of log ρ against log κ, and whether ρ is zero to solver precision."""
    if max(residuals) <= EXACT_RESIDUAL:
        return math.inf, True
    logs = np.log(np.maximum(np.asarray(residuals, dtype=np.float64), 1e-300))
    slope, _ = np.polyfit(np.log(np.asarray(kappas, dtype=np.float64)), logs, 1)
    return float(slope), False


def tail_slope(kappas: Sequence[float], residuals: Sequence[float]) -> float:
    """Slope of log ρ between the two smallest κ; tends to the true order as κ → 0."""
    if max(residuals) <= EXACT_RESIDUAL:
        return math.inf
    k1, k2 = kappas[-2:]
    r1, r2 = (max(r, 1e-300) for r in residuals[-2:])
    return math.log(r2 / r1) / math.log(k2 / k1)


def partial_sum_table(
    coefficients: Mapping[int, OperatorExpr],
    sites: Sequence[SiteIndex],
    omit: Iterable[int] = (),
) -> Dict[int, np.ndarray]:
    """G_j on the sites as float tables, for every order not omitted."""
    omitted = set(omit)
    tables = {}
    for order, expr in coefficients.items():
        if order in omitted:
            continue
        tables[order] = np.array(
            [[float(expr.evaluate(x, y)) for y in sites] for x in sites],
            dtype=np.float64,
        )
    return tables


def expansion_residual_report(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    coefficients: Mapping[int, OperatorExpr],
    kappas: Sequence[float] = (0.4, 0.2, 0.1, 0.05),
    window: int = 6,
    cutoff_const: float = DEFAULT_CUTOFF_CONST,
    workers: int = 4,
    omit_orders: FrozenSet[int] = frozenset(),
    min_slope: float = DEFAULT_MIN_SLOPE,
    sites: Optional[Sequence[SiteIndex]] = None,
) -> ResidualReport:
    kappas = _check_kappas(kappas)
    sites = list(sites) if sites is not None else sample_sites(model.graph, window)
    tables = partial_sum_table(coefficients, sites, omit_orders)

    def solve(kappa: float) -> np.ndarray:
        logger.info(f"Oracle solve at kappa={kappa}")
        return resolvent_block(model, perturbation, kappa, sites, cutoff_const)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        blocks = list(executor.map(solve, kappas))

    residuals: List[np.ndarray] = []
    for kappa, block in zip(kappas, blocks):
        partial = sum((kappa**order) * table for order, table in tables.items())
        residuals.append(np.abs(block - partial))

    entries = []
    for i, x in enumerate(sites):
        for j in range(i, len(sites)):
            values = tuple(float(r[i, j]) for r in residuals)
            slope, exact = fit_slope(kappas, values)
            entries.append(ResidualEntry(x, sites[j], values, slope, exact, tail_slope(kappas, values)))

    report = ResidualReport(kappas, tuple(sorted(omit_orders)), min_slope, tuple(entries))
    if report.passed:
        logger.info(
            f"Residual report: {len(entries)} entries, worst slope {report.worst_slope:.3f}, "
            f"worst tail slope {report.worst_tail_slope:.3f}"
        )
    else:
        logger.warning(
            f"Residual report: {len(report.failures)} of {len(entries)} entries below slope {min_slope}, "
            f"worst tail slope {report.worst_tail_slope:.3f}"
        )
    return report
