"""
Brute-force resolvents R(κ) = (H + κ²)⁻¹ on a truncated graph.

Every ray is cut after L sites with a Dirichlet condition at L+1; the
truncation error decays like e^(−2κL), so the cutoff is tied to κ through
L ≥ c/κ.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg

from ..errors import CutoffTooSmall, SingularSolve
from ..free.free_model import FreeModel, free_kernel
from ..graph.graph import GraphWithRays, KVertex, RaySite, SiteIndex
from ..perturbation.factored import FactoredPerturbation

logger = logging.getLogger(__name__)

DEFAULT_CUTOFF_CONST = 40.0
SOLVER_TOLERANCE = 1e-12


def cutoff_for(kappa: float, cutoff_const: float = DEFAULT_CUTOFF_CONST) -> int:
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return int(math.ceil(cutoff_const / kappa))


def sample_sites(graph: GraphWithRays, count: int) -> List[SiteIndex]:
    """The first `count` sites: K vertices, then ray positions taken round-robin over the rays."""
    sites: List[SiteIndex] = [KVertex(v) for v in graph.k_vertices]
    position = 1
    while len(sites) < count:
        for ray in range(1, graph.ray_count + 1):
            sites.append(RaySite(ray, position))
        position += 1
    return sites[:count]


@dataclass(frozen=True, eq=False)
class TruncatedHamiltonian:
    graph: GraphWithRays
    perturbation: Optional[FactoredPerturbation]
    cutoff: int
    sites: List[SiteIndex]
    matrix: np.ndarray
    index: Dict[SiteIndex, int] = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.sites)

    def position(self, site: SiteIndex) -> int:
        if isinstance(site, RaySite) and site.position > self.cutoff:
            raise CutoffTooSmall(f"site {site} lies beyond the cutoff {self.cutoff}")
        return self.index[site]

    def solve(self, kappa: float, targets: Sequence[SiteIndex]) -> np.ndarray:
        """Columns (H + κ²)⁻¹ δ_y for every target y."""
        rhs = np.zeros((self.dimension, len(targets)), dtype=np.float64)
        for j, site in enumerate(targets):
            rhs[self.position(site), j] = 1.0
        return self.solve_dense(kappa, rhs)

    def solve_dense(self, kappa: float, rhs: np.ndarray) -> np.ndarray:
        shifted = self.matrix + (kappa**2) * np.eye(self.dimension)
        try:
            solution = scipy.linalg.solve(shifted, rhs, assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise SingularSolve(f"truncated solve failed at kappa={kappa}: {exc}") from exc
        residual = float(np.max(np.abs(shifted @ solution - rhs))) if rhs.size else 0.0
        scale = max(1.0, float(np.max(np.abs(solution)))) if solution.size else 1.0
        if residual > SOLVER_TOLERANCE * scale * self.dimension:
            raise SingularSolve(f"solver residual {residual:.2e} too large at kappa={kappa}")
        return solution


def dense_free_hamiltonian(model: FreeModel, cutoff: int) -> np.ndarray:
    """H₀ = h₀ ⊕ Dirichlet half-lines on the truncated site list."""
    graph = model.graph
    sites = graph.window_sites(cutoff)
    index = {site: i for i, site in enumerate(sites)}
    matrix = np.zeros((len(sites), len(sites)), dtype=np.float64)
    k_count = len(graph.k_vertices)
    matrix[:k_count, :k_count] = model.backend.to_float(model.h0)
    for ray in range(1, graph.ray_count + 1):
        for n in range(1, cutoff + 1):
            i = index[RaySite(ray, n)]
            matrix[i, i] = 2.0
            if n > 1:
                matrix[i, index[RaySite(ray, n - 1)]] = -1.0
            if n < cutoff:
                matrix[i, index[RaySite(ray, n + 1)]] = -1.0
    return matrix


def build_truncated(
    model: FreeModel,
    perturbation: Optional[FactoredPerturbation],
    cutoff: int,
) -> TruncatedHamiltonian:
    graph = model.graph
    if perturbation is not None and perturbation.support_radius > cutoff:
        raise CutoffTooSmall(f"perturbation reaches ray site {perturbation.support_radius} beyond cutoff {cutoff}")
    sites = graph.window_sites(cutoff)
    matrix = dense_free_hamiltonian(model, cutoff)
    if perturbation is not None and perturbation.k:
        matrix = matrix + perturbation.window_matrix(sites)
    logger.debug(f"Truncated Hamiltonian with cutoff {cutoff}: dimension {len(sites)}")
    return TruncatedHamiltonian(graph, perturbation, cutoff, sites, matrix, {s: i for i, s in enumerate(sites)})


def resolvent_block(
    model: FreeModel,
    perturbation: Optional[FactoredPerturbation],
    kappa: float,
    sites: Sequence[SiteIndex],
    cutoff_const: float = DEFAULT_CUTOFF_CONST,
    cutoff: Optional[int] = None,
) -> np.ndarray:
    """R(κ)[x, y] for x, y in `sites`."""
    required = cutoff_for(kappa, cutoff_const)
    if cutoff is None:
        cutoff = required
    elif cutoff < cutoff_const / kappa:
        raise CutoffTooSmall(f"cutoff {cutoff} is below c/kappa = {cutoff_const / kappa:.1f}")
    truncated = build_truncated(model, perturbation, cutoff)
    columns = truncated.solve(kappa, sites)
    rows = [truncated.position(site) for site in sites]
    return columns[rows, :]


def numeric_resolvent_entry(
    model: FreeModel,
    perturbation: Optional[FactoredPerturbation],
    kappa: float,
    x: SiteIndex,
    y: SiteIndex,
    cutoff: Optional[int] = None,
    cutoff_const: float = DEFAULT_CUTOFF_CONST,
) -> float:
    """⟨δ_x, (H_trunc + κ²)⁻¹ δ_y⟩"""
    block = resolvent_block(model, perturbation, kappa, [x, y], cutoff_const, cutoff)
    return float(block[0, 1])


def free_expansion_check(
    model: FreeModel,
    kappa: float,
    sites: Sequence[SiteIndex],
    order: int = 5,
    cutoff_const: float = DEFAULT_CUTOFF_CONST,
) -> float:
    """max |R₀(κ)[x,y] − Σ_{j≤order} κʲ G₀,ⱼ[x,y]| over the sites."""
    block = resolvent_block(model, None, kappa, sites, cutoff_const)
    worst = 0.0
    for i, x in enumerate(sites):
        for j, y in enumerate(sites):
            partial = sum(kappa**p * float(free_kernel(model, p, x, y)) for p in range(order + 1))
            worst = max(worst, abs(block[i, j] - partial))
    logger.debug(f"Free expansion check at kappa={kappa}: deviation {worst:.3e}")
    return worst


@dataclass(frozen=True)
class SecondResolventCheck:
    kappa: float
    resolvent_deviation: float
    coupling_deviation: float

    def passed(self, tolerance: float = 1e-8) -> bool:
        return self.resolvent_deviation <= tolerance and self.coupling_deviation <= tolerance


def second_resolvent_check(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    kappa: float,
    sites: Sequence[SiteIndex],
    cutoff_const: float = DEFAULT_CUTOFF_CONST,
) -> SecondResolventCheck:
    """
    Compares R = R₀ − R₀vM⁻¹v*R₀ and M⁻¹ = U − Uv*RvU against direct truncated solves,
    with M(κ) = U + v*R₀(κ)v.
    """
    cutoff = cutoff_for(kappa, cutoff_const)
    free = build_truncated(model, None, cutoff)
    full = build_truncated(model, perturbation, cutoff)
    v = np.array(
        [[float(column.value(site)) for column in perturbation.columns] for site in free.sites],
        dtype=np.float64,
    ).reshape(free.dimension, perturbation.k)
    U = model.backend.to_float(perturbation.U)

    rows = [free.position(site) for site in sites]
    targets = np.zeros((free.dimension, len(sites)), dtype=np.float64)
    for j, row in enumerate(rows):
        targets[row, j] = 1.0
    free_on_sites = free.solve_dense(kappa, targets)
    free_on_v = free.solve_dense(kappa, v)
    full_on_sites = full.solve_dense(kappa, targets)
    full_on_v = full.solve_dense(kappa, v)

    coupling = U + v.T @ free_on_v
    coupling_inverse = np.linalg.inv(coupling)
    assembled = free_on_sites[rows, :] - free_on_v[rows, :] @ coupling_inverse @ free_on_v[rows, :].T
    resolvent_deviation = float(np.max(np.abs(assembled - full_on_sites[rows, :])))
    companion = U - U @ v.T @ full_on_v @ U
    coupling_deviation = float(np.max(np.abs(companion - coupling_inverse)))
    logger.info(
        f"Second resolvent check at kappa={kappa}: resolvent {resolvent_deviation:.2e}, "
        f"coupling {coupling_deviation:.2e}"
    )
    return SecondResolventCheck(kappa, resolvent_deviation, coupling_deviation)
