"""
Factored perturbations V = vUv*.

v is given by k finitely supported columns and U is a real symmetric k×k
matrix with U² = I.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..errors import (
    DependentColumns,
    NonSymmetricU,
    NonUnitaryU,
    NotFinitelySupported,
    RationalBackendUnsupported,
    ThresholdError,
)
from ..free.free_model import FreeModel
from ..graph.graph import GraphWithRays, KVertex, RaySite, SiteIndex
from ..graph.ray_function import RayFunction, RayPart, pair
from ..linalg.backends import ScalarBackend

logger = logging.getLogger(__name__)

Scalar = Any


@dataclass(frozen=True, eq=False)
class FactoredPerturbation:
    graph: GraphWithRays
    columns: Tuple[RayFunction, ...]
    U: np.ndarray
    backend: ScalarBackend

    @property
    def k(self) -> int:
        return len(self.columns)

    @property
    def support_radius(self) -> int:
        return max((column.support_radius() for column in self.columns), default=0)

    def coordinates(self, u: RayFunction) -> np.ndarray:
        """v*u"""
        return self.backend.vector([pair(column, u) for column in self.columns])

    def combine(self, coefficients: Sequence[Scalar]) -> RayFunction:
        """vΦ for a coordinate vector Φ."""
        total = RayFunction.zero(self.graph)
        for column, weight in zip(self.columns, coefficients):
            if weight != 0:
                total = total + column.scale(weight)
        return total

    def window_matrix(self, sites: Sequence[SiteIndex]) -> np.ndarray:
        """Dense V = vUv* restricted to a list of sites (float64)."""
        values = np.array([[float(column.value(site)) for column in self.columns] for site in sites], dtype=np.float64)
        if self.k == 0:
            return np.zeros((len(sites), len(sites)))
        return values @ self.backend.to_float(self.U) @ values.T


def _convert(u: RayFunction, backend: ScalarBackend) -> RayFunction:
    return RayFunction(
        u.graph,
        tuple(backend.scalar(v) for v in u.k_values),
        tuple(
            RayPart(tuple(backend.scalar(v) for v in part.head), tuple(backend.scalar(c) for c in part.tail))
            for part in u.rays
        ),
    )


def build_factored(
    graph: GraphWithRays,
    columns: Sequence[RayFunction],
    U: Any,
    backend: ScalarBackend,
) -> FactoredPerturbation:
    """Validate v and U and freeze the perturbation."""
    columns = tuple(_convert(column, backend) for column in columns)
    k = len(columns)
    u_matrix = backend.matrix(U, cols=k) if not isinstance(U, np.ndarray) else np.array(U, copy=True)
    if k and backend.exact:
        u_matrix = backend.matrix(u_matrix.tolist(), cols=k)
    elif k:
        u_matrix = u_matrix.astype(np.float64)
    else:
        u_matrix = backend.zeros(0, 0)

    if u_matrix.shape != (k, k):
        raise NonUnitaryU(f"U has shape {u_matrix.shape}, expected ({k}, {k})")
    for column in columns:
        if not column.is_finitely_supported():
            raise NotFinitelySupported("perturbation columns must be finitely supported")
    if not backend.matrices_equal(u_matrix, u_matrix.T):
        raise NonSymmetricU("U must be symmetric")
    if not backend.matrices_equal(u_matrix @ u_matrix, backend.identity(k)):
        raise NonUnitaryU("U must satisfy U² = I")

    if k:
        radius = max(column.support_radius() for column in columns)
        sites = graph.window_sites(max(radius, 1))
        stacked = backend.zeros(len(sites), k)
        for j, column in enumerate(columns):
            for i, site in enumerate(sites):
                stacked[i, j] = column.value(site)
        if backend.rank(stacked) < k:
            raise DependentColumns("the columns of v are linearly dependent")

    perturbation = FactoredPerturbation(graph, columns, u_matrix, backend)
    logger.debug(f"Factored perturbation with k={k}, support radius {perturbation.support_radius}")
    return perturbation


def empty_perturbation(graph: GraphWithRays, backend: ScalarBackend) -> FactoredPerturbation:
    return FactoredPerturbation(graph, (), backend.zeros(0, 0), backend)


def apply_V(perturbation: FactoredPerturbation, u: RayFunction) -> RayFunction:
    """v U (v* u)"""
    if perturbation.k == 0:
        return RayFunction.zero(perturbation.graph)
    weights = perturbation.U @ perturbation.coordinates(u)
    return perturbation.combine(list(weights))


def factor_dense(
    graph: GraphWithRays,
    entries: Mapping[Tuple[SiteIndex, SiteIndex], Scalar],
    backend: ScalarBackend,
) -> FactoredPerturbation:
    """
    Factor a finitely supported symmetric V given entrywise.

    V = Σ λ_j |u_j⟩⟨u_j| gives columns √|λ_j| u_j and U = diag(sign λ_j) for
    every eigenvalue above the rank tolerance.
    """
    if backend.exact:
        raise RationalBackendUnsupported("factor_dense needs the float backend; supply exact factors instead")
    sites: List[SiteIndex] = []
    for row, col in entries:
        for site in (row, col):
            graph.check_site(site)
            if site not in sites:
                sites.append(site)
    if not sites:
        return empty_perturbation(graph, backend)

    position = {site: i for i, site in enumerate(sites)}
    matrix = np.zeros((len(sites), len(sites)), dtype=np.float64)
    for (row, col), value in entries.items():
        matrix[position[row], position[col]] = float(value)
    values, vectors = backend.symmetric_eigen(matrix)
    largest = float(np.max(np.abs(values))) if values.size else 0.0
    keep = [i for i, value in enumerate(values) if largest > 0 and abs(value) > backend.rank_tol * largest]

    columns = []
    signs = []
    for i in keep:
        scale = np.sqrt(abs(values[i]))
        columns.append(
            RayFunction.from_values(graph, {site: float(scale * vectors[position[site], i]) for site in sites})
        )
        signs.append(1.0 if values[i] > 0 else -1.0)
    perturbation = build_factored(graph, columns, np.diag(signs) if signs else np.zeros((0, 0)), backend)

    reconstructed = perturbation.window_matrix(sites)
    residual = float(np.max(np.abs(reconstructed - matrix)))
    logger.debug(f"factor_dense: rank {len(keep)} of {len(sites)} sites, reconstruction residual {residual:.2e}")
    return perturbation


def joining_perturbation(model: FreeModel) -> FactoredPerturbation:
    """
    J = −Σ_α (|s_α⟩⟨f_α| + |f_α⟩⟨s_α|) restoring −Δ_G = H₀ + J.

    One column s_x per distinct joint vertex paired with the sum of the
    f_α jointed there, so v stays injective when rays share a joint.
    With h₀ = 2·id the K block of −Δ_G − H₀ is no longer zero and the
    operator is factored numerically.
    """
    graph = model.graph
    backend = model.backend
    if model.free_operator == "scaled_identity":
        return factor_dense(graph, joining_entries(model), backend)

    columns: List[RayFunction] = []
    blocks = []
    for joint in graph.distinct_joints:
        columns.append(RayFunction.delta(graph, KVertex(joint)))
        columns.append(RayFunction.from_values(graph, {RaySite(ray, 1): 1 for ray in graph.rays_at(joint)}))
        blocks.append(joint)
    k = len(columns)
    U = backend.zeros(k, k)
    for block in range(len(blocks)):
        U[2 * block, 2 * block + 1] = backend.scalar(-1)
        U[2 * block + 1, 2 * block] = backend.scalar(-1)
    return build_factored(graph, columns, U, backend)


def joining_entries(model: FreeModel) -> Dict[Tuple[SiteIndex, SiteIndex], Scalar]:
    """Entries of −Δ_G − H₀ on K and the first ray sites."""
    graph = model.graph
    entries: Dict[Tuple[SiteIndex, SiteIndex], Scalar] = {}
    h0 = model.backend.to_float(model.h0)
    for x in graph.k_vertices:
        i = graph.vertex_index[x]
        for y in graph.k_vertices:
            j = graph.vertex_index[y]
            if x == y:
                laplacian = graph.degree(x) + graph.joint_count(x)
            elif y in graph.neighbors[x]:
                laplacian = -1
            else:
                laplacian = 0
            value = laplacian - h0[i, j]
            if value != 0:
                entries[(KVertex(x), KVertex(y))] = value
    for ray in range(1, graph.ray_count + 1):
        joint = KVertex(graph.joint_of(ray))
        first = RaySite(ray, 1)
        entries[(joint, first)] = -1
        entries[(first, joint)] = -1
    return entries


def family_perturbation(model: FreeModel, E: Scalar, tau: Scalar) -> FactoredPerturbation:
    """
    V = (E − 2)|s⟩⟨s| + τJ on a graph with a single K vertex s.

    The eigenvectors of the 2×2 coupling involve square roots, so the
    operator is factored numerically.
    """
    graph = model.graph
    if len(graph.k_vertices) != 1:
        raise ThresholdError("the (E, tau) family lives on a graph with a single K vertex")
    s = KVertex(graph.k_vertices[0])
    entries: Dict[Tuple[SiteIndex, SiteIndex], Scalar] = {}
    if tau != 0:
        for key, value in joining_entries(model).items():
            entries[key] = float(tau) * float(value)
    potential = entries.get((s, s), 0.0) + float(E) - 2.0
    if potential != 0:
        entries[(s, s)] = potential
    else:
        entries.pop((s, s), None)
    if tau == 0:
        logger.warning(f"Family point E={E}, tau=0: the joining coupling vanishes and the rays decouple")
    return factor_dense(graph, entries, model.backend)
