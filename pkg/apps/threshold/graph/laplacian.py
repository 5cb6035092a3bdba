"""Graph Laplacian and joint coupling acting on RayFunctions, plus dense window matrices."""

from __future__ import annotations

from typing import Any, Dict, List

import numpy as np

from .graph import GraphWithRays, KVertex, RaySite, SiteIndex
from .ray_function import RayFunction, RayPart, poly_second_difference

Scalar = Any


def _ray_second_difference(part: RayPart, boundary: Scalar) -> RayPart:
    """2u[n] − u[n+1] − u[n−1] on one ray, with u[0] = boundary."""
    head_length = len(part.head) + 1
    head = []
    for n in range(1, head_length + 1):
        previous = boundary if n == 1 else part.value(n - 1)
        head.append(2 * part.value(n) - part.value(n + 1) - previous)
    return RayPart(tuple(head), poly_second_difference(part.tail))


def apply_graph_laplacian(graph: GraphWithRays, u: RayFunction) -> RayFunction:
    """−Δ_G u, exact on polynomial tails."""
    k_values = []
    for vertex in graph.k_vertices:
        own = u.k_value(vertex)
        total = sum((own - u.k_value(other) for other in graph.neighbors[vertex]), 0)
        for ray in graph.rays_at(vertex):
            total += own - u.ray_value(ray, 1)
        k_values.append(total)
    rays = tuple(
        _ray_second_difference(part, u.k_value(graph.joint_of(alpha)))
        for alpha, part in enumerate(u.rays, start=1)
    )
    return RayFunction(graph, tuple(k_values), rays)


def apply_dirichlet_rays(u: RayFunction) -> RayFunction:
    """Ray part of H₀: Dirichlet half-line operators, K values set to zero."""
    rays = tuple(_ray_second_difference(part, 0) for part in u.rays)
    return RayFunction(u.graph, (0,) * len(u.k_values), rays)


def apply_joining(graph: GraphWithRays, u: RayFunction) -> RayFunction:
    """J u = −Σ_α (s_α⟨f_α, u⟩ + f_α⟨s_α, u⟩) evaluated pointwise."""
    values: Dict[SiteIndex, Scalar] = {}
    for alpha in range(1, graph.ray_count + 1):
        joint = KVertex(graph.joint_of(alpha))
        values[joint] = values.get(joint, 0) - u.ray_value(alpha, 1)
        first = RaySite(alpha, 1)
        values[first] = values.get(first, 0) - u.k_value(joint.vertex)
    return RayFunction.from_values(graph, values)


def site_positions(graph: GraphWithRays, cutoff: int) -> Dict[SiteIndex, int]:
    return {site: i for i, site in enumerate(graph.window_sites(cutoff))}


def dense_laplacian(graph: GraphWithRays, cutoff: int) -> np.ndarray:
    """−Δ_G on K and ray positions ≤ cutoff, Dirichlet beyond the cutoff (float64)."""
    index = site_positions(graph, cutoff)
    size = len(index)
    matrix = np.zeros((size, size), dtype=np.float64)
    for vertex in graph.k_vertices:
        i = index[KVertex(vertex)]
        matrix[i, i] = graph.degree(vertex) + graph.joint_count(vertex)
        for other in graph.neighbors[vertex]:
            matrix[i, index[KVertex(other)]] = -1.0
    for ray in range(1, graph.ray_count + 1):
        joint = index[KVertex(graph.joint_of(ray))]
        for n in range(1, cutoff + 1):
            i = index[RaySite(ray, n)]
            matrix[i, i] = 2.0
            if n == 1:
                matrix[i, joint] = matrix[joint, i] = -1.0
            else:
                matrix[i, index[RaySite(ray, n - 1)]] = -1.0
            if n < cutoff:
                matrix[i, index[RaySite(ray, n + 1)]] = -1.0
    return matrix


def window_vector(u: RayFunction, sites: List[SiteIndex]) -> np.ndarray:
    return np.array([float(u.value(site)) for site in sites], dtype=np.float64)
