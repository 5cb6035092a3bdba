"""
Free operator H₀ = h₀ ⊕ h_1 ⊕ … ⊕ h_N and the coefficients G₀,ⱼ of its
resolvent expansion at the threshold.

The K block of G₀,ⱼ is (−1)^{j/2} h₀^{−j/2−1} for even j and zero for odd j;
each ray block is the Dirichlet half-line kernel g_j. Applied to a finitely
supported function, G₀,ⱼ returns a function whose ray tails are polynomials of
degree ≤ j; those tails are recovered exactly by interpolation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from threading import Lock
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import NotFinitelySupported, NotPositiveDefinite, OrderExceedsCap
from ..graph.graph import GraphWithRays, KVertex, SiteIndex
from ..graph.laplacian import apply_dirichlet_rays
from ..graph.ray_function import DEFAULT_TAIL_CAP, RayFunction, interpolate, pair
from ..linalg.backends import ScalarBackend
from ..series.power_series import ray_resolvent_entry_series

logger = logging.getLogger(__name__)

Scalar = Any

DEFAULT_KERNEL_CAP = 8


@lru_cache(maxsize=None)
def ray_kernel(j: int, n: int, m: int) -> Fraction:
    """g_j[n, m] of the Dirichlet half-line, exact."""
    low, high = min(n, m), max(n, m)
    if j == 0:
        return Fraction(low)
    if j == 1:
        return Fraction(-n * m)
    if j == 2:
        return Fraction(-low, 6) + Fraction(low**3, 6) + Fraction(n * m * high, 2)
    if j == 3:
        return Fraction(5 * n * m, 24) - Fraction(n**3 * m, 6) - Fraction(n * m**3, 6)
    return ray_resolvent_entry_series(n, m, j).coefficient(j)


@dataclass(eq=False)
class FreeModel:
    graph: GraphWithRays
    backend: ScalarBackend
    h0: np.ndarray
    kernel_cap: int = DEFAULT_KERNEL_CAP
    tail_cap: int = DEFAULT_TAIL_CAP
    free_operator: str = "dirichlet"
    min_pivot: Optional[float] = None
    _inverse_powers: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _columns: Dict[tuple, List[RayFunction]] = field(default_factory=dict, repr=False)
    _lock: Lock = field(default_factory=Lock, repr=False)

    def h0_inverse_power(self, power: int) -> np.ndarray:
        """h₀^{−power}, memoized; concurrent fills store identical values."""
        cached = self._inverse_powers.get(power)
        if cached is not None:
            return cached
        base = self.backend.inverse(self.h0)
        value = self.backend.identity(self.h0.shape[0])
        for _ in range(power):
            value = value @ base
        with self._lock:
            self._inverse_powers.setdefault(power, value)
        logger.debug(f"Cached h0^-{power}")
        return self._inverse_powers[power]

    def check_order(self, j: int) -> None:
        if j < 0 or j > self.kernel_cap:
            raise OrderExceedsCap(f"kernel order {j} outside 0..{self.kernel_cap}")


def _dirichlet_h0(graph: GraphWithRays, backend: ScalarBackend) -> np.ndarray:
    size = len(graph.k_vertices)
    h0 = backend.zeros(size, size)
    for vertex in graph.k_vertices:
        i = graph.vertex_index[vertex]
        h0[i, i] = backend.scalar(graph.degree(vertex) + graph.joint_count(vertex))
        for other in graph.neighbors[vertex]:
            h0[i, graph.vertex_index[other]] = backend.scalar(-1)
    return h0


def _positive_definite_certificate(h0: np.ndarray, backend: ScalarBackend) -> float:
    """Smallest LDLᵀ pivot (rational) or eigenvalue (float); raises when not positive."""
    if backend.exact:
        work = np.array(h0, dtype=object, copy=True)
        size = work.shape[0]
        pivots: List[Fraction] = []
        for k in range(size):
            pivot = work[k, k]
            if pivot <= 0:
                raise NotPositiveDefinite(f"h0 pivot {k} is {pivot}")
            pivots.append(pivot)
            for i in range(k + 1, size):
                factor = work[i, k] / pivot
                work[i, k:] = work[i, k:] - factor * work[k, k:]
        return float(min(pivots)) if pivots else float("inf")
    values, _ = backend.symmetric_eigen(h0)
    smallest = float(values[-1])
    if smallest <= backend.rank_tol:
        raise NotPositiveDefinite(f"smallest eigenvalue of h0 is {smallest:.3e}")
    return smallest


def build_free_model(
    graph: GraphWithRays,
    backend: ScalarBackend,
    kernel_cap: int = DEFAULT_KERNEL_CAP,
    tail_cap: int = DEFAULT_TAIL_CAP,
    free_operator: str = "dirichlet",
) -> FreeModel:
    """h₀ with the chosen convention and its positivity certificate."""
    if free_operator == "dirichlet":
        h0 = _dirichlet_h0(graph, backend)
    elif free_operator == "scaled_identity":
        h0 = backend.identity(len(graph.k_vertices)) * backend.scalar(2)
    else:
        raise ValueError(f"unknown free operator {free_operator!r}")
    certificate = _positive_definite_certificate(h0, backend)
    logger.debug(f"Free model on {len(graph.k_vertices)} K vertices, h0 certificate {certificate:.4g}")
    return FreeModel(graph, backend, h0, kernel_cap, tail_cap, free_operator, certificate)


def free_kernel(model: FreeModel, j: int, x: SiteIndex, y: SiteIndex) -> Scalar:
    """G₀,ⱼ[x, y]"""
    model.check_order(j)
    backend = model.backend
    if isinstance(x, KVertex) and isinstance(y, KVertex):
        if j % 2:
            return backend.scalar(0)
        index = model.graph.vertex_index
        sign = -1 if (j // 2) % 2 else 1
        return sign * model.h0_inverse_power(j // 2 + 1)[index[x.vertex], index[y.vertex]]
    if isinstance(x, KVertex) or isinstance(y, KVertex) or x.ray != y.ray:
        return backend.scalar(0)
    return backend.scalar(ray_kernel(j, x.position, y.position))


def apply_free_coefficient(model: FreeModel, j: int, u: RayFunction) -> RayFunction:
    """G₀,ⱼ u for finitely supported u, with exact polynomial tails of degree ≤ j."""
    model.check_order(j)
    if not u.is_finitely_supported():
        raise NotFinitelySupported("free coefficients are applied to finitely supported functions only")
    backend = model.backend
    graph = model.graph

    k_count = len(graph.k_vertices)
    if j % 2 == 0 and k_count:
        sign = -1 if (j // 2) % 2 else 1
        k_vector = backend.vector(u.k_values)
        k_values = list(sign * (model.h0_inverse_power(j // 2 + 1) @ k_vector))
    else:
        k_values = [backend.scalar(0)] * k_count

    heads: List[List[Scalar]] = []
    tails: List[tuple] = []
    for part in u.rays:
        support = [(m, part.value(m)) for m in range(1, len(part.head) + 1) if part.value(m) != 0]
        if not support:
            heads.append([])
            tails.append(())
            continue
        reach = support[-1][0]

        def column_value(n: int) -> Scalar:
            total = backend.scalar(0)
            for m, weight in support:
                total += backend.scalar(ray_kernel(j, n, m)) * weight
            return total

        heads.append([column_value(n) for n in range(1, reach + 1)])
        points = list(range(reach + 1, reach + j + 2))
        tails.append(interpolate(points, [column_value(n) for n in points]))
    return RayFunction.from_parts(graph, k_values, heads, tails, tail_cap=model.tail_cap)


def apply_free_hamiltonian(model: FreeModel, u: RayFunction) -> RayFunction:
    """H₀ u = h₀ on K ⊕ Dirichlet half-lines, independent of −Δ_G."""
    backend = model.backend
    rays_part = apply_dirichlet_rays(u)
    k_values = tuple(model.h0 @ backend.vector(u.k_values)) if u.k_values else ()
    return RayFunction(u.graph, k_values, rays_part.rays)


def free_columns(model: FreeModel, perturbation, j: int) -> List[RayFunction]:
    """G₀,ⱼ v_i for every column of a factored perturbation, memoized on the model."""
    key = (perturbation, j)
    cached = model._columns.get(key)
    if cached is not None:
        return cached
    columns = [apply_free_coefficient(model, j, column) for column in perturbation.columns]
    with model._lock:
        model._columns.setdefault(key, columns)
    return model._columns[key]


def Mj_matrix(model: FreeModel, perturbation, j: int) -> np.ndarray:
    """M_j = v*G₀,ⱼv, plus U when j = 0."""
    backend = model.backend
    columns = perturbation.columns
    images = free_columns(model, perturbation, j)
    k = len(columns)
    out = backend.zeros(k, k)
    for a in range(k):
        for b in range(k):
            out[a, b] = backend.scalar(pair(columns[a], images[b]))
    if j == 0:
        out = out + perturbation.U
    return out
