"""
Small instances with a known threshold type.

The constructive generators are checked by hand:

  regular       star(1), V = |s⟩⟨s|                   M₀ = [2]
  first kind    star(N), V = J                         −Δ on the star
  second kind   star(1), V = −|s⟩⟨s|                  δ_s is a bound state
  third kind    star(2), V = −|s⟩⟨s| − |s⟩⟨f₁| − |f₁⟩⟨s| + W on ray 2,
                with W = [[−2, 1], [1, 4]] on the first two sites; ray 1 and
                s form a Neumann half-line (resonance s + 𝟏^(1)) and δ at
                site 1 of ray 2 is a bound state.

`search_instance` finds an instance of a requested type by enumerating
rank one and rank two perturbations built from deltas on a short window.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

import numpy as np

from ..analysis.threshold import ThresholdKind, classify_operators, intermediate_operators
from ..errors import DependentColumns, ThresholdError
from ..free.free_model import FreeModel, build_free_model
from ..graph.graph import GraphWithRays, KVertex, RaySite, star_graph
from ..graph.ray_function import RayFunction
from ..linalg.backends import RationalBackend, ScalarBackend
from ..perturbation.factored import FactoredPerturbation, build_factored, joining_perturbation

logger = logging.getLogger(__name__)

SEARCH_LIMIT = 2000


@dataclass(eq=False)
class Instance:
    name: str
    kind: ThresholdKind
    model: FreeModel
    perturbation: FactoredPerturbation

    @property
    def graph(self) -> GraphWithRays:
        return self.model.graph


def _model(graph: GraphWithRays, backend: Optional[ScalarBackend], kernel_cap: int) -> FreeModel:
    return build_free_model(graph, backend or RationalBackend(), kernel_cap=kernel_cap)


def _s(graph: GraphWithRays) -> RayFunction:
    return RayFunction.delta(graph, KVertex(0))


def regular_instance(backend: Optional[ScalarBackend] = None, kernel_cap: int = 8) -> Instance:
    model = _model(star_graph(1), backend, kernel_cap)
    perturbation = build_factored(model.graph, [_s(model.graph)], [[1]], model.backend)
    return Instance("regular", ThresholdKind.REGULAR, model, perturbation)


def first_kind_instance(
    ray_count: int = 3,
    backend: Optional[ScalarBackend] = None,
    kernel_cap: int = 8,
) -> Instance:
    model = _model(star_graph(ray_count), backend, kernel_cap)
    return Instance(f"star{ray_count}", ThresholdKind.FIRST_KIND, model, joining_perturbation(model))


def second_kind_instance(backend: Optional[ScalarBackend] = None, kernel_cap: int = 8) -> Instance:
    model = _model(star_graph(1), backend, kernel_cap)
    perturbation = build_factored(model.graph, [_s(model.graph)], [[-1]], model.backend)
    return Instance("second_kind", ThresholdKind.SECOND_KIND, model, perturbation)


def third_kind_instance(backend: Optional[ScalarBackend] = None, kernel_cap: int = 8) -> Instance:
    model = _model(star_graph(2), backend, kernel_cap)
    graph = model.graph
    s = KVertex(0)
    f1 = RaySite(1, 1)
    columns = [
        RayFunction.from_values(graph, {s: 1, f1: 1}),
        RayFunction.from_values(graph, {f1: 1}),
        RayFunction.from_values(graph, {RaySite(2, 1): Fraction(3, 2)}),
        RayFunction.from_values(graph, {RaySite(2, 1): Fraction(1, 2), RaySite(2, 2): 2}),
    ]
    U = [[-1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]
    perturbation = build_factored(graph, columns, U, model.backend)
    return Instance("third_kind", ThresholdKind.THIRD_KIND, model, perturbation)


def instance_for(kind: ThresholdKind, backend: Optional[ScalarBackend] = None, kernel_cap: int = 8) -> Instance:
    if kind is ThresholdKind.REGULAR:
        return regular_instance(backend, kernel_cap)
    if kind is ThresholdKind.FIRST_KIND:
        return first_kind_instance(3, backend, kernel_cap)
    if kind is ThresholdKind.SECOND_KIND:
        return second_kind_instance(backend, kernel_cap)
    return third_kind_instance(backend, kernel_cap)


# ----------------------------------------------------------------------
# Search
# ----------------------------------------------------------------------
def _column_pool(graph: GraphWithRays) -> List[RayFunction]:
    """Deltas on K and the first two sites of every ray, then their sums and differences."""
    sites = [KVertex(0)] + [RaySite(ray, n) for ray in range(1, graph.ray_count + 1) for n in (1, 2)]
    pool = [RayFunction.delta(graph, site) for site in sites]
    for a, b in itertools.combinations(sites, 2):
        pool.append(RayFunction.from_values(graph, {a: 1, b: 1}))
        pool.append(RayFunction.from_values(graph, {a: 1, b: -1}))
    return pool


def _signatures(k: int) -> Iterator[List[List[int]]]:
    for signs in itertools.product((1, -1), repeat=k):
        yield [[signs[i] if i == j else 0 for j in range(k)] for i in range(k)]
    if k == 2:
        yield [[0, 1], [1, 0]]
        yield [[0, -1], [-1, 0]]


def _candidates(graph: GraphWithRays) -> Iterator[Tuple[Tuple[RayFunction, ...], List[List[int]]]]:
    pool = _column_pool(graph)
    for k in (1, 2):
        for columns in itertools.combinations(pool, k):
            for U in _signatures(k):
                yield columns, U


def search_instance(
    kind: ThresholdKind,
    backend: Optional[ScalarBackend] = None,
    kernel_cap: int = 8,
    limit: int = SEARCH_LIMIT,
) -> Instance:
    """First enumerated (v, U) on star(1), then star(2), whose threshold has the requested type."""
    tried = 0
    for ray_count in (1, 2):
        model = _model(star_graph(ray_count), backend, kernel_cap)
        for columns, U in _candidates(model.graph):
            if tried >= limit:
                break
            tried += 1
            try:
                perturbation = build_factored(model.graph, list(columns), U, model.backend)
            except DependentColumns:
                continue
            found = classify_operators(intermediate_operators(model, perturbation))
            if found is kind:
                logger.info(f"Search found a {kind.value} instance on star({ray_count}) after {tried} candidates")
                return Instance(f"searched_{kind.value}", kind, model, perturbation)
    raise ThresholdError(f"no {kind.value} instance among the first {tried} candidates")


def describe_perturbation(perturbation: FactoredPerturbation) -> dict:
    """Columns by site label and U, for reports."""
    graph = perturbation.graph
    radius = max(perturbation.support_radius, 1)
    sites = graph.window_sites(radius)
    columns = []
    for column in perturbation.columns:
        columns.append({str(site): column.value(site) for site in sites if column.value(site) != 0})
    return {"columns": columns, "U": np.asarray(perturbation.U).tolist()}
