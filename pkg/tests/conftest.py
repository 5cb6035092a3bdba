import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

# Tests import the package as ``apps.threshold``.
repo_root = Path(__file__).resolve().parents[1]
if str(repo_root) not in sys.path:
    sys.path.insert(0, str(repo_root))

from apps.threshold.free.free_model import build_free_model  # noqa: E402
from apps.threshold.graph.graph import KVertex, RaySite, build_graph  # noqa: E402
from apps.threshold.graph.ray_function import RayFunction  # noqa: E402
from apps.threshold.linalg.backends import RationalBackend  # noqa: E402
from apps.threshold.perturbation.factored import build_factored, joining_perturbation  # noqa: E402

RANDOM_SEED = 2024
RANDOM_COUNT = 30


def _random_graph(rng):
    vertex_count = int(rng.integers(1, 6))
    vertices = list(range(vertex_count))
    edges = [(i, i + 1) for i in range(vertex_count - 1)]
    for _ in range(int(rng.integers(0, 3))):
        a, b = sorted(int(x) for x in rng.choice(vertex_count, size=2, replace=True))
        if a != b and (a, b) not in edges:
            edges.append((a, b))
    ray_count = int(rng.integers(1, 4))
    joints = [int(rng.integers(0, vertex_count)) for _ in range(ray_count)]
    return build_graph(vertices, edges, joints)


def _random_involution(backend, rng, k):
    """U = I − 2P with P the orthogonal projection onto a random rational subspace."""
    rank = int(rng.integers(0, k + 1))
    if rank == 0:
        return backend.identity(k)
    W = backend.matrix([[int(x) for x in row] for row in rng.integers(-2, 3, size=(k, rank))])
    return backend.identity(k) - 2 * backend.orthogonal_projection(backend.span(W))


def random_factored_instance(rng):
    graph = _random_graph(rng)
    model = build_free_model(graph, RationalBackend())
    sites = [KVertex(v) for v in graph.k_vertices]
    sites += [RaySite(ray, n) for ray in range(1, graph.ray_count + 1) for n in range(1, 4)]
    k = int(rng.integers(1, min(3, len(sites)) + 1))
    pivots = [sites[int(i)] for i in rng.choice(len(sites), size=k, replace=False)]
    columns = []
    for pivot in pivots:
        values = {site: Fraction(int(rng.integers(-2, 3))) for site in sites if site not in pivots}
        values[pivot] = Fraction(1)
        columns.append(RayFunction.from_values(graph, values))
    U = _random_involution(model.backend, rng, k)
    return model, build_factored(graph, columns, U, model.backend)


@pytest.fixture(scope="session")
def random_instances():
    """Seeded factored perturbations plus the joining operator on random graphs."""
    rng = np.random.default_rng(RANDOM_SEED)
    instances = [random_factored_instance(rng) for _ in range(RANDOM_COUNT)]
    for _ in range(5):
        model = build_free_model(_random_graph(rng), RationalBackend())
        instances.append((model, joining_perturbation(model)))
    return instances
