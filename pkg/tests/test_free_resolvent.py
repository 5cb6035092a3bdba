from fractions import Fraction

import pytest

from apps.threshold.errors import NotFinitelySupported, OrderExceedsCap
from apps.threshold.free.free_model import (
    Mj_matrix,
    apply_free_coefficient,
    apply_free_hamiltonian,
    build_free_model,
    free_kernel,
    ray_kernel,
)
from apps.threshold.graph.graph import KVertex, RaySite, build_graph, star_graph
from apps.threshold.graph.ray_function import RayFunction
from apps.threshold.linalg.backends import FloatBackend, RationalBackend
from apps.threshold.perturbation.factored import build_factored
from apps.threshold.series.power_series import ray_resolvent_entry_series


def _g(j, n, m):
    return Fraction(0) if n == 0 else ray_kernel(j, n, m)


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_closed_form_kernels_match_the_series(j):
    for n in range(1, 21):
        for m in range(1, 21):
            assert ray_kernel(j, n, m) == ray_resolvent_entry_series(n, m, j).coefficient(j)


@pytest.mark.parametrize("j", [2, 3, 4, 5])
def test_kernels_satisfy_the_dirichlet_recursion(j):
    # h g_j = −g_{j−2} with g_j[0, m] = 0
    for m in range(1, 8):
        for n in range(1, 8):
            left = 2 * _g(j, n, m) - _g(j, n + 1, m) - _g(j, n - 1, m)
            assert left == -_g(j - 2, n, m)


def test_leading_kernel_inverts_the_half_line():
    for m in range(1, 6):
        for n in range(1, 6):
            left = 2 * _g(0, n, m) - _g(0, n + 1, m) - _g(0, n - 1, m)
            assert left == (1 if n == m else 0)
            assert 2 * _g(1, n, m) - _g(1, n + 1, m) - _g(1, n - 1, m) == 0


def test_kernels_are_symmetric():
    for j in range(6):
        assert ray_kernel(j, 2, 5) == ray_kernel(j, 5, 2)


def test_star_k_block():
    model = build_free_model(star_graph(3), RationalBackend(), kernel_cap=4)
    s = KVertex(0)

    assert model.h0[0, 0] == 3
    assert free_kernel(model, 0, s, s) == Fraction(1, 3)
    assert free_kernel(model, 1, s, s) == 0
    assert free_kernel(model, 2, s, s) == Fraction(-1, 9)
    assert free_kernel(model, 0, s, RaySite(1, 1)) == 0
    assert free_kernel(model, 0, RaySite(1, 2), RaySite(2, 2)) == 0
    assert free_kernel(model, 2, RaySite(1, 2), RaySite(1, 3)) == ray_kernel(2, 2, 3)
    with pytest.raises(OrderExceedsCap):
        free_kernel(model, 5, s, s)


def test_scaled_identity_free_operator():
    graph = build_graph(["a", "b"], [("a", "b")], ["a"])
    model = build_free_model(graph, RationalBackend(), free_operator="scaled_identity")

    assert free_kernel(model, 0, KVertex("a"), KVertex("a")) == Fraction(1, 2)
    assert free_kernel(model, 0, KVertex("a"), KVertex("b")) == 0
    with pytest.raises(ValueError):
        build_free_model(graph, RationalBackend(), free_operator="neumann")


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_applied_coefficients_have_exact_tails(j):
    graph = star_graph(2)
    model = build_free_model(graph, RationalBackend(), kernel_cap=4)
    u = RayFunction.from_values(graph, {RaySite(1, 1): 2, RaySite(1, 3): -1, RaySite(2, 2): Fraction(1, 2)})

    image = apply_free_coefficient(model, j, u)

    assert image.tail_degree() <= j
    for n in range(1, 15):
        expected = 2 * ray_kernel(j, n, 1) - ray_kernel(j, n, 3)
        assert image.value(RaySite(1, n)) == expected
        assert image.value(RaySite(2, n)) == Fraction(1, 2) * ray_kernel(j, n, 2)


def test_free_coefficients_need_finite_support():
    graph = star_graph(1)
    model = build_free_model(graph, RationalBackend())

    with pytest.raises(NotFinitelySupported):
        apply_free_coefficient(model, 0, RayFunction.ones(graph, 1))


def test_free_hamiltonian_inverts_the_leading_coefficient():
    graph = build_graph(["a", "b", "c"], [("a", "b"), ("b", "c")], ["a", "c", "c"])
    model = build_free_model(graph, RationalBackend())
    u = RayFunction.from_values(graph, {KVertex("b"): 1, RaySite(1, 2): 3, RaySite(3, 1): -2})

    g0 = apply_free_coefficient(model, 0, u)
    g2 = apply_free_coefficient(model, 2, u)

    assert apply_free_hamiltonian(model, g0).agrees_with(u)
    assert apply_free_hamiltonian(model, g2).agrees_with(-g0)


def test_float_model_matches_rational_model():
    graph = star_graph(2)
    exact = build_free_model(graph, RationalBackend())
    approx = build_free_model(graph, FloatBackend())
    u = RayFunction.from_values(graph, {KVertex(0): 1, RaySite(2, 2): 1})

    first = apply_free_coefficient(exact, 2, u)
    second = apply_free_coefficient(approx, 2, u)
    for site in graph.window_sites(6):
        assert float(second.value(site)) == pytest.approx(float(first.value(site)), abs=1e-12)


def test_M0_of_a_potential_at_the_joint():
    model = build_free_model(star_graph(1), RationalBackend())
    perturbation = build_factored(model.graph, [RayFunction.delta(model.graph, KVertex(0))], [[1]], model.backend)

    assert Mj_matrix(model, perturbation, 0)[0, 0] == 2
    assert Mj_matrix(model, perturbation, 1)[0, 0] == 0
    assert Mj_matrix(model, perturbation, 2)[0, 0] == -1
