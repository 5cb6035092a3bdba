from fractions import Fraction

import pytest

from apps.threshold.errors import (
    DisconnectedK,
    DuplicateEdge,
    NonSummablePair,
    SelfLoop,
    TailDegreeExceedsCap,
    ThresholdError,
    UnknownJoint,
)
from apps.threshold.graph.graph import KVertex, RaySite, build_graph, star_graph
from apps.threshold.graph.laplacian import apply_dirichlet_rays, apply_graph_laplacian, dense_laplacian
from apps.threshold.graph.ray_function import RayFunction, pair, poly_second_difference, space_membership


def test_star_graph_layout():
    graph = star_graph(3)

    assert graph.ray_count == 3
    assert graph.joint_count(0) == 3
    assert graph.rays_at(0) == (1, 2, 3)
    assert graph.distinct_joints == (0,)
    assert graph.window_sites(2) == [
        KVertex(0),
        RaySite(1, 1),
        RaySite(1, 2),
        RaySite(2, 1),
        RaySite(2, 2),
        RaySite(3, 1),
        RaySite(3, 2),
    ]


def test_site_labels():
    assert str(RaySite(2, 3)) == "3^(2)"
    assert str(KVertex("a")) == "a"


def test_ray_site_positions_start_at_one():
    with pytest.raises(ThresholdError):
        RaySite(1, 0)
    with pytest.raises(ThresholdError):
        RaySite(0, 1)


def test_build_graph_rejects_invalid_input():
    with pytest.raises(DisconnectedK):
        build_graph(["a", "b"], [], ["a"])
    with pytest.raises(SelfLoop):
        build_graph(["a"], [("a", "a")], ["a"])
    with pytest.raises(DuplicateEdge):
        build_graph(["a", "b"], [("a", "b"), ("b", "a")], ["a"])
    with pytest.raises(UnknownJoint):
        build_graph(["a"], [], ["z"])
    with pytest.raises(ThresholdError):
        build_graph(["a"], [], [])


def test_neighbors_follow_vertex_order():
    graph = build_graph(["a", "b", "c"], [("c", "a"), ("a", "b")], ["b", "c"])

    assert graph.neighbors["a"] == ("b", "c")
    assert graph.degree("a") == 2
    assert graph.joint_of(2) == "c"


def test_ray_function_values_and_tails():
    graph = star_graph(2)
    u = RayFunction.linear(graph, 1) + RayFunction.delta(graph, RaySite(2, 3), Fraction(1, 2))

    assert u.value(RaySite(1, 7)) == 7
    assert u.value(RaySite(2, 3)) == Fraction(1, 2)
    assert u.value(RaySite(2, 4)) == 0
    assert u.tail_degree(1) == 1
    assert u.tail_degree(2) == -1
    assert not u.is_finitely_supported()


def test_tail_cap_is_enforced():
    graph = star_graph(1)

    with pytest.raises(TailDegreeExceedsCap):
        RayFunction.from_parts(graph, [0], [[]], [(0, 0, 0, 1)], tail_cap=2)


def test_pair_needs_one_finitely_supported_factor():
    graph = star_graph(1)
    ones = RayFunction.ones(graph, 1)
    window = RayFunction.from_values(graph, {KVertex(0): 3, RaySite(1, 1): 1, RaySite(1, 2): 2})

    assert pair(ones, window) == 3
    assert pair(window, RayFunction.linear(graph, 1)) == 1 + 4
    with pytest.raises(NonSummablePair):
        pair(ones, RayFunction.linear(graph, 1))


def test_second_difference_of_polynomials():
    # 2n² − (n+1)² − (n−1)² = −2
    assert poly_second_difference((0, 0, 1)) == (-2,)
    assert poly_second_difference((5, 3)) == ()


def test_laplacian_kills_constants():
    graph = build_graph(["a", "b"], [("a", "b")], ["a", "b", "b"])
    constant = RayFunction.from_parts(graph, [1, 1], [[], [], []], [(1,), (1,), (1,)])

    assert apply_graph_laplacian(graph, constant).is_zero()


def test_laplacian_of_linear_ray_function():
    graph = star_graph(1)
    u = RayFunction.linear(graph, 1)

    assert apply_graph_laplacian(graph, u).agrees_with(-RayFunction.delta(graph, KVertex(0)))


def test_dirichlet_rays_ignore_k():
    graph = star_graph(1)
    u = RayFunction.from_values(graph, {KVertex(0): 5, RaySite(1, 1): 1})
    image = apply_dirichlet_rays(u)

    assert image.value(KVertex(0)) == 0
    assert image.value(RaySite(1, 1)) == 2
    assert image.value(RaySite(1, 2)) == -1
    assert image.value(RaySite(1, 3)) == 0


def test_dense_laplacian_matches_operator():
    graph = build_graph(["a", "b"], [("a", "b")], ["a", "b"])
    matrix = dense_laplacian(graph, 4)
    sites = graph.window_sites(4)
    u = RayFunction.from_values(graph, {KVertex("a"): 1, RaySite(2, 1): -2, RaySite(1, 2): 3})
    image = apply_graph_laplacian(graph, u)

    vector = [float(u.value(site)) for site in sites]
    dense = matrix @ vector
    for i, site in enumerate(sites):
        assert dense[i] == pytest.approx(float(image.value(site)))
    assert (matrix == matrix.T).all()


def test_space_membership_by_tail_degree():
    graph = star_graph(2)
    bump = RayFunction.delta(graph, RaySite(1, 2))
    linear = RayFunction.linear(graph, 2)

    assert space_membership(bump, Fraction(3), "L1weighted")
    assert not space_membership(linear, Fraction(3), "L1weighted")
    assert space_membership(linear, Fraction(1), "LinfDualWeighted")
    assert not space_membership(linear, Fraction(1, 2), "LinfDualWeighted")
    with pytest.raises(ValueError):
        space_membership(bump, Fraction(1), "l2")
