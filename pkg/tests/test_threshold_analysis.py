from fractions import Fraction

import pytest

import apps.threshold.analysis.threshold as threshold_module
from apps.threshold.analysis.threshold import (
    ThresholdKind,
    classify,
    eigenspaces,
    intermediate_operators,
    is_generalized_eigenfunction,
    projections,
    w_apply,
    z_apply,
)
from apps.threshold.cli.instances import instance_for, second_kind_instance, third_kind_instance
from apps.threshold.errors import ConsistencyViolation, TailDegreeTooHigh
from apps.threshold.free.free_model import build_free_model
from apps.threshold.graph.graph import KVertex, RaySite, star_graph
from apps.threshold.graph.ray_function import RayFunction, pair
from apps.threshold.linalg.backends import FloatBackend, RationalBackend
from apps.threshold.perturbation.factored import family_perturbation, joining_perturbation


@pytest.mark.parametrize("ray_count", [1, 2, 3, 5])
def test_star_is_first_kind(ray_count):
    model = build_free_model(star_graph(ray_count), RationalBackend())
    joining = joining_perturbation(model)

    report = eigenspaces(model, joining)

    assert report.classification is ThresholdKind.FIRST_KIND
    assert [list(row) for row in report.M0] == [[Fraction(1, ray_count), -1], [-1, ray_count]]
    assert report.dim_bound == 0
    assert report.dim_resonance == 1
    assert report.dim_nonresonance == ray_count - 1
    assert report.resonance_space_nonzero


@pytest.mark.parametrize("ray_count", [1, 3])
def test_star_resonance_is_the_constant_function(ray_count):
    model = build_free_model(star_graph(ray_count), RationalBackend())
    report = eigenspaces(model, joining_perturbation(model))

    resonance = report.resonance[0].function
    level = resonance.value(KVertex(0))
    assert level != 0
    for ray in range(1, ray_count + 1):
        assert resonance.tail(ray) == (level,)
        for n in range(1, 6):
            assert resonance.value(RaySite(ray, n)) == level


@pytest.mark.parametrize("kind", list(ThresholdKind))
def test_instances_classify_as_built(kind):
    instance = instance_for(kind)

    assert classify(instance.model, instance.perturbation) is kind


@pytest.mark.parametrize("kind", list(ThresholdKind))
def test_dimensions_add_up_to_the_ray_count(kind):
    instance = instance_for(kind)
    report = eigenspaces(instance.model, instance.perturbation)

    assert report.dim_nonresonance + report.dim_resonance == instance.graph.ray_count
    if kind is ThresholdKind.REGULAR:
        assert not report.resonance_space_nonzero
    if kind in (ThresholdKind.SECOND_KIND, ThresholdKind.THIRD_KIND):
        assert report.dim_bound >= 1
    else:
        assert report.dim_bound == 0


@pytest.mark.parametrize("kind", list(ThresholdKind))
def test_basis_functions_solve_the_threshold_equation(kind):
    instance = instance_for(kind)
    report = eigenspaces(instance.model, instance.perturbation)

    for item in report.bound:
        assert item.function.is_finitely_supported() or item.function.tail_degree() == -1
        assert is_generalized_eigenfunction(instance.model, instance.perturbation, item.function)
    for item in report.resonance:
        assert item.function.tail_degree() == 0
        assert is_generalized_eigenfunction(instance.model, instance.perturbation, item.function)
    for item in report.nonresonance:
        assert item.function.tail_degree() == 1
        assert is_generalized_eigenfunction(instance.model, instance.perturbation, item.function)


def test_second_kind_bound_state_and_projection():
    instance = second_kind_instance()
    report = eigenspaces(instance.model, instance.perturbation)
    s = KVertex(0)

    assert report.dim_bound == 1
    state = report.bound[0].function
    assert state.value(RaySite(1, 1)) == 0
    assert state.value(s) != 0

    bound, resonance = projections(instance.model, instance.perturbation, report)
    assert bound.evaluate(s, s) == 1
    assert bound.evaluate(s, RaySite(1, 1)) == 0
    assert resonance.is_zero_on(instance.graph.window_sites(3))


def test_third_kind_has_both_resonance_and_bound_state():
    instance = third_kind_instance()
    report = eigenspaces(instance.model, instance.perturbation)

    assert report.classification is ThresholdKind.THIRD_KIND
    assert report.dim_bound >= 1
    assert report.dim_resonance >= 1


@pytest.mark.parametrize("kind", [ThresholdKind.FIRST_KIND, ThresholdKind.SECOND_KIND, ThresholdKind.THIRD_KIND])
def test_projections_are_symmetric_and_idempotent(kind):
    instance = instance_for(kind)
    sites = instance.graph.window_sites(4)
    bound, resonance = projections(instance.model, instance.perturbation)

    for projection in (bound, resonance):
        for x in sites:
            for y in sites:
                assert projection.evaluate(x, y) == projection.evaluate(y, x)
    assert (bound @ bound).agrees_on(bound, sites)


def test_float_backend_agrees_on_the_star():
    model = build_free_model(star_graph(3), FloatBackend())
    report = eigenspaces(model, joining_perturbation(model))

    assert report.classification is ThresholdKind.FIRST_KIND
    assert report.dim_nonresonance == 2
    assert set(report.orthonormal) == {"bound", "resonance", "nonresonance"}


def test_w_needs_at_most_linear_tails():
    instance = instance_for(ThresholdKind.FIRST_KIND)
    ops = intermediate_operators(instance.model, instance.perturbation)

    coordinates = w_apply(ops, RayFunction.linear(instance.graph, 1))
    assert len(coordinates) == ops.k
    with pytest.raises(TailDegreeTooHigh):
        w_apply(ops, RayFunction.ray_power(instance.graph, 1, 2))


@pytest.mark.parametrize("E", [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(8)])
@pytest.mark.parametrize("tau", [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)])
def test_family_resonance_sits_on_the_curve(E, tau):
    model = build_free_model(star_graph(2), FloatBackend(1e-9))
    report = eigenspaces(model, family_perturbation(model, E, tau))

    assert report.resonance_space_nonzero == (2 * tau * tau - E == 0)


def _dot(first, second):
    return sum((a * b for a, b in zip(first, second)), 0)


def _assert_strata(model, perturbation, report):
    assert report.dim_nonresonance + report.dim_resonance == model.graph.ray_count
    for item in report.bound:
        assert item.function.tail_degree() == -1
    for item in report.resonance:
        assert item.function.tail_degree() == 0
    for item in report.nonresonance:
        assert item.function.tail_degree() == 1
    for item in report.bound + report.resonance + report.nonresonance:
        assert is_generalized_eigenfunction(model, perturbation, item.function)

    for i, first in enumerate(report.bound):
        for second in report.bound[i + 1 :]:
            assert pair(first.function, second.function) == 0
        for item in report.resonance:
            assert pair(first.function, item.function) == 0
    for stratum in (report.resonance, report.nonresonance):
        for i, first in enumerate(stratum):
            for second in stratum[i + 1 :]:
                assert _dot(first.leading, second.leading) == 0


def test_strata_on_random_instances(random_instances):
    kinds = set()
    for model, perturbation in random_instances:
        report = eigenspaces(model, perturbation)
        kinds.add(report.classification)
        _assert_strata(model, perturbation, report)

    assert {ThresholdKind.REGULAR, ThresholdKind.FIRST_KIND} <= kinds


@pytest.mark.parametrize("ray_count", [1, 2, 3, 5])
def test_strata_on_the_star(ray_count):
    model = build_free_model(star_graph(ray_count), RationalBackend())
    joining = joining_perturbation(model)

    _assert_strata(model, joining, eigenspaces(model, joining))


@pytest.mark.parametrize("kind", [ThresholdKind.SECOND_KIND, ThresholdKind.THIRD_KIND])
def test_strata_with_bound_states(kind):
    instance = instance_for(kind)

    _assert_strata(instance.model, instance.perturbation, eigenspaces(instance.model, instance.perturbation))


def test_broken_dimension_count_is_an_error(monkeypatch):
    instance = instance_for(ThresholdKind.FIRST_KIND)
    backend = instance.model.backend
    monkeypatch.setattr(threshold_module, "nonresonance_domain", lambda ops: backend.zero_subspace(ops.k))
    monkeypatch.setattr(threshold_module, "kernel_v_moments", lambda ops: backend.zero_subspace(ops.ray_count))

    with pytest.raises(ConsistencyViolation):
        eigenspaces(instance.model, instance.perturbation)


def test_z_maps_the_kernel_of_M0_to_threshold_solutions():
    instance = instance_for(ThresholdKind.FIRST_KIND)
    ops = intermediate_operators(instance.model, instance.perturbation)

    for phi in ops.Q_space.columns():
        function = z_apply(ops, list(phi))
        assert function.tail_degree() <= 1
        assert is_generalized_eigenfunction(instance.model, instance.perturbation, function)


def test_z_of_the_second_kind_kernel_is_a_bound_state():
    instance = second_kind_instance()
    ops = intermediate_operators(instance.model, instance.perturbation)

    (phi,) = ops.S_space.columns()
    state = z_apply(ops, list(phi))
    assert state.tail_degree() == -1
    assert not state.is_zero()
