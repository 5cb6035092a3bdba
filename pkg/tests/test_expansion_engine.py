from fractions import Fraction

import pytest

from apps.threshold.analysis.threshold import ThresholdKind, classify, eigenspaces, intermediate_operators, projections
from apps.threshold.cli.instances import instance_for, regular_instance, search_instance
from apps.threshold.errors import LeadingNotInvertible, OrderExceedsCap
from apps.threshold.expansion import OperatorExpr, combine
from apps.threshold.expansion.cascade import M_coefficients, m_coefficients, neumann_cascade
from apps.threshold.expansion.closed_forms import closed_form_G0_G1
from apps.threshold.expansion.engine import resolvent_coefficients
from apps.threshold.free.free_model import build_free_model, free_kernel
from apps.threshold.graph.graph import KVertex, RaySite, star_graph
from apps.threshold.graph.ray_function import RayFunction
from apps.threshold.linalg.backends import RationalBackend
from apps.threshold.oracle.identities import identity_suite
from apps.threshold.oracle.truncated import sample_sites
from apps.threshold.perturbation.factored import empty_perturbation, joining_perturbation

KINDS = list(ThresholdKind)


def test_free_expressions_match_the_kernels():
    model = build_free_model(star_graph(2), RationalBackend())
    sites = model.graph.window_sites(4)

    for j in range(4):
        expr = OperatorExpr.free(model, j)
        for x in sites:
            for y in sites:
                assert expr.evaluate(x, y) == free_kernel(model, j, x, y)
    with pytest.raises(OrderExceedsCap):
        OperatorExpr.free(model, 4)


def test_outer_products_are_merged():
    model = build_free_model(star_graph(1), RationalBackend())
    graph = model.graph
    f = RayFunction.delta(graph, RaySite(1, 1))
    g = RayFunction.delta(graph, KVertex(0))
    backend = model.backend

    expr = OperatorExpr.outer(model, [f, f.scale(2)], backend.matrix([[1, 0], [0, 1]]), [g, g])
    assert expr.rank_bound() == 1
    assert expr.evaluate(RaySite(1, 1), KVertex(0)) == 3

    total = combine(model, [expr, -expr, OperatorExpr.identity(model)])
    assert total.evaluate(KVertex(0), KVertex(0)) == 1
    assert total.evaluate(RaySite(1, 1), KVertex(0)) == 0


def test_composition_with_a_dyad():
    model = build_free_model(star_graph(1), RationalBackend())
    graph = model.graph
    s = RayFunction.delta(graph, KVertex(0))
    projector = OperatorExpr.outer(model, [s], model.backend.matrix([[1]]), [s])

    composed = OperatorExpr.free(model, 0) @ projector
    assert composed.evaluate(KVertex(0), KVertex(0)) == 1
    assert composed.evaluate(RaySite(1, 2), KVertex(0)) == 0


def test_regular_leading_coefficient_by_hand():
    instance = regular_instance()
    coefficients = resolvent_coefficients(instance.model, instance.perturbation)
    s = KVertex(0)

    # K decouples from the ray; the K block of H is 1 + 1
    assert coefficients[0].evaluate(s, s) == Fraction(1, 2)
    assert coefficients[0].evaluate(RaySite(1, 2), RaySite(1, 3)) == 2


def test_no_perturbation_gives_the_free_expansion():
    model = build_free_model(star_graph(2), RationalBackend())
    coefficients = resolvent_coefficients(model, empty_perturbation(model.graph, model.backend))
    sites = model.graph.window_sites(3)

    assert coefficients.kind is ThresholdKind.REGULAR
    assert coefficients[-2].is_zero_on(sites)
    assert coefficients[-1].is_zero_on(sites)
    for order in (0, 1):
        assert coefficients[order].agrees_on(OperatorExpr.free(model, order), sites)


@pytest.mark.parametrize("kind", KINDS)
def test_singular_part_matches_the_threshold_type(kind):
    instance = instance_for(kind)
    coefficients = resolvent_coefficients(instance.model, instance.perturbation)
    sites = sample_sites(instance.graph, 8)

    assert coefficients.orders() == [-2, -1, 0, 1]
    has_bound = kind in (ThresholdKind.SECOND_KIND, ThresholdKind.THIRD_KIND)
    has_resonance = kind in (ThresholdKind.FIRST_KIND, ThresholdKind.THIRD_KIND)
    assert coefficients[-2].is_zero_on(sites) is not has_bound
    assert coefficients[-1].is_zero_on(sites) is not has_resonance


@pytest.mark.parametrize("kind", KINDS)
def test_identity_suite_passes(kind):
    instance = instance_for(kind)
    report = eigenspaces(instance.model, instance.perturbation)
    coefficients = resolvent_coefficients(instance.model, instance.perturbation, report)
    bound, resonance = projections(instance.model, instance.perturbation, report)

    ledger = identity_suite(
        instance.model, instance.perturbation, coefficients.coefficients, bound, resonance, report=report
    )

    assert ledger.passed, [check.name for check in ledger.failures]


@pytest.mark.parametrize("kind", KINDS)
def test_engine_agrees_with_closed_forms(kind):
    instance = instance_for(kind)
    report = eigenspaces(instance.model, instance.perturbation)
    coefficients = resolvent_coefficients(instance.model, instance.perturbation, report)
    closed = closed_form_G0_G1(instance.model, instance.perturbation, report)
    sites = sample_sites(instance.graph, 8)

    assert coefficients[0].agrees_on(closed[0], sites)
    assert coefficients[1].agrees_on(closed[1], sites)


def test_star_with_five_rays_agrees_with_closed_forms():
    model = build_free_model(star_graph(5), RationalBackend())
    joining = joining_perturbation(model)
    coefficients = resolvent_coefficients(model, joining)
    closed = closed_form_G0_G1(model, joining)
    sites = sample_sites(model.graph, 11)

    assert coefficients[0].agrees_on(closed[0], sites)
    assert coefficients[1].agrees_on(closed[1], sites)


def test_cascade_inverts_a_scalar_series():
    backend = RationalBackend()
    series = [backend.matrix([[2]]), backend.matrix([[1]]), backend.matrix([[0]])]

    coefficients = neumann_cascade(backend, series, backend.zeros(1, 1), 2)

    assert [c[0, 0] for c in coefficients] == [Fraction(1, 2), Fraction(-1, 4), Fraction(1, 8)]
    with pytest.raises(OrderExceedsCap):
        neumann_cascade(backend, series, backend.zeros(1, 1), 3)
    with pytest.raises(LeadingNotInvertible):
        neumann_cascade(backend, [backend.zeros(1, 1)], backend.zeros(1, 1), 0)


def test_leading_reduced_coefficient_is_the_moment_matrix():
    instance = instance_for(ThresholdKind.FIRST_KIND)
    ops = intermediate_operators(instance.model, instance.perturbation)
    backend = instance.model.backend

    M_list = M_coefficients(instance.model, instance.perturbation, 5)
    m_list = m_coefficients(backend, M_list, ops.M0_pinv, ops.Q)

    assert len(m_list) == 5
    assert backend.matrices_equal(m_list[0], ops.m0)


def _identity_ledger(model, perturbation):
    report = eigenspaces(model, perturbation)
    coefficients = resolvent_coefficients(model, perturbation, report)
    bound, resonance = projections(model, perturbation, report)
    return identity_suite(model, perturbation, coefficients.coefficients, bound, resonance, report=report)


@pytest.mark.parametrize("ray_count", [1, 2, 3, 5])
def test_identity_suite_on_the_star(ray_count):
    model = build_free_model(star_graph(ray_count), RationalBackend())

    ledger = _identity_ledger(model, joining_perturbation(model))

    assert ledger.passed, [check.name for check in ledger.failures]


def test_identity_suite_on_random_instances(random_instances):
    for model, perturbation in random_instances:
        ledger = _identity_ledger(model, perturbation)
        assert ledger.passed, [check.name for check in ledger.failures]


def _assert_closed_forms_agree(model, perturbation):
    report = eigenspaces(model, perturbation)
    coefficients = resolvent_coefficients(model, perturbation, report)
    closed = closed_form_G0_G1(model, perturbation, report)
    sites = sample_sites(model.graph, 8)

    assert coefficients[0].agrees_on(closed[0], sites)
    assert coefficients[1].agrees_on(closed[1], sites)


@pytest.mark.parametrize("kind", KINDS)
def test_searched_instances_agree_with_closed_forms(kind):
    instance = search_instance(kind)

    assert classify(instance.model, instance.perturbation) is kind
    _assert_closed_forms_agree(instance.model, instance.perturbation)


def test_random_instances_agree_with_closed_forms(random_instances):
    for model, perturbation in random_instances:
        _assert_closed_forms_agree(model, perturbation)
