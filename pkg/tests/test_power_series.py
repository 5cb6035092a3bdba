from fractions import Fraction

import pytest

from apps.threshold.errors import DivisionByZeroConstantTerm
from apps.threshold.series.power_series import (
    Series,
    divide_by_kappa,
    inv,
    mu_series,
    ray_resolvent_entry_series,
    sqrt_one_plus,
)


def test_series_arithmetic_keeps_the_lower_order():
    a = Series.of([1, 2, 3], 4)
    b = Series.of([0, 1], 2)

    total = a + b
    assert total.order == 2
    assert total.coeffs == (1, 3, 3)
    assert (a * b).coeffs == (0, 1, 2)
    with pytest.raises(IndexError):
        total.coefficient(3)


def test_geometric_series_inverse():
    one_minus_kappa = Series.of([1, -1], 5)

    assert inv(one_minus_kappa).coeffs == (1,) * 6
    assert (one_minus_kappa ** -2).coeffs == (1, 2, 3, 4, 5, 6)
    with pytest.raises(DivisionByZeroConstantTerm):
        inv(Series.variable(3))


def test_divide_by_kappa():
    a = Series.of([0, 2, 4], 3)

    assert divide_by_kappa(a) == Series.of([2, 4], 2)
    with pytest.raises(DivisionByZeroConstantTerm):
        divide_by_kappa(Series.of([1, 1], 3))


def test_square_root_squares_back():
    a = Series.of([0, 1, Fraction(1, 3)], 6)
    root = sqrt_one_plus(a)

    assert root * root == Series.constant(1, 6) + a


def test_mu_series_solves_its_quadratic():
    order = 8
    mu = mu_series(order)
    kappa = Series.variable(order)

    assert mu.coeffs[:4] == (1, -1, Fraction(1, 2), Fraction(-1, 8))
    assert (mu * mu - (Series.constant(2, order) + kappa * kappa) * mu + 1).is_zero()


@pytest.mark.parametrize("n,m", [(1, 1), (1, 4), (3, 2), (5, 5)])
def test_ray_resolvent_leading_coefficients(n, m):
    series = ray_resolvent_entry_series(n, m, 1)

    assert series.coefficient(0) == min(n, m)
    assert series.coefficient(1) == -n * m


def test_ray_resolvent_positions_start_at_one():
    with pytest.raises(ValueError):
        ray_resolvent_entry_series(0, 1, 2)
