from fractions import Fraction

import numpy as np
import pytest

from apps.threshold.errors import AsymmetricInput, InvalidFraction, RationalBackendUnsupported, SingularMatrix
from apps.threshold.linalg.backends import FloatBackend, RationalBackend, get_backend
from apps.threshold.linalg.jacobi import symmetric_eigen


def test_get_backend_by_name():
    assert get_backend("rational").exact
    assert get_backend(" Float ", rank_tol=1e-6).rank_tol == 1e-6
    with pytest.raises(ValueError):
        get_backend("quad")


def test_rational_kernel_is_exact():
    backend = RationalBackend()
    a = backend.matrix([[1, 2, 3], [2, 4, 6]])
    kernel = backend.kernel(a)

    assert kernel.shape == (3, 2)
    assert backend.is_zero_matrix(a @ kernel)
    assert backend.rank(a) == 1


def test_rational_inverse_and_solve():
    backend = RationalBackend()
    a = backend.matrix([[2, 1], [1, 3]])
    inverse = backend.inverse(a)

    assert inverse[0, 0] == Fraction(3, 5)
    assert inverse[0, 1] == Fraction(-1, 5)
    assert backend.matrices_equal(a @ inverse, backend.identity(2))
    assert list(backend.solve(a, backend.vector([3, 4]))) == [1, 1]
    with pytest.raises(SingularMatrix):
        backend.inverse(backend.matrix([[1, 1], [1, 1]]))


def test_rational_pseudo_inverse_of_singular_symmetric_matrix():
    backend = RationalBackend()
    a = backend.matrix([[1, 1], [1, 1]])
    pinv = backend.pseudo_inverse(a)

    assert pinv[0, 0] == Fraction(1, 4)
    assert backend.matrices_equal(a @ pinv @ a, a)
    assert backend.matrices_equal(pinv @ a @ pinv, pinv)


def test_null_space_requires_symmetry():
    backend = RationalBackend()
    with pytest.raises(AsymmetricInput):
        backend.null_space(backend.matrix([[0, 1], [0, 0]]))


def test_subspace_operations():
    backend = RationalBackend()
    first = backend.span(backend.matrix([[1, 0], [0, 1], [0, 0]]))
    second = backend.span(backend.matrix([[1], [1], [1]]))
    plane = backend.span(backend.matrix([[0, 1], [1, 0], [0, 1]]))

    assert backend.subspace_intersect(first, second).dim == 0
    line = backend.subspace_intersect(first, plane)
    assert line.dim == 1
    assert backend.is_zero_matrix(line.basis[2, :])

    rest = backend.subspace_orthocomplement_within(first, line)
    assert rest.dim == 1
    assert backend.is_zero_matrix(line.basis.T @ rest.basis)

    projection = backend.orthogonal_projection(second)
    assert projection[0, 1] == Fraction(1, 3)
    assert backend.matrices_equal(projection @ projection, projection)


def test_rational_backend_has_no_eigensolver():
    backend = RationalBackend()
    with pytest.raises(RationalBackendUnsupported):
        backend.symmetric_eigen(backend.identity(2))


def test_float_backend_rank_decisions():
    backend = FloatBackend(rank_tol=1e-9)
    a = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-13]])

    assert backend.null_space(a).dim == 1
    with pytest.raises(SingularMatrix):
        backend.inverse(a)
    pinv = backend.pseudo_inverse(np.array([[2.0, 0.0], [0.0, 0.0]]))
    assert pinv[0, 0] == pytest.approx(0.5)
    assert pinv[1, 1] == 0.0


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(7)
    raw = rng.normal(size=(6, 6))
    matrix = raw + raw.T

    values, vectors = symmetric_eigen(matrix)

    assert np.allclose(values, np.sort(np.linalg.eigvalsh(matrix))[::-1])
    assert np.allclose(vectors.T @ vectors, np.eye(6), atol=1e-12)
    assert np.allclose(matrix @ vectors, vectors * values, atol=1e-10)


def test_jacobi_handles_empty_and_diagonal_input():
    values, vectors = symmetric_eigen(np.zeros((0, 0)))
    assert values.shape == (0,)

    values, _ = symmetric_eigen(np.diag([1.0, 3.0, 2.0]))
    assert list(values) == [3.0, 2.0, 1.0]


def test_jacobi_survives_tiny_off_diagonal_entries():
    matrix = np.array([[1.0, 1e-200, 0.0], [1e-200, 2.0, 0.5], [0.0, 0.5, 3.0]])

    with np.errstate(over="raise", invalid="raise"):
        values, vectors = symmetric_eigen(matrix)

    assert np.allclose(values, np.sort(np.linalg.eigvalsh(matrix))[::-1])
    assert np.allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)


def test_float_rank_cut_has_an_absolute_floor():
    backend = FloatBackend(rank_tol=1e-9)
    roundoff = np.array([[2.220446049250313e-16]])

    assert backend.null_space(roundoff).dim == 1
    assert backend.kernel(roundoff).shape == (1, 1)
    assert backend.span(np.array([[1e-14], [0.0]])).dim == 0
    assert backend.null_space(np.array([[1e-3]])).dim == 0
    with pytest.raises(SingularMatrix):
        backend.inverse(roundoff)


def test_rational_backend_takes_floats_exactly():
    backend = RationalBackend()

    assert backend.scalar(0.1) == Fraction(3602879701896397, 36028797018963968)
    assert backend.scalar(0.5) == Fraction(1, 2)
    with pytest.raises(InvalidFraction):
        backend.scalar(float("nan"))
