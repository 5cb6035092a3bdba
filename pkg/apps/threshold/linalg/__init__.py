"""Dense linear algebra over exact rationals or floats."""

from .backends import FloatBackend, RationalBackend, ScalarBackend, Subspace, get_backend
from .jacobi import symmetric_eigen

__all__ = [
    "FloatBackend",
    "RationalBackend",
    "ScalarBackend",
    "Subspace",
    "get_backend",
    "symmetric_eigen",
]
