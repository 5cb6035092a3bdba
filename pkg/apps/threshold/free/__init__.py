"""Free operator and its threshold resolvent coefficients."""

from .free_model import (
    FreeModel,
    Mj_matrix,
    apply_free_coefficient,
    apply_free_hamiltonian,
    build_free_model,
    free_columns,
    free_kernel,
    ray_kernel,
)

__all__ = [
    "FreeModel",
    "Mj_matrix",
    "apply_free_coefficient",
    "apply_free_hamiltonian",
    "build_free_model",
    "free_columns",
    "free_kernel",
    "ray_kernel",
]
