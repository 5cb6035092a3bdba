"""Factored perturbations V = vUv*."""

from .factored import (
    FactoredPerturbation,
    apply_V,
    build_factored,
    empty_perturbation,
    factor_dense,
    family_perturbation,
    joining_entries,
    joining_perturbation,
)

__all__ = [
    "FactoredPerturbation",
    "apply_V",
    "build_factored",
    "empty_perturbation",
    "factor_dense",
    "family_perturbation",
    "joining_entries",
    "joining_perturbation",
]
