"""Threshold classification and generalized eigenspaces."""

from .threshold import (
    EigenFunction,
    IntermediateOperators,
    ThresholdKind,
    ThresholdReport,
    apply_hamiltonian,
    bound_projection,
    classify,
    classify_operators,
    eigenspaces,
    intermediate_operators,
    is_generalized_eigenfunction,
    projections,
    resonance_projection,
    w_apply,
    z_apply,
)

__all__ = [
    "EigenFunction",
    "IntermediateOperators",
    "ThresholdKind",
    "ThresholdReport",
    "apply_hamiltonian",
    "bound_projection",
    "classify",
    "classify_operators",
    "eigenspaces",
    "intermediate_operators",
    "is_generalized_eigenfunction",
    "projections",
    "resonance_projection",
    "w_apply",
    "z_apply",
]
