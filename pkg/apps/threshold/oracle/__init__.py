"""Brute-force resolvents on truncated graphs and checks against the expansion."""

from .identities import CheckResult, IdentityLedger, identity_suite, lemma_pairing_check
from .residuals import ResidualEntry, ResidualReport, expansion_residual_report, fit_slope, tail_slope
from .truncated import (
    TruncatedHamiltonian,
    build_truncated,
    cutoff_for,
    free_expansion_check,
    numeric_resolvent_entry,
    resolvent_block,
    sample_sites,
    second_resolvent_check,
)

__all__ = [
    "CheckResult",
    "IdentityLedger",
    "ResidualEntry",
    "ResidualReport",
    "TruncatedHamiltonian",
    "build_truncated",
    "cutoff_for",
    "expansion_residual_report",
    "fit_slope",
    "free_expansion_check",
    "identity_suite",
    "lemma_pairing_check",
    "numeric_resolvent_entry",
    "resolvent_block",
    "sample_sites",
    "second_resolvent_check",
    "tail_slope",
]
