"""
Error types for the threshold analyzer.

Every error subclasses ValueError so callers that already guard against
invalid input keep working.
"""


class ThresholdError(ValueError):
    """Base class for all analyzer errors."""


# Graph construction
class DisconnectedK(ThresholdError):
    pass


class SelfLoop(ThresholdError):
    pass


class DuplicateEdge(ThresholdError):
    pass


class UnknownJoint(ThresholdError):
    pass


# Functions on the graph
class NonSummablePair(ThresholdError):
    """Both factors of a pairing have non-vanishing tails on a common ray."""


class NotFinitelySupported(ThresholdError):
    pass


class TailDegreeExceedsCap(ThresholdError):
    pass


class TailDegreeTooHigh(ThresholdError):
    pass


# Linear algebra
class AsymmetricInput(ThresholdError):
    pass


class SingularMatrix(ThresholdError):
    pass


class RationalBackendUnsupported(ThresholdError):
    pass


# Series and kernels
class DivisionByZeroConstantTerm(ThresholdError):
    pass


class OrderExceedsCap(ThresholdError):
    pass


class NotPositiveDefinite(ThresholdError):
    pass


# Perturbations
class NonUnitaryU(ThresholdError):
    pass


class NonSymmetricU(ThresholdError):
    pass


class DependentColumns(ThresholdError):
    pass


# Expansion
class LeadingNotInvertible(ThresholdError):
    pass


class ConsistencyViolation(ThresholdError):
    """The inversion cascade needed a third level; the pole order is at most two."""


class NotComposable(ThresholdError):
    pass


# Oracle
class SingularSolve(ThresholdError):
    pass


class CutoffTooSmall(ThresholdError):
    pass


class PreconditionMomentNonzero(ThresholdError):
    pass


# Configuration and reports
class ParseError(ThresholdError):
    pass


class UnknownField(ThresholdError):
    pass


class InvalidFraction(ThresholdError):
    pass


class IoError(ThresholdError):
    pass
