# Expansion Package
# analysis.threshold imports operator_expr, so the engine and closed forms
# are imported from their modules directly.
from .operator_expr import Dyad, OperatorExpr, combine

__all__ = ["Dyad", "OperatorExpr", "combine"]
