"""
Operators as free base kernels plus finite-rank dyads.

An OperatorExpr is  Σ c_b·B_b + Σ w|f⟩⟨g|  where every B_b is the identity,
G₀,₀ or G₀,₂ and f, g are RayFunctions. Compositions are exact as long as each
pairing they need has a finitely supported factor; products of two genuine
free kernels are never formed.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from ..errors import NotComposable, OrderExceedsCap
from ..free.free_model import FreeModel, apply_free_coefficient, free_kernel
from ..graph.graph import SiteIndex
from ..graph.ray_function import RayFunction, pair

logger = logging.getLogger(__name__)

Scalar = Any
BaseKey = Union[str, int]
IDENTITY = "I"


@dataclass(frozen=True)
class Dyad:
    left: RayFunction
    right: RayFunction
    weight: Scalar


def _leading(u: RayFunction) -> Scalar:
    for value in u.k_values:
        if value != 0:
            return value
    for part in u.rays:
        for value in part.head:
            if value != 0:
                return value
        for value in part.tail:
            if value != 0:
                return value
    return 0


def _normalized(u: RayFunction) -> Tuple[Scalar, RayFunction]:
    """(s, û) with u = s·û and the first stored non-zero number of û equal to 1."""
    u = u.compact()
    lead = _leading(u)
    if lead == 0 or lead == 1:
        return (1, u)
    inverse = Fraction(1) / lead if isinstance(lead, (int, Fraction)) else 1.0 / lead
    return (lead, u.scale(inverse))


@dataclass(frozen=True, eq=False)
class OperatorExpr:
    model: FreeModel
    base: Tuple[Tuple[BaseKey, Scalar], ...] = ()
    dyads: Tuple[Dyad, ...] = ()

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def zero(cls, model: FreeModel) -> "OperatorExpr":
        return cls(model)

    @classmethod
    def identity(cls, model: FreeModel) -> "OperatorExpr":
        return cls(model, ((IDENTITY, 1),))

    @classmethod
    def free(cls, model: FreeModel, j: int) -> "OperatorExpr":
        """G₀,ⱼ for 0 ≤ j ≤ 3; odd orders are finite rank."""
        graph = model.graph
        if j in (0, 2):
            return cls(model, ((j, 1),))
        dyads: List[Dyad] = []
        for ray in range(1, graph.ray_count + 1):
            n1 = RayFunction.linear(graph, ray)
            if j == 1:
                dyads.append(Dyad(n1, n1, -1))
            elif j == 3:
                n3 = RayFunction.ray_power(graph, ray, 3)
                dyads.append(Dyad(n1, n1, Fraction(5, 24)))
                dyads.append(Dyad(n3, n1, Fraction(-1, 6)))
                dyads.append(Dyad(n1, n3, Fraction(-1, 6)))
            else:
                raise OrderExceedsCap(f"free coefficient G0,{j} is not available as an expression")
        return cls(model, (), tuple(dyads))

    @classmethod
    def outer(
        cls,
        model: FreeModel,
        lefts: Sequence[RayFunction],
        matrix: np.ndarray,
        rights: Sequence[RayFunction],
    ) -> "OperatorExpr":
        """Σ_{ik} matrix[i, k] |lefts_i⟩⟨rights_k|"""
        dyads = [
            Dyad(left, right, matrix[i, k])
            for i, left in enumerate(lefts)
            for k, right in enumerate(rights)
            if matrix[i, k] != 0
        ]
        return cls(model, (), tuple(dyads)).compact()

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------
    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        merged: Dict[BaseKey, Scalar] = OrderedDict(self.base)
        for key, coefficient in other.base:
            merged[key] = merged.get(key, 0) + coefficient
        base = tuple((key, c) for key, c in merged.items() if c != 0)
        return OperatorExpr(self.model, base, self.dyads + other.dyads).compact()

    def __neg__(self) -> "OperatorExpr":
        return self.scale(-1)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + (-other)

    def scale(self, factor: Scalar) -> "OperatorExpr":
        return OperatorExpr(
            self.model,
            tuple((key, c * factor) for key, c in self.base if c * factor != 0),
            tuple(Dyad(d.left, d.right, d.weight * factor) for d in self.dyads if d.weight * factor != 0),
        )

    def adjoint(self) -> "OperatorExpr":
        return OperatorExpr(self.model, self.base, tuple(Dyad(d.right, d.left, d.weight) for d in self.dyads))

    def _apply_base(self, key: BaseKey, u: RayFunction) -> RayFunction:
        if key == IDENTITY:
            return u
        image = apply_free_coefficient(self.model, key, u)
        backend = self.model.backend
        if not backend.exact:
            image = image.chop(backend.rank_tol * max(1.0, image.max_abs()))
        return image

    def compose(self, other: "OperatorExpr") -> "OperatorExpr":
        """self ∘ other"""
        base: Dict[BaseKey, Scalar] = OrderedDict()
        for key_a, ca in self.base:
            for key_b, cb in other.base:
                if key_a == IDENTITY:
                    key = key_b
                elif key_b == IDENTITY:
                    key = key_a
                else:
                    raise NotComposable(f"cannot compose free kernels G0,{key_a} and G0,{key_b}")
                base[key] = base.get(key, 0) + ca * cb

        dyads: List[Dyad] = []
        for key, c in self.base:
            for d in other.dyads:
                dyads.append(Dyad(self._apply_base(key, d.left), d.right, c * d.weight))
        for d in self.dyads:
            for key, c in other.base:
                # free kernels are symmetric, so ⟨g|G = ⟨Gg|
                dyads.append(Dyad(d.left, self._apply_base(key, d.right), d.weight * c))
        for d in self.dyads:
            for e in other.dyads:
                weight = d.weight * e.weight * pair(d.right, e.left)
                if weight != 0:
                    dyads.append(Dyad(d.left, e.right, weight))
        return OperatorExpr(
            self.model,
            tuple((key, c) for key, c in base.items() if c != 0),
            tuple(dyads),
        ).compact()

    def __matmul__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self.compose(other)

    def compact(self) -> "OperatorExpr":
        """Merge dyads with proportional left factors, then with proportional right factors."""
        if len(self.dyads) < 2:
            return self
        by_left: "OrderedDict[RayFunction, RayFunction]" = OrderedDict()
        for d in self.dyads:
            scale, left = _normalized(d.left)
            right = d.right.scale(d.weight * scale)
            by_left[left] = by_left[left] + right if left in by_left else right
        by_right: "OrderedDict[RayFunction, RayFunction]" = OrderedDict()
        for left, right in by_left.items():
            if right.is_zero():
                continue
            scale, right_normalized = _normalized(right)
            scaled_left = left.scale(scale)
            if right_normalized in by_right:
                by_right[right_normalized] = by_right[right_normalized] + scaled_left
            else:
                by_right[right_normalized] = scaled_left
        dyads = tuple(
            Dyad(left, right, 1) for right, left in by_right.items() if not left.is_zero()
        )
        return OperatorExpr(self.model, self.base, dyads)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    def evaluate(self, x: SiteIndex, y: SiteIndex) -> Scalar:
        total: Scalar = self.model.backend.scalar(0)
        for key, c in self.base:
            if key == IDENTITY:
                if x == y:
                    total += c
            else:
                total += c * free_kernel(self.model, key, x, y)
        for d in self.dyads:
            total += d.weight * d.left.value(x) * d.right.value(y)
        return total

    def apply(self, u: RayFunction) -> RayFunction:
        result = RayFunction.zero(self.model.graph)
        for key, c in self.base:
            result = result + self._apply_base(key, u).scale(c)
        for d in self.dyads:
            weight = d.weight * pair(d.right, u)
            if weight != 0:
                result = result + d.left.scale(weight)
        return result

    def kernel_table(self, sites: Sequence[SiteIndex]) -> List[List[Scalar]]:
        return [[self.evaluate(x, y) for y in sites] for x in sites]

    def is_zero_on(self, sites: Iterable[SiteIndex], tol: float = 0.0) -> bool:
        sites = list(sites)
        for x in sites:
            for y in sites:
                value = self.evaluate(x, y)
                if value != 0 and (tol == 0 or abs(float(value)) > tol):
                    return False
        return True

    def agrees_on(self, other: "OperatorExpr", sites: Sequence[SiteIndex], tol: float = 0.0) -> bool:
        return (self - other).is_zero_on(sites, tol)

    def rank_bound(self) -> int:
        return len(self.dyads)


def combine(model: FreeModel, terms: Iterable[OperatorExpr]) -> OperatorExpr:
    total = OperatorExpr.zero(model)
    for term in terms:
        total = total + term
    return total
