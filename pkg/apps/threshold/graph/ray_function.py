"""
Functions on a graph with rays.

A RayFunction stores its K values, a finite head on every ray and a polynomial
tail that gives the values beyond the head exactly. Constants and linear
growth on the rays (the 𝟏 and 𝐧 functions) are therefore represented without
truncation, and so is everything the free kernels produce from finitely
supported input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..errors import NonSummablePair, TailDegreeExceedsCap
from .graph import GraphWithRays, KVertex, RaySite, SiteIndex

Scalar = Any

DEFAULT_TAIL_CAP = 6


# ----------------------------------------------------------------------
# Polynomial helpers (coefficient tuples, lowest degree first)
# ----------------------------------------------------------------------
def trim(coeffs: Sequence[Scalar], tol: float = 0.0) -> Tuple[Scalar, ...]:
    out = list(coeffs)
    while out and (out[-1] == 0 or (tol > 0 and abs(float(out[-1])) <= tol)):
        out.pop()
    return tuple(out)


def poly_eval(coeffs: Sequence[Scalar], n: int) -> Scalar:
    value: Scalar = 0
    for c in reversed(coeffs):
        value = value * n + c
    return value


def poly_add(a: Sequence[Scalar], b: Sequence[Scalar]) -> Tuple[Scalar, ...]:
    size = max(len(a), len(b))
    return trim(
        (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
        for i in range(size)
    )


def poly_scale(a: Sequence[Scalar], factor: Scalar) -> Tuple[Scalar, ...]:
    return trim(c * factor for c in a)


def poly_second_difference(coeffs: Sequence[Scalar]) -> Tuple[Scalar, ...]:
    """Coefficients of 2p(n) − p(n+1) − p(n−1)."""
    out: List[Scalar] = [0] * max(len(coeffs), 1)
    for d, c in enumerate(coeffs):
        if c == 0:
            continue
        # (n+1)^d + (n−1)^d − 2n^d keeps only the terms with d − k even and ≥ 2
        for k in range(d - 2, -1, -2):
            out[k] -= 2 * comb(d, k) * c
    return trim(out)


def interpolate(points: Sequence[int], values: Sequence[Scalar]) -> Tuple[Scalar, ...]:
    """Monomial coefficients of the interpolating polynomial (Newton form, expanded)."""
    count = len(points)
    table = list(values)
    newton: List[Scalar] = [table[0]] if count else []
    for level in range(1, count):
        table = [
            (table[i + 1] - table[i]) / Fraction(points[i + level] - points[i])
            if isinstance(table[i], (int, Fraction))
            else (table[i + 1] - table[i]) / float(points[i + level] - points[i])
            for i in range(count - level)
        ]
        newton.append(table[0])

    coeffs: List[Scalar] = [0]
    for level in range(count - 1, -1, -1):
        # coeffs = coeffs * (n − points[level]) + newton[level]
        shifted = [0] + coeffs
        for i, c in enumerate(coeffs):
            shifted[i] -= c * points[level]
        shifted[0] += newton[level]
        coeffs = shifted
    return trim(coeffs)


# ----------------------------------------------------------------------
# Ray functions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RayPart:
    head: Tuple[Scalar, ...]
    tail: Tuple[Scalar, ...]

    @property
    def degree(self) -> int:
        """Tail degree; −1 for a vanishing tail."""
        return len(self.tail) - 1

    def value(self, position: int) -> Scalar:
        if position <= len(self.head):
            return self.head[position - 1]
        return poly_eval(self.tail, position)

    def last_nonzero(self) -> int:
        """Largest head position with a non-zero value (0 if none)."""
        for position in range(len(self.head), 0, -1):
            if self.head[position - 1] != 0:
                return position
        return 0


@dataclass(frozen=True)
class RayFunction:
    graph: GraphWithRays
    k_values: Tuple[Scalar, ...]
    rays: Tuple[RayPart, ...]

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def from_parts(
        cls,
        graph: GraphWithRays,
        k_values: Sequence[Scalar],
        heads: Sequence[Sequence[Scalar]],
        tails: Sequence[Sequence[Scalar]],
        tail_cap: int = DEFAULT_TAIL_CAP,
    ) -> "RayFunction":
        rays = []
        for alpha in range(graph.ray_count):
            tail = trim(tails[alpha])
            if len(tail) - 1 > tail_cap:
                raise TailDegreeExceedsCap(
                    f"tail degree {len(tail) - 1} on ray {alpha + 1} exceeds cap {tail_cap}"
                )
            rays.append(RayPart(tuple(heads[alpha]), tail))
        return cls(graph, tuple(k_values), tuple(rays))

    @classmethod
    def zero(cls, graph: GraphWithRays) -> "RayFunction":
        return cls(graph, (0,) * len(graph.k_vertices), tuple(RayPart((), ()) for _ in range(graph.ray_count)))

    @classmethod
    def from_values(cls, graph: GraphWithRays, values: Mapping[SiteIndex, Scalar]) -> "RayFunction":
        """Finitely supported function from site values."""
        k_values: List[Scalar] = [0] * len(graph.k_vertices)
        heads: List[List[Scalar]] = [[] for _ in range(graph.ray_count)]
        for site, value in values.items():
            graph.check_site(site)
            if isinstance(site, KVertex):
                k_values[graph.vertex_index[site.vertex]] = value
            else:
                head = heads[site.ray - 1]
                if len(head) < site.position:
                    head.extend([0] * (site.position - len(head)))
                head[site.position - 1] = value
        return cls.from_parts(graph, k_values, heads, [()] * graph.ray_count)

    @classmethod
    def delta(cls, graph: GraphWithRays, site: SiteIndex, value: Scalar = 1) -> "RayFunction":
        return cls.from_values(graph, {site: value})

    @classmethod
    def ray_power(cls, graph: GraphWithRays, ray: int, power: int, coefficient: Scalar = 1) -> "RayFunction":
        """coefficient·n^power on one ray, zero elsewhere (power 0 is 𝟏^(α), power 1 is 𝐧^(α))."""
        tails: List[Tuple[Scalar, ...]] = [() for _ in range(graph.ray_count)]
        tails[ray - 1] = tuple([0] * power + [coefficient])
        return cls.from_parts(graph, [0] * len(graph.k_vertices), [()] * graph.ray_count, tails)

    @classmethod
    def ones(cls, graph: GraphWithRays, ray: int) -> "RayFunction":
        return cls.ray_power(graph, ray, 0)

    @classmethod
    def linear(cls, graph: GraphWithRays, ray: int) -> "RayFunction":
        return cls.ray_power(graph, ray, 1)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------
    def value(self, site: SiteIndex) -> Scalar:
        if isinstance(site, KVertex):
            return self.k_values[self.graph.vertex_index[site.vertex]]
        return self.rays[site.ray - 1].value(site.position)

    def __getitem__(self, site: SiteIndex) -> Scalar:
        return self.value(site)

    def k_value(self, vertex) -> Scalar:
        return self.k_values[self.graph.vertex_index[vertex]]

    def ray_value(self, ray: int, position: int) -> Scalar:
        return self.rays[ray - 1].value(position)

    def window_values(self, sites: Iterable[SiteIndex]) -> List[Scalar]:
        return [self.value(site) for site in sites]

    def tail(self, ray: int) -> Tuple[Scalar, ...]:
        return self.rays[ray - 1].tail

    def tail_coefficient(self, ray: int, degree: int) -> Scalar:
        tail = self.rays[ray - 1].tail
        return tail[degree] if degree < len(tail) else 0

    def tail_degree(self, ray: Optional[int] = None) -> int:
        if ray is not None:
            return self.rays[ray - 1].degree
        return max((part.degree for part in self.rays), default=-1)

    def is_finitely_supported(self) -> bool:
        return all(not part.tail for part in self.rays)

    def support_radius(self) -> int:
        """Largest ray position carrying a head value that is not zero."""
        return max((part.last_nonzero() for part in self.rays), default=0)

    def head_length(self) -> int:
        return max((len(part.head) for part in self.rays), default=0)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------
    def _combine(self, other: "RayFunction", sign: int) -> "RayFunction":
        if other.graph != self.graph:
            raise ValueError("functions live on different graphs")
        k_values = tuple(a + sign * b for a, b in zip(self.k_values, other.k_values))
        rays = []
        for mine, theirs in zip(self.rays, other.rays):
            length = max(len(mine.head), len(theirs.head))
            head = tuple(mine.value(n) + sign * theirs.value(n) for n in range(1, length + 1))
            tail = poly_add(mine.tail, poly_scale(theirs.tail, sign))
            rays.append(RayPart(head, tail))
        return RayFunction(self.graph, k_values, tuple(rays))

    def __add__(self, other: "RayFunction") -> "RayFunction":
        return self._combine(other, 1)

    def __sub__(self, other: "RayFunction") -> "RayFunction":
        return self._combine(other, -1)

    def __neg__(self) -> "RayFunction":
        return self.scale(-1)

    def scale(self, factor: Scalar) -> "RayFunction":
        return RayFunction(
            self.graph,
            tuple(v * factor for v in self.k_values),
            tuple(RayPart(tuple(v * factor for v in part.head), poly_scale(part.tail, factor)) for part in self.rays),
        )

    def __mul__(self, factor: Scalar) -> "RayFunction":
        return self.scale(factor)

    __rmul__ = __mul__

    def is_zero(self, tol: float = 0.0) -> bool:
        def small(x: Scalar) -> bool:
            return x == 0 or (tol > 0 and abs(float(x)) <= tol)

        return all(small(v) for v in self.k_values) and all(
            all(small(v) for v in part.head) and all(small(c) for c in part.tail) for part in self.rays
        )

    def compact(self) -> "RayFunction":
        """Drop trailing head entries already reproduced by the tail."""
        rays = []
        for part in self.rays:
            head = list(part.head)
            while head and head[-1] == poly_eval(part.tail, len(head)):
                head.pop()
            rays.append(RayPart(tuple(head), part.tail))
        return RayFunction(self.graph, self.k_values, tuple(rays))

    def chop(self, tol: float) -> "RayFunction":
        """Zero every stored number with magnitude ≤ tol (float arithmetic only)."""
        def clean(x: Scalar) -> Scalar:
            return 0.0 if abs(float(x)) <= tol else x

        return RayFunction(
            self.graph,
            tuple(clean(v) for v in self.k_values),
            tuple(
                RayPart(tuple(clean(v) for v in part.head), trim((clean(c) for c in part.tail), tol))
                for part in self.rays
            ),
        )

    def agrees_with(self, other: "RayFunction", tol: float = 0.0) -> bool:
        """Equality as functions: heads compared pointwise, tails coefficientwise."""
        return (self - other).is_zero(tol)

    def max_abs(self) -> float:
        values = [abs(float(v)) for v in self.k_values]
        for part in self.rays:
            values.extend(abs(float(v)) for v in part.head)
            values.extend(abs(float(c)) for c in part.tail)
        return max(values, default=0.0)


def pair(u1: RayFunction, u2: RayFunction) -> Scalar:
    """Σ_x u1[x]·u2[x] (real scalars); one factor must vanish beyond its head on every ray."""
    total: Scalar = 0
    for a, b in zip(u1.k_values, u2.k_values):
        total += a * b
    for alpha, (first, second) in enumerate(zip(u1.rays, u2.rays), start=1):
        if first.tail and second.tail:
            raise NonSummablePair(f"both factors have non-vanishing tails on ray {alpha}")
        if not first.tail and not second.tail:
            length = max(len(first.head), len(second.head))
        elif not first.tail:
            length = len(first.head)
        else:
            length = len(second.head)
        for n in range(1, length + 1):
            total += first.value(n) * second.value(n)
    return total


def space_membership(u: RayFunction, s: Fraction, kind: str) -> bool:
    """Membership in the weighted ℓ¹ space ('L1weighted') or its dual ('LinfDualWeighted')."""
    if kind == "L1weighted":
        return u.is_finitely_supported()
    if kind == "LinfDualWeighted":
        return all(part.degree <= s for part in u.rays)
    raise ValueError(f"unknown space kind {kind!r}")


def evaluation_table(u: RayFunction, sites: Iterable[SiteIndex]) -> Dict[SiteIndex, Scalar]:
    return {site: u.value(site) for site in sites}


def rebuild_from_window(u: RayFunction, length: int) -> RayFunction:
    """Rebuild a function from its values on a window plus its tail coefficients."""
    graph = u.graph
    heads = [[u.ray_value(ray, n) for n in range(1, length + 1)] for ray in range(1, graph.ray_count + 1)]
    return RayFunction.from_parts(
        graph,
        [u.k_value(vertex) for vertex in graph.k_vertices],
        heads,
        [u.tail(ray) for ray in range(1, graph.ray_count + 1)],
        tail_cap=max(u.tail_degree(), 0),
    )
