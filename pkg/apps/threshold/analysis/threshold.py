"""
Threshold analysis at z = 0.

Computes the intermediate operators M₀, Q, m₀ and S on the coupling space,
classifies the threshold, and builds the generalized eigenspaces

    Ẽ = z(Q𝒦 ⊕ M₀†[P𝒦 ∩ (Q𝒦)^⊥]) ⊕ (ℂ𝐧 ∩ Ker V),   ℰ = z(Q𝒦),   𝖤 = z(S𝒦)

together with the bound and resonance projections. The Gram-Schmidt vectors
Ψ^(α) are kept unnormalized: Ψ̃^(α) lies in the span of 𝐧^(1..N), so it is
stored as a coefficient column and the normalization enters only through the
squared norms ν_α, which keeps the rational backend exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ConsistencyViolation, TailDegreeTooHigh
from ..expansion.operator_expr import OperatorExpr
from ..free.free_model import FreeModel, Mj_matrix, apply_free_hamiltonian, free_columns
from ..graph.ray_function import RayFunction, pair
from ..linalg.backends import Subspace
from ..perturbation.factored import FactoredPerturbation, apply_V

logger = logging.getLogger(__name__)

Scalar = Any


class ThresholdKind(str, Enum):
    REGULAR = "regular"
    FIRST_KIND = "first_kind"
    SECOND_KIND = "second_kind"
    THIRD_KIND = "third_kind"


@dataclass(frozen=True, eq=False)
class IntermediateOperators:
    model: FreeModel
    perturbation: FactoredPerturbation
    M0: np.ndarray
    M0_pinv: np.ndarray
    Q: np.ndarray
    Q_space: Subspace
    m0: np.ndarray
    m0_pinv: np.ndarray
    S: np.ndarray
    S_space: Subspace
    P: np.ndarray
    P_space: Subspace
    # column α is v*𝐧^(α)
    moments: np.ndarray
    # column α holds the 𝐧-coefficients of Ψ̃^(α)
    psi_coefficients: np.ndarray
    psi_squared_norms: Tuple[Scalar, ...]

    @property
    def k(self) -> int:
        return self.perturbation.k

    @property
    def ray_count(self) -> int:
        return self.model.graph.ray_count

    def psi(self, alpha: int) -> RayFunction:
        """Ψ̃^(α) for 1 ≤ α ≤ N."""
        return n_combination(self.model, self.psi_coefficients[:, alpha - 1])

    def phi(self, alpha: int) -> np.ndarray:
        """v*Ψ̃^(α)"""
        return self.moments @ self.psi_coefficients[:, alpha - 1]


@dataclass(frozen=True, eq=False)
class EigenFunction:
    """One basis function with its coupling coordinates and leading tail coefficients."""

    function: RayFunction
    coordinates: Optional[np.ndarray]
    leading: Tuple[Scalar, ...]
    squared_norm: Scalar


@dataclass(frozen=True, eq=False)
class ThresholdReport:
    classification: ThresholdKind
    dim_nonresonance: int
    dim_resonance: int
    dim_bound: int
    bound: Tuple[EigenFunction, ...]
    resonance: Tuple[EigenFunction, ...]
    nonresonance: Tuple[EigenFunction, ...]
    kernel_v: Tuple[np.ndarray, ...]
    operators: IntermediateOperators
    orthonormal: Dict[str, Tuple[RayFunction, ...]] = field(default_factory=dict)

    @property
    def M0(self) -> np.ndarray:
        return self.operators.M0

    @property
    def Q(self) -> np.ndarray:
        return self.operators.Q

    @property
    def m0(self) -> np.ndarray:
        return self.operators.m0

    @property
    def S(self) -> np.ndarray:
        return self.operators.S

    @property
    def resonance_space_nonzero(self) -> bool:
        """ℰ ≠ {0}"""
        return self.dim_resonance + self.dim_bound > 0


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------
def n_combination(model: FreeModel, coefficients: Sequence[Scalar]) -> RayFunction:
    """Σ_α c_α 𝐧^(α)"""
    graph = model.graph
    tails = [(model.backend.scalar(0), c) if c != 0 else () for c in coefficients]
    return RayFunction.from_parts(
        graph, [0] * len(graph.k_vertices), [()] * graph.ray_count, tails, tail_cap=model.tail_cap
    )


def free_image(model: FreeModel, perturbation: FactoredPerturbation, coordinates: Sequence[Scalar], j: int = 0) -> RayFunction:
    """G₀,ⱼ v Φ from the memoized column images."""
    total = RayFunction.zero(model.graph)
    for image, weight in zip(free_columns(model, perturbation, j), coordinates):
        if weight != 0:
            total = total + image.scale(weight)
    return total


def _clean(model: FreeModel, u: RayFunction) -> RayFunction:
    if model.backend.exact:
        return u.compact()
    return u.chop(model.backend.rank_tol * max(1.0, u.max_abs())).compact()


def moment_matrix(model: FreeModel, perturbation: FactoredPerturbation) -> np.ndarray:
    """k×N matrix with entries ⟨v_i, 𝐧^(α)⟩."""
    backend = model.backend
    graph = model.graph
    out = backend.zeros(perturbation.k, graph.ray_count)
    for alpha in range(1, graph.ray_count + 1):
        linear = RayFunction.linear(graph, alpha)
        for i, column in enumerate(perturbation.columns):
            out[i, alpha - 1] = backend.scalar(pair(column, linear))
    return out


def restrict_to_basis(model: FreeModel, matrix: np.ndarray, subspace: Subspace) -> np.ndarray:
    """Y with matrix = B Y Bᵀ, for a matrix whose range and corange lie in span B."""
    backend = model.backend
    basis = subspace.basis
    gram_inverse = backend.inverse(subspace.gram)
    return gram_inverse @ basis.T @ matrix @ basis @ gram_inverse


def _gram_schmidt(
    backend,
    items: List[Tuple[RayFunction, Optional[np.ndarray], Tuple[Scalar, ...]]],
    inner: Callable[[Tuple, Tuple], Scalar],
) -> List[Tuple[RayFunction, Optional[np.ndarray], Tuple[Scalar, ...], Scalar]]:
    """Unnormalized Gram-Schmidt on (function, coordinates, leading) triples."""
    done: List[Tuple[RayFunction, Optional[np.ndarray], Tuple[Scalar, ...], Scalar]] = []
    for function, coordinates, leading in items:
        current = (function, coordinates, leading)
        for previous in done:
            norm = previous[3]
            if backend.is_zero(norm):
                continue
            ratio = inner(previous, current) / norm
            if ratio == 0:
                continue
            function = function - previous[0].scale(ratio)
            if coordinates is not None and previous[1] is not None:
                coordinates = coordinates - previous[1] * ratio
            leading = tuple(a - b * ratio for a, b in zip(leading, previous[2]))
            current = (function, coordinates, leading)
        done.append((function, coordinates, leading, inner(current, current)))
    return done


def _leading_inner(first: Tuple, second: Tuple) -> Scalar:
    return sum((a * b for a, b in zip(first[2], second[2])), 0)


def _l2_inner(first: Tuple, second: Tuple) -> Scalar:
    return pair(first[0], second[0])


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def intermediate_operators(model: FreeModel, perturbation: FactoredPerturbation) -> IntermediateOperators:
    """M₀, Q, m₀, S, P and the Gram-Schmidt family Ψ̃^(α)."""
    backend = model.backend
    k = perturbation.k
    n_rays = model.graph.ray_count

    M0 = Mj_matrix(model, perturbation, 0)
    Q_space = backend.null_space(M0)
    Q = backend.orthogonal_projection(Q_space)
    M0_pinv = backend.pseudo_inverse(M0)

    moments = moment_matrix(model, perturbation)
    projected = Q @ moments
    m0 = -(projected @ projected.T) if k else backend.zeros(0, 0)
    S_space = backend.subspace_intersect(Q_space, backend.null_space(m0))
    S = backend.orthogonal_projection(S_space)
    m0_pinv = backend.pseudo_inverse(m0)

    P_space = backend.span(moments) if k else backend.zero_subspace(0)
    P = backend.orthogonal_projection(P_space)

    coefficients = backend.zeros(n_rays, n_rays)
    squared_norms: List[Scalar] = []
    for alpha in range(n_rays):
        column = backend.zeros(n_rays, 1)[:, 0].copy()
        column[alpha] = backend.scalar(1)
        target = moments[:, alpha]
        for gamma in range(alpha):
            norm = squared_norms[gamma]
            if backend.is_zero(norm):
                continue
            previous = moments @ coefficients[:, gamma]
            column = column - coefficients[:, gamma] * (previous @ target / norm)
        coefficients[:, alpha] = column
        image = moments @ column
        squared_norms.append(image @ image if k else backend.scalar(0))

    logger.debug(f"Intermediate operators: k={k}, dim Q={Q_space.dim}, dim S={S_space.dim}, rank P={P_space.dim}")
    return IntermediateOperators(
        model=model,
        perturbation=perturbation,
        M0=M0,
        M0_pinv=M0_pinv,
        Q=Q,
        Q_space=Q_space,
        m0=m0,
        m0_pinv=m0_pinv,
        S=S,
        S_space=S_space,
        P=P,
        P_space=P_space,
        moments=moments,
        psi_coefficients=coefficients,
        psi_squared_norms=tuple(squared_norms),
    )


def classify_operators(ops: IntermediateOperators) -> ThresholdKind:
    if ops.Q_space.dim == 0:
        return ThresholdKind.REGULAR
    if ops.S_space.dim == 0:
        return ThresholdKind.FIRST_KIND
    if ops.S_space.dim == ops.Q_space.dim:
        return ThresholdKind.SECOND_KIND
    return ThresholdKind.THIRD_KIND


def classify(model: FreeModel, perturbation: FactoredPerturbation) -> ThresholdKind:
    kind = classify_operators(intermediate_operators(model, perturbation))
    logger.info(f"Threshold classified as {kind.value}")
    return kind


def z_apply(ops: IntermediateOperators, coordinates: Sequence[Scalar]) -> RayFunction:
    """z Φ = Σ_α |Ψ^(α)⟩⟨Φ^(α)| M₀ Φ − G₀,₀ v Φ"""
    model = ops.model
    backend = model.backend
    phi = backend.vector(coordinates)
    n_weights = backend.zeros(ops.ray_count, 1)[:, 0].copy()
    if ops.k:
        image = ops.M0 @ phi
        for alpha in range(1, ops.ray_count + 1):
            norm = ops.psi_squared_norms[alpha - 1]
            if backend.is_zero(norm):
                continue
            weight = ops.phi(alpha) @ image / norm
            n_weights = n_weights + ops.psi_coefficients[:, alpha - 1] * weight
    result = n_combination(model, list(n_weights)) - free_image(model, ops.perturbation, list(phi))
    return _clean(model, result)


def w_apply(ops: IntermediateOperators, function: RayFunction) -> np.ndarray:
    """w Ψ = U v* Ψ, defined for tails of degree ≤ 1."""
    if function.tail_degree() > 1:
        raise TailDegreeTooHigh(f"w needs tails of degree ≤ 1, got {function.tail_degree()}")
    return ops.perturbation.U @ ops.perturbation.coordinates(function)


def apply_hamiltonian(model: FreeModel, perturbation: FactoredPerturbation, u: RayFunction) -> RayFunction:
    """(H₀ + V) u, exact on polynomial tails."""
    return apply_free_hamiltonian(model, u) + apply_V(perturbation, u)


def is_generalized_eigenfunction(model: FreeModel, perturbation: FactoredPerturbation, u: RayFunction) -> bool:
    image = apply_hamiltonian(model, perturbation, u)
    if model.backend.exact:
        return image.is_zero()
    return image.is_zero(model.backend.rank_tol * max(1.0, u.max_abs()) * 10)


def nonresonance_domain(ops: IntermediateOperators) -> Subspace:
    """M₀†[P𝒦 ∩ (Q𝒦)^⊥]"""
    backend = ops.model.backend
    source = backend.subspace_orthocomplement_within(ops.P_space, ops.Q_space)
    if source.dim == 0:
        return backend.zero_subspace(ops.k)
    return backend.span(ops.M0_pinv @ source.basis)


def resonance_domain(ops: IntermediateOperators) -> Subspace:
    """Q𝒦 ⊖ S𝒦"""
    return ops.model.backend.subspace_orthocomplement_within(ops.Q_space, ops.S_space)


def kernel_v_moments(ops: IntermediateOperators) -> Subspace:
    """Coefficient vectors c with Σ c_α 𝐧^(α) ∈ Ker V."""
    backend = ops.model.backend
    n_rays = ops.ray_count
    if ops.k == 0:
        return backend.full_space(n_rays)
    kernel = backend.kernel(ops.moments)
    if kernel.shape[1] == 0:
        return backend.zero_subspace(n_rays)
    return backend.span(kernel)


def _tail_vector(u: RayFunction, degree: int) -> Tuple[Scalar, ...]:
    return tuple(u.tail_coefficient(alpha, degree) for alpha in range(1, u.graph.ray_count + 1))


def _orthonormalize(backend, functions: Sequence[RayFunction], gram: np.ndarray) -> Tuple[RayFunction, ...]:
    """Löwdin orthonormalization through the Gram matrix eigenvectors."""
    if not functions:
        return ()
    values, vectors = backend.symmetric_eigen(backend.to_float(gram))
    transform = (vectors / np.sqrt(np.clip(values, 1e-300, None))) @ vectors.T
    out = []
    for i in range(len(functions)):
        total = RayFunction.zero(functions[0].graph)
        for j, function in enumerate(functions):
            total = total + function.scale(float(transform[j, i]))
        out.append(total)
    return tuple(out)


def eigenspaces(model: FreeModel, perturbation: FactoredPerturbation) -> ThresholdReport:
    ops = intermediate_operators(model, perturbation)
    backend = model.backend
    kind = classify_operators(ops)

    bound_items = [(z_apply(ops, phi), phi, ()) for phi in ops.S_space.columns()]
    bound = _gram_schmidt(backend, bound_items, _l2_inner)

    def remove_bound(u: RayFunction) -> RayFunction:
        for function, _, _, norm in bound:
            weight = pair(function, u) / norm
            if weight != 0:
                u = u - function.scale(weight)
        return _clean(model, u)

    resonance_items = []
    for phi in resonance_domain(ops).columns():
        function = remove_bound(z_apply(ops, phi))
        resonance_items.append((function, phi, _tail_vector(function, 0)))
    resonance = _gram_schmidt(backend, resonance_items, _leading_inner)

    nonresonance_items = []
    for phi in nonresonance_domain(ops).columns():
        function = z_apply(ops, phi)
        nonresonance_items.append((function, phi, _tail_vector(function, 1)))
    kernel_v = kernel_v_moments(ops)
    for c in kernel_v.columns():
        function = n_combination(model, list(c))
        nonresonance_items.append((function, None, tuple(c)))
    nonresonance = _gram_schmidt(backend, nonresonance_items, _leading_inner)

    dim_bound = len(bound)
    dim_resonance = len(resonance)
    dim_nonresonance = len(nonresonance)
    if dim_nonresonance + dim_resonance != model.graph.ray_count:
        raise ConsistencyViolation(
            f"dimension relation fails: {dim_nonresonance} non-resonance + {dim_resonance} resonance != {model.graph.ray_count} rays"
        )

    def pack(items) -> Tuple[EigenFunction, ...]:
        return tuple(EigenFunction(f, c, lead, norm) for f, c, lead, norm in items)

    orthonormal: Dict[str, Tuple[RayFunction, ...]] = {}
    if not backend.exact:
        for name, items, inner in (
            ("bound", bound, _l2_inner),
            ("resonance", resonance, _leading_inner),
            ("nonresonance", nonresonance, _leading_inner),
        ):
            gram = np.array([[float(inner(a, b)) for b in items] for a in items], dtype=np.float64)
            orthonormal[name] = _orthonormalize(backend, [item[0] for item in items], gram)

    logger.info(f"Eigenspaces ({kind.value}): non-resonance {dim_nonresonance}, resonance {dim_resonance}, bound {dim_bound}")
    return ThresholdReport(
        classification=kind,
        dim_nonresonance=dim_nonresonance,
        dim_resonance=dim_resonance,
        dim_bound=dim_bound,
        bound=pack(bound),
        resonance=pack(resonance),
        nonresonance=pack(nonresonance),
        kernel_v=tuple(kernel_v.columns()),
        operators=ops,
        orthonormal=orthonormal,
    )


def sandwich(ops: IntermediateOperators, matrix: np.ndarray, subspace: Subspace, sign: int = -1) -> OperatorExpr:
    """sign · G₀,₀ v X v* G₀,₀ with X supported on the given subspace of 𝒦."""
    model = ops.model
    if subspace.dim == 0:
        return OperatorExpr.zero(model)
    reduced = restrict_to_basis(model, matrix, subspace)
    factors = [_clean(model, free_image(model, ops.perturbation, list(column))) for column in subspace.columns()]
    return OperatorExpr.outer(model, factors, reduced * sign, factors)


def bound_projection(ops: IntermediateOperators) -> OperatorExpr:
    """𝖯 = −G₀,₀ v (S M₂ S)† v* G₀,₀"""
    model = ops.model
    if ops.S_space.dim == 0:
        return OperatorExpr.zero(model)
    M2 = Mj_matrix(model, ops.perturbation, 2)
    inner = model.backend.pseudo_inverse(ops.S @ M2 @ ops.S)
    return sandwich(ops, inner, ops.S_space)


def resonance_projection(ops: IntermediateOperators, bound: Optional[OperatorExpr] = None) -> OperatorExpr:
    """𝒫 = −(I − 𝖯) G₀,₀ v m₀† v* G₀,₀ (I − 𝖯)"""
    model = ops.model
    domain = resonance_domain(ops)
    if domain.dim == 0:
        return OperatorExpr.zero(model)
    core = sandwich(ops, ops.m0_pinv, domain)
    if ops.S_space.dim == 0:
        return core
    bound = bound if bound is not None else bound_projection(ops)
    complement = OperatorExpr.identity(model) - bound
    return complement @ core @ complement


def projections(
    model: FreeModel,
    perturbation: FactoredPerturbation,
    report: Optional[ThresholdReport] = None,
) -> Tuple[OperatorExpr, OperatorExpr]:
    """(𝖯, 𝒫) as finite-rank expressions."""
    ops = report.operators if report is not None else intermediate_operators(model, perturbation)
    bound = bound_projection(ops)
    return bound, resonance_projection(ops, bound)
