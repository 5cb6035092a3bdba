"""
Matrix-level inversion cascade for M(κ)⁻¹ = (M₀ + κM₁ + κ²M₂ + …)⁻¹.

    B(κ) = (M(κ) + Q)⁻¹
    m(κ) = κ⁻¹ Q T(κ) Q,         T = M'(I + B₀M')⁻¹,  M' = M(κ) − M₀
    C(κ) = (m(κ) + S)⁻¹  on Q𝒦
    q(κ) = κ⁻¹ S T'(κ) S,        T' built from m(κ) with C₀ in place of B₀
    A(κ) = q(κ)⁻¹        on S𝒦

    m(κ)⁻¹ = C + κ⁻¹ C A C,      M(κ)⁻¹ = B + κ⁻¹ B m(κ)⁻¹ B

Laurent series are dicts {order: matrix}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..errors import ConsistencyViolation, LeadingNotInvertible, OrderExceedsCap, SingularMatrix
from ..free.free_model import FreeModel, Mj_matrix
from ..linalg.backends import ScalarBackend
from ..perturbation.factored import FactoredPerturbation

logger = logging.getLogger(__name__)

Laurent = Dict[int, np.ndarray]

# Orders of M(κ) the cascade consumes; G₋₂..G₁ need nothing beyond M₅.
MATRIX_ORDERS = 5


def neumann_cascade(
    backend: ScalarBackend,
    series: Sequence[np.ndarray],
    projector: np.ndarray,
    order: int,
    ambient: Optional[np.ndarray] = None,
) -> List[np.ndarray]:
    """
    Coefficients Y₀..Y_order of (X₀ + κX₁ + … + projector)⁻¹ on the ambient subspace.

    Y₀ = (X₀ + projector + (I − ambient))⁻¹ and Y_j = −Y₀ Σ_{i=1}^{j} X_i Y_{j−i},
    each restricted to the ambient range.
    """
    if order >= len(series):
        raise OrderExceedsCap(f"order {order} needs {order + 1} coefficients, got {len(series)}")
    n = series[0].shape[0]
    identity = backend.identity(n)
    ambient = identity if ambient is None else ambient
    try:
        lead = backend.inverse(series[0] + projector + (identity - ambient))
    except SingularMatrix as exc:
        raise LeadingNotInvertible("leading coefficient is not invertible off the projector range") from exc

    coefficients = [lead]
    for j in range(1, order + 1):
        total = backend.zeros(n, n)
        for i in range(1, j + 1):
            total = total + series[i] @ coefficients[j - i]
        coefficients.append(-(lead @ total))
    return [ambient @ c @ ambient for c in coefficients]


def composition_coefficients(
    backend: ScalarBackend,
    series: Sequence[np.ndarray],
    resolvent: np.ndarray,
    count: int,
) -> List[np.ndarray]:
    """T₁..T_count of T = X'(I + R₀X')⁻¹ with X' = Σ_{s≥1} κ^s X_s."""
    if count >= len(series):
        raise OrderExceedsCap(f"T_{count} needs X_{count}, got {len(series) - 1}")
    T: Dict[int, np.ndarray] = {}
    for s in range(1, count + 1):
        value = series[s]
        for i in range(1, s):
            value = value - series[i] @ resolvent @ T[s - i]
        T[s] = value
    return [T[s] for s in range(1, count + 1)]


def M_coefficients(model: FreeModel, perturbation: FactoredPerturbation, count: int = MATRIX_ORDERS) -> List[np.ndarray]:
    """M₀..M_count"""
    model.check_order(count)
    return [Mj_matrix(model, perturbation, j) for j in range(count + 1)]


def m_coefficients(
    backend: ScalarBackend,
    M_list: Sequence[np.ndarray],
    M0_pinv: np.ndarray,
    Q: np.ndarray,
) -> List[np.ndarray]:
    """m₀..m₄ with m_j = Q T_{j+1} Q and B₀ = M₀† + Q."""
    count = len(M_list) - 1
    T = composition_coefficients(backend, M_list, M0_pinv + Q, count)
    return [Q @ t @ Q for t in T]


def q_coefficients(
    backend: ScalarBackend,
    m_list: Sequence[np.ndarray],
    m0_pinv: np.ndarray,
    S: np.ndarray,
) -> List[np.ndarray]:
    """q₀..q₃ with q_j = S T'_{j+1} S and C₀ = m₀† + S."""
    count = len(m_list) - 1
    T = composition_coefficients(backend, m_list, m0_pinv + S, count)
    return [S @ t @ S for t in T]


def triple_sum(
    backend: ScalarBackend,
    left: Laurent,
    middle: Laurent,
    right: Laurent,
    shift: int,
    orders: Sequence[int],
    size: int,
) -> Laurent:
    """out[j] = Σ_{j1+j2+j3 = j+shift} left[j1]·middle[j2]·right[j3]"""
    out: Laurent = {}
    for j in orders:
        total = backend.zeros(size, size)
        for j1, a in left.items():
            for j2, b in middle.items():
                j3 = j + shift - j1 - j2
                if j3 in right:
                    total = total + a @ b @ right[j3]
        out[j] = total
    return out


def add_laurent(backend: ScalarBackend, first: Laurent, second: Laurent, size: int) -> Laurent:
    out: Laurent = {}
    for j in sorted(set(first) | set(second)):
        out[j] = first.get(j, backend.zeros(size, size)) + second.get(j, backend.zeros(size, size))
    return out


@dataclass(frozen=True, eq=False)
class CascadeResult:
    M: List[np.ndarray]
    B: List[np.ndarray]
    m: List[np.ndarray]
    C: List[np.ndarray]
    q: List[np.ndarray]
    A: List[np.ndarray]
    inverse: Laurent


def invert_M(
    backend: ScalarBackend,
    M_list: Sequence[np.ndarray],
    M0_pinv: np.ndarray,
    Q: np.ndarray,
    m0_pinv: np.ndarray,
    S: np.ndarray,
    top_order: int = 1,
) -> CascadeResult:
    """Laurent coefficients X₋₂..X_top of M(κ)⁻¹, for every threshold type."""
    k = M_list[0].shape[0]
    depth = top_order + 2
    if len(M_list) < depth + 3:
        raise OrderExceedsCap(f"inverting up to order {top_order} needs M up to M_{depth + 2}")
    orders = list(range(-2, top_order + 1))

    B = neumann_cascade(backend, M_list, Q, depth, ambient=None)
    m_list: List[np.ndarray] = []
    C: List[np.ndarray] = []
    q_list: List[np.ndarray] = []
    A: List[np.ndarray] = []

    if k == 0 or backend.is_zero_matrix(Q):
        inverse = {j: (B[j] if j >= 0 else backend.zeros(k, k)) for j in orders}
        return CascadeResult(list(M_list), B, m_list, C, q_list, A, inverse)

    m_list = m_coefficients(backend, M_list[: depth + 3], M0_pinv, Q)
    C = neumann_cascade(backend, m_list, S, depth, ambient=Q)
    C_series: Laurent = dict(enumerate(C))

    if backend.is_zero_matrix(S):
        inner = C_series
    else:
        q_list = q_coefficients(backend, m_list, m0_pinv, S)
        try:
            A = neumann_cascade(backend, q_list, backend.zeros(k, k), depth, ambient=S)
        except LeadingNotInvertible as exc:
            raise ConsistencyViolation(
                "q0 = S m1 S is not invertible on S; the resolvent would grow faster than κ^-2"
            ) from exc
        correction = triple_sum(backend, C_series, dict(enumerate(A)), C_series, 1, range(-1, depth), k)
        inner = add_laurent(backend, C_series, correction, k)

    B_series: Laurent = dict(enumerate(B))
    correction = triple_sum(backend, B_series, inner, B_series, 1, orders, k)
    inverse = {j: correction[j] + (B[j] if j >= 0 else backend.zeros(k, k)) for j in orders}
    logger.debug(f"Cascade finished: {len(M_list)} M, {len(m_list)} m, {len(q_list)} q coefficients")
    return CascadeResult(list(M_list), B, m_list, C, q_list, A, inverse)
