"""
Scalar backends for the small dense matrices on the coupling space.

RationalBackend keeps every entry a ``fractions.Fraction`` inside numpy object
arrays and decides ranks exactly by Gauss-Jordan elimination.
FloatBackend works in float64 and decides ranks against a relative tolerance.
Both expose the same operations so the analysis code never branches on the
arithmetic in use.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import AsymmetricInput, InvalidFraction, RationalBackendUnsupported, SingularMatrix
from .jacobi import symmetric_eigen

logger = logging.getLogger(__name__)

Scalar = Any


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of k-dimensional coordinate space given by basis columns."""

    ambient_dim: int
    basis: np.ndarray
    gram: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    def columns(self) -> List[np.ndarray]:
        return [self.basis[:, i] for i in range(self.dim)]


class ScalarBackend(ABC):
    """Operations every backend provides."""

    name: str = "abstract"
    exact: bool = False

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    @abstractmethod
    def scalar(self, value: Any) -> Scalar: ...

    @abstractmethod
    def zeros(self, rows: int, cols: int) -> np.ndarray: ...

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros(n, n)
        for i in range(n):
            out[i, i] = self.scalar(1)
        return out

    def matrix(self, rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> np.ndarray:
        rows = list(rows)
        width = cols if cols is not None else (len(rows[0]) if rows else 0)
        out = self.zeros(len(rows), width)
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                out[i, j] = self.scalar(value)
        return out

    def vector(self, values: Iterable[Any]) -> np.ndarray:
        values = list(values)
        out = self.zeros(len(values), 1)[:, 0].copy()
        for i, value in enumerate(values):
            out[i] = self.scalar(value)
        return out

    def column_stack(self, columns: Sequence[np.ndarray], rows: int) -> np.ndarray:
        out = self.zeros(rows, len(columns))
        for j, column in enumerate(columns):
            out[:, j] = column
        return out

    # ------------------------------------------------------------------
    # Predicates
    # ------------------------------------------------------------------
    @abstractmethod
    def is_zero(self, value: Scalar, scale: float = 1.0) -> bool: ...

    def is_zero_matrix(self, a: np.ndarray, reference: Optional[np.ndarray] = None) -> bool:
        if a.size == 0:
            return True
        scale = self.norm_inf(reference) if reference is not None and reference.size else 1.0
        return all(self.is_zero(x, scale) for x in a.flat)

    def equal(self, a: Scalar, b: Scalar, scale: float = 1.0) -> bool:
        return self.is_zero(a - b, scale)

    def matrices_equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        if a.shape != b.shape:
            return False
        scale = max(self.norm_inf(a), self.norm_inf(b), 1.0)
        return all(self.is_zero(x, scale) for x in (a - b).flat)

    def norm_inf(self, a: np.ndarray) -> float:
        if a is None or a.size == 0:
            return 0.0
        return float(max(abs(float(x)) for x in a.flat))

    def check_symmetric(self, a: np.ndarray) -> None:
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise AsymmetricInput(f"expected a square matrix, got shape {a.shape}")
        if not self.matrices_equal(a, a.T):
            raise AsymmetricInput("matrix is not symmetric")

    # ------------------------------------------------------------------
    # Core linear algebra
    # ------------------------------------------------------------------
    @abstractmethod
    def kernel(self, a: np.ndarray) -> np.ndarray:
        """Basis columns of the null space of a rectangular matrix."""

    @abstractmethod
    def span(self, vectors: np.ndarray) -> Subspace:
        """Canonical basis of the column span."""

    @abstractmethod
    def inverse(self, a: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def pseudo_inverse(self, a: np.ndarray) -> np.ndarray: ...

    def null_space(self, a: np.ndarray) -> Subspace:
        self.check_symmetric(a)
        return self.span(self.kernel(a))

    def zero_subspace(self, n: int) -> Subspace:
        return Subspace(n, self.zeros(n, 0), self.zeros(0, 0))

    def full_space(self, n: int) -> Subspace:
        return self.span(self.identity(n))

    def orthogonal_projection(self, subspace: Subspace) -> np.ndarray:
        n = subspace.ambient_dim
        if subspace.dim == 0:
            return self.zeros(n, n)
        basis = subspace.basis
        return basis @ self.inverse(subspace.gram) @ basis.T

    def subspace_intersect(self, first: Subspace, second: Subspace) -> Subspace:
        n = first.ambient_dim
        if first.dim == 0 or second.dim == 0:
            return self.zero_subspace(n)
        stacked = self.zeros(n, first.dim + second.dim)
        stacked[:, : first.dim] = first.basis
        stacked[:, first.dim :] = -second.basis
        coefficients = self.kernel(stacked)
        if coefficients.shape[1] == 0:
            return self.zero_subspace(n)
        return self.span(first.basis @ coefficients[: first.dim, :])

    def subspace_orthocomplement_within(self, first: Subspace, second: Subspace) -> Subspace:
        """first ∩ second^⊥"""
        n = first.ambient_dim
        if first.dim == 0:
            return self.zero_subspace(n)
        if second.dim == 0:
            return first
        coefficients = self.kernel(second.basis.T @ first.basis)
        if coefficients.shape[1] == 0:
            return self.zero_subspace(n)
        return self.span(first.basis @ coefficients)

    def symmetric_eigen(self, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise RationalBackendUnsupported("symmetric_eigen needs the float backend")

    def to_float(self, a: np.ndarray) -> np.ndarray:
        return np.asarray(a, dtype=np.float64)

    @abstractmethod
    def format_scalar(self, value: Scalar) -> Any: ...


class RationalBackend(ScalarBackend):
    """Exact arithmetic over the rationals."""

    name = "rational"
    exact = True

    def scalar(self, value: Any) -> Fraction:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, float):
            # the exact binary value; decimal literals go through parse_fraction
            if not math.isfinite(value):
                raise InvalidFraction(f"non-finite value {value!r} on the rational backend")
            return Fraction(value)
        return Fraction(value)

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        out = np.empty((rows, cols), dtype=object)
        out.fill(Fraction(0))
        return out

    def is_zero(self, value: Scalar, scale: float = 1.0) -> bool:
        return value == 0

    def rref(self, a: np.ndarray) -> Tuple[np.ndarray, List[int]]:
        """Reduced row echelon form and pivot columns."""
        m = np.array(a, dtype=object, copy=True)
        rows, cols = m.shape
        pivots: List[int] = []
        pivot_row = 0
        for col in range(cols):
            if pivot_row == rows:
                break
            found = next((r for r in range(pivot_row, rows) if m[r, col] != 0), None)
            if found is None:
                continue
            if found != pivot_row:
                m[[pivot_row, found], :] = m[[found, pivot_row], :]
            lead = m[pivot_row, col]
            m[pivot_row, :] = [x / lead for x in m[pivot_row, :]]
            for r in range(rows):
                if r != pivot_row and m[r, col] != 0:
                    factor = m[r, col]
                    m[r, :] = m[r, :] - factor * m[pivot_row, :]
            pivots.append(col)
            pivot_row += 1
        return m, pivots

    def rank(self, a: np.ndarray) -> int:
        if a.size == 0:
            return 0
        return len(self.rref(a)[1])

    def kernel(self, a: np.ndarray) -> np.ndarray:
        rows, cols = a.shape
        if cols == 0:
            return self.zeros(0, 0)
        if rows == 0:
            return self.identity(cols)
        reduced, pivots = self.rref(a)
        free = [c for c in range(cols) if c not in pivots]
        out = self.zeros(cols, len(free))
        for j, free_col in enumerate(free):
            out[free_col, j] = Fraction(1)
            for i, pivot_col in enumerate(pivots):
                out[pivot_col, j] = -reduced[i, free_col]
        return out

    def span(self, vectors: np.ndarray) -> Subspace:
        n = vectors.shape[0]
        if vectors.size == 0:
            return self.zero_subspace(n)
        reduced, pivots = self.rref(vectors.T)
        basis = np.array(reduced[: len(pivots), :].T, dtype=object)
        if basis.shape[1] == 0:
            return self.zero_subspace(n)
        return Subspace(n, basis, basis.T @ basis)

    def solve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        n = a.shape[0]
        if a.shape != (n, n):
            raise SingularMatrix("solve expects a square matrix")
        rhs = b.reshape(n, -1)
        augmented = self.zeros(n, n + rhs.shape[1])
        augmented[:, :n] = a
        augmented[:, n:] = rhs
        reduced, pivots = self.rref(augmented)
        if pivots[:n] != list(range(n)):
            raise SingularMatrix("matrix is singular")
        out = reduced[:, n:]
        return out.reshape(b.shape) if b.ndim == 1 else out

    def inverse(self, a: np.ndarray) -> np.ndarray:
        if a.shape[0] == 0:
            return self.zeros(0, 0)
        return self.solve(a, self.identity(a.shape[0]))

    def pseudo_inverse(self, a: np.ndarray) -> np.ndarray:
        # For symmetric A with range spanned by B: A† = B (BᵀAB)⁻¹ Bᵀ
        self.check_symmetric(a)
        n = a.shape[0]
        if n == 0:
            return self.zeros(0, 0)
        _, pivots = self.rref(a)
        if not pivots:
            return self.zeros(n, n)
        basis = a[:, pivots]
        return basis @ self.inverse(basis.T @ a @ basis) @ basis.T

    def format_scalar(self, value: Scalar) -> str:
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"


class FloatBackend(ScalarBackend):
    """float64 arithmetic; rank cuts at rank_tol·max(1, largest singular value)."""

    name = "float"
    exact = False

    def __init__(self, rank_tol: float = 1e-9) -> None:
        self.rank_tol = float(rank_tol)

    def scalar(self, value: Any) -> float:
        return float(value)

    def zeros(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=np.float64)

    def matrix(self, rows: Sequence[Sequence[Any]], cols: Optional[int] = None) -> np.ndarray:
        out = super().matrix(rows, cols)
        return out.astype(np.float64)

    def is_zero(self, value: Scalar, scale: float = 1.0) -> bool:
        return abs(float(value)) <= self.rank_tol * max(1.0, float(scale))

    def cutoff(self, largest: float) -> float:
        return self.rank_tol * max(1.0, largest)

    def symmetric_eigen(self, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        self.check_symmetric(a)
        sym = 0.5 * (np.asarray(a, dtype=np.float64) + np.asarray(a, dtype=np.float64).T)
        return symmetric_eigen(sym)

    def _split_spectrum(self, a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if a.shape[0] == 0:
            return np.zeros(0), np.zeros((0, 0)), np.zeros(0, dtype=bool)
        values, vectors = self.symmetric_eigen(a)
        largest = float(np.max(np.abs(values))) if values.size else 0.0
        small = np.abs(values) <= self.cutoff(largest)
        near = np.abs(values[~small]) <= 100 * self.cutoff(largest)
        if np.any(near):
            logger.warning(f"Rank decision within 100x of rank_tol (largest eigenvalue {largest:.3e})")
        return values, vectors, small

    def kernel(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        rows, cols = a.shape
        if cols == 0:
            return self.zeros(0, 0)
        if rows == 0:
            return np.eye(cols)
        _, sigma, vt = np.linalg.svd(a)
        largest = float(sigma[0]) if sigma.size else 0.0
        rank = int(np.sum(sigma > self.cutoff(largest)))
        return vt[rank:, :].T.copy()

    def null_space(self, a: np.ndarray) -> Subspace:
        _, vectors, small = self._split_spectrum(a)
        basis = vectors[:, small]
        return Subspace(a.shape[0], basis, basis.T @ basis)

    def span(self, vectors: np.ndarray) -> Subspace:
        vectors = np.asarray(vectors, dtype=np.float64)
        n = vectors.shape[0]
        if vectors.size == 0:
            return self.zero_subspace(n)
        u, sigma, _ = np.linalg.svd(vectors, full_matrices=False)
        largest = float(sigma[0]) if sigma.size else 0.0
        rank = int(np.sum(sigma > self.cutoff(largest)))
        basis = u[:, :rank].copy()
        return Subspace(n, basis, basis.T @ basis)

    def inverse(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64)
        if a.shape[0] == 0:
            return self.zeros(0, 0)
        if np.allclose(a, a.T, atol=self.rank_tol * max(1.0, self.norm_inf(a))):
            _, _, small = self._split_spectrum(a)
            if np.any(small):
                raise SingularMatrix("matrix is singular within rank_tol")
        try:
            return np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrix(str(exc)) from exc

    def solve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.inverse(a) @ np.asarray(b, dtype=np.float64)

    def pseudo_inverse(self, a: np.ndarray) -> np.ndarray:
        values, vectors, small = self._split_spectrum(a)
        inverted = np.zeros_like(values)
        inverted[~small] = 1.0 / values[~small]
        return (vectors * inverted) @ vectors.T

    def rank(self, a: np.ndarray) -> int:
        if a.size == 0:
            return 0
        return a.shape[1] - self.kernel(a).shape[1]

    def format_scalar(self, value: Scalar) -> float:
        return float(value)


def get_backend(name: str, rank_tol: float = 1e-9) -> ScalarBackend:
    """Backend by configuration name."""
    normalized = (name or "rational").strip().lower()
    if normalized == "rational":
        return RationalBackend()
    if normalized == "float":
        return FloatBackend(rank_tol)
    raise ValueError(f"Unknown backend: {name}")
