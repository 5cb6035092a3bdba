"""
Truncated power series in κ with exact rational coefficients.

A series carries the order J through which its coefficients are valid;
arithmetic keeps the minimum of the inputs' orders and never reads past it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple, Union

from ..errors import DivisionByZeroConstantTerm

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Series:
    coeffs: Tuple[Fraction, ...]
    order: int

    @classmethod
    def of(cls, coeffs: Sequence[Number], order: int) -> "Series":
        padded = [Fraction(c) for c in coeffs[: order + 1]]
        padded.extend([Fraction(0)] * (order + 1 - len(padded)))
        return cls(tuple(padded), order)

    @classmethod
    def constant(cls, value: Number, order: int) -> "Series":
        return cls.of([value], order)

    @classmethod
    def variable(cls, order: int) -> "Series":
        """The series κ itself."""
        return cls.of([0, 1], order)

    def coefficient(self, j: int) -> Fraction:
        if j < 0 or j > self.order:
            raise IndexError(f"coefficient {j} outside valid order {self.order}")
        return self.coeffs[j]

    def _coerce(self, other: Union["Series", Number]) -> "Series":
        if isinstance(other, Series):
            return other
        return Series.constant(other, self.order)

    def __add__(self, other):
        return add(self, self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, -self._coerce(other))

    def __rsub__(self, other):
        return add(self._coerce(other), -self)

    def __neg__(self):
        return Series(tuple(-c for c in self.coeffs), self.order)

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        factor = Fraction(other)
        return Series(tuple(c * factor for c in self.coeffs), self.order)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        return pow_series(self, exponent)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


def add(a: Series, b: Series) -> Series:
    order = min(a.order, b.order)
    return Series(tuple(a.coeffs[i] + b.coeffs[i] for i in range(order + 1)), order)


def mul(a: Series, b: Series) -> Series:
    order = min(a.order, b.order)
    out = [Fraction(0)] * (order + 1)
    for i in range(order + 1):
        ai = a.coeffs[i]
        if ai == 0:
            continue
        for j in range(order + 1 - i):
            out[i + j] += ai * b.coeffs[j]
    return Series(tuple(out), order)


def inv(a: Series) -> Series:
    """Reciprocal by back-substitution; needs a non-zero constant term."""
    if a.coeffs[0] == 0:
        raise DivisionByZeroConstantTerm("cannot invert a series with zero constant term")
    lead = a.coeffs[0]
    out = [Fraction(1) / lead]
    for k in range(1, a.order + 1):
        acc = sum((a.coeffs[i] * out[k - i] for i in range(1, k + 1)), Fraction(0))
        out.append(-acc / lead)
    return Series(tuple(out), a.order)


def divide_by_kappa(a: Series) -> Series:
    """a/κ; loses one order of validity."""
    if a.coeffs[0] != 0:
        raise DivisionByZeroConstantTerm("series has a non-zero constant term")
    if a.order == 0:
        raise DivisionByZeroConstantTerm("no valid coefficients left after division")
    return Series(a.coeffs[1:], a.order - 1)


def sqrt_one_plus(a: Series) -> Series:
    """√(1 + a) for a series a without constant term."""
    if a.coeffs[0] != 0:
        raise ValueError("sqrt_one_plus expects a series with zero constant term")
    out = [Fraction(1)]
    for k in range(1, a.order + 1):
        cross = sum((out[i] * out[k - i] for i in range(1, k)), Fraction(0))
        out.append((a.coeffs[k] - cross) / 2)
    return Series(tuple(out), a.order)


def pow_series(a: Series, exponent: int) -> Series:
    if exponent < 0:
        return pow_series(inv(a), -exponent)
    result = Series.constant(1, a.order)
    base = a
    while exponent:
        if exponent & 1:
            result = mul(result, base)
        exponent >>= 1
        if exponent:
            base = mul(base, base)
    return result


@lru_cache(maxsize=None)
def mu_series(order: int) -> Series:
    """μ(κ) = 1 + κ²/2 − κ√(1 + κ²/4), the decaying root of μ² − (2+κ²)μ + 1 = 0."""
    if order < 0:
        raise ValueError("order must be non-negative")
    kappa = Series.variable(order)
    kappa_sq = mul(kappa, kappa)
    root = sqrt_one_plus(kappa_sq * Fraction(1, 4))
    return Series.constant(1, order) + kappa_sq * Fraction(1, 2) - mul(kappa, root)


@lru_cache(maxsize=None)
def _mu_powers(order: int, count: int) -> Tuple[Series, ...]:
    mu = mu_series(order)
    powers = [Series.constant(1, order)]
    for _ in range(count):
        powers.append(mul(powers[-1], mu))
    return tuple(powers)


@lru_cache(maxsize=None)
def _entry_series(near: int, far: int, order: int) -> Series:
    # (μ^a − μ^b)/(μ⁻¹ − μ) = (μ^{a+1} + … + μ^b)/(1 + μ)
    powers = _mu_powers(order, far)
    total = Series.constant(0, order)
    for i in range(near + 1, far + 1):
        total = add(total, powers[i])
    return mul(total, inv(Series.constant(1, order) + powers[1]))


def ray_resolvent_entry_series(n: int, m: int, order: int) -> Series:
    """Series of the Dirichlet half-line resolvent entry r(κ)[n, m]; coefficient j is g_j[n, m]."""
    if n < 1 or m < 1:
        raise ValueError("ray positions start at 1")
    return _entry_series(abs(n - m), n + m, order)
