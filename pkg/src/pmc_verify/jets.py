"""Truncated bivariate Taylor polynomials ("jets").

A :class:`Jet` of degree ``d`` stores the Taylor coefficients ``c_ij`` of a
function of two chart variables ``(u, v)`` about an expansion point, for all
monomials ``u^i v^j`` with ``i + j <= d``::

    f(u0 + du, v0 + dv) = sum_{i+j<=d} c_ij du^i dv^j + O(|d|^(d+1))

Coefficients are stored densely in graded-lex order (``1, u, v, u^2, uv, v^2,
...``) along the first axis of ``coeffs``.  Trailing axes hold the *value
shape*, so one jet can carry a vector or a matrix of functions; arithmetic
broadcasts over the value shape exactly like numpy arrays do.

Example::

    >>> u = Jet.variable(0, 0.0)
    >>> (sin(u) * cos(u)).partial(3, 0)   # d^3/du^3 of sin(2u)/2 at 0
    -4.0
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DivisionBySingularJet, DomainError, OrderOutOfRange

DEFAULT_DEGREE = 4
DIVISION_EPS = 1e-14


def n_coeffs(degree: int) -> int:
    return (degree + 1) * (degree + 2) // 2


def monomial_index(i: int, j: int) -> int:
    """Position of ``u^i v^j`` in graded-lex storage."""
    k = i + j
    return k * (k + 1) // 2 + j


@lru_cache(maxsize=None)
def exponents(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(i, j)`` of the u- and v-exponents of every stored monomial."""
    ii, jj = [], []
    for k in range(degree + 1):
        for j in range(k + 1):
            ii.append(k - j)
            jj.append(j)
    return np.array(ii), np.array(jj)


@lru_cache(maxsize=None)
def _product_table(degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # every pair of monomials whose product survives truncation, and a 0/1
    # matrix scattering the pair products onto output monomials
    ei, ej = exponents(degree)
    left, right, out = [], [], []
    n = n_coeffs(degree)
    for a in range(n):
        for b in range(n):
            i, j = ei[a] + ei[b], ej[a] + ej[b]
            if i + j <= degree:
                left.append(a)
                right.append(b)
                out.append(monomial_index(i, j))
    scatter = np.zeros((n, len(out)))
    scatter[out, np.arange(len(out))] = 1.0
    return np.array(left), np.array(right), scatter


@lru_cache(maxsize=None)
def _diff_table(degree: int, axis: int) -> tuple[np.ndarray, np.ndarray]:
    ei, ej = exponents(degree - 1)
    if axis == 0:
        src = [monomial_index(i + 1, j) for i, j in zip(ei, ej)]
        fac = ei + 1
    else:
        src = [monomial_index(i, j + 1) for i, j in zip(ei, ej)]
        fac = ej + 1
    return np.array(src), fac.astype(float)


def _lift(coeffs: np.ndarray, ndim: int) -> np.ndarray:
    """Insert singleton value axes so ``coeffs`` has ``ndim`` value dimensions."""
    extra = ndim - (coeffs.ndim - 1)
    if extra <= 0:
        return coeffs
    return coeffs.reshape(coeffs.shape[:1] + (1,) * extra + coeffs.shape[1:])


class Jet:
    """Truncated Taylor expansion of a scalar- or array-valued function of (u, v)."""

    __slots__ = ("coeffs", "degree")
    __array_ufunc__ = None  # make ndarray (op) Jet dispatch to Jet's reflected ops

    def __init__(self, coeffs, degree: int | None = None):
        coeffs = np.asarray(coeffs, dtype=float)
        if degree is None:
            n = coeffs.shape[0]
            degree = int(round((math.sqrt(8 * n + 1) - 3) / 2))
        if coeffs.shape[0] != n_coeffs(degree):
            raise ValueError(
                f"degree {degree} needs {n_coeffs(degree)} coefficients, got {coeffs.shape[0]}"
            )
        self.coeffs = coeffs
        self.degree = degree

    # -- construction ------------------------------------------------------

    @classmethod
    def constant(cls, value, degree: int = DEFAULT_DEGREE) -> "Jet":
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros((n_coeffs(degree),) + value.shape)
        coeffs[0] = value
        return cls(coeffs, degree)

    @classmethod
    def variable(cls, axis: int, value: float, degree: int = DEFAULT_DEGREE) -> "Jet":
        """The chart coordinate ``u`` (axis 0) or ``v`` (axis 1) expanded about ``value``."""
        jet = cls.constant(value, degree)
        if degree >= 1:
            jet.coeffs[1 + axis] = 1.0
        return jet

    @classmethod
    def from_polynomial(cls, terms: dict[tuple[int, int], float], degree: int = DEFAULT_DEGREE) -> "Jet":
        """Build a jet from ``{(i, j): coefficient}``, silently truncating high orders."""
        coeffs = np.zeros(n_coeffs(degree))
        for (i, j), c in terms.items():
            if i + j <= degree:
                coeffs[monomial_index(i, j)] += c
        return cls(coeffs, degree)

    # -- inspection --------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        """Value at the expansion point (the constant Taylor coefficient)."""
        v = self.coeffs[0]
        return float(v) if v.ndim == 0 else v.copy()

    def coefficient(self, i: int, j: int):
        if i < 0 or j < 0 or i + j > self.degree:
            raise OrderOutOfRange(f"monomial u^{i} v^{j} exceeds jet degree {self.degree}")
        c = self.coeffs[monomial_index(i, j)]
        return float(c) if c.ndim == 0 else c.copy()

    def partial(self, i: int, j: int):
        """``d^(i+j) f / du^i dv^j`` at the expansion point."""
        return self.coefficient(i, j) * (math.factorial(i) * math.factorial(j))

    def __repr__(self) -> str:
        return f"Jet(degree={self.degree}, shape={self.shape}, value={self.coeffs[0]!r})"

    # -- structural operations ---------------------------------------------

    def truncate(self, degree: int) -> "Jet":
        if degree > self.degree:
            raise OrderOutOfRange(f"cannot raise jet degree {self.degree} to {degree}")
        if degree == self.degree:
            return self
        return Jet(self.coeffs[: n_coeffs(degree)], degree)

    def diff(self, axis: int) -> "Jet":
        """Jet of the partial derivative along ``axis``; one degree lower."""
        if self.degree < 1:
            raise OrderOutOfRange("cannot differentiate a degree-0 jet")
        src, fac = _diff_table(self.degree, axis)
        return Jet(self.coeffs[src] * _lift(fac, self.coeffs.ndim - 1), self.degree - 1)

    def antiderivative(self, axis: int, constant=0.0) -> "Jet":
        """Jet of F with dF/d(axis) = self, F = ``constant`` along the other axis.

        The result keeps ``self.degree`` (the top order of F is dropped)."""
        d = self.degree
        coeffs = np.zeros_like(self.coeffs)
        ei, ej = exponents(d)
        for k in range(n_coeffs(d)):
            i, j = ei[k], ej[k]
            if i + j + 1 > d:
                continue
            if axis == 0:
                coeffs[monomial_index(i + 1, j)] = self.coeffs[k] / (i + 1)
            else:
                coeffs[monomial_index(i, j + 1)] = self.coeffs[k] / (j + 1)
        coeffs[0] = constant
        return Jet(coeffs, d)

    def __getitem__(self, index) -> "Jet":
        if not isinstance(index, tuple):
            index = (index,)
        return Jet(self.coeffs[(slice(None),) + index], self.degree)

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axes = tuple(range(1, self.coeffs.ndim))
        elif isinstance(axis, tuple):
            axes = tuple(a + 1 if a >= 0 else a for a in axis)
        else:
            axes = axis + 1 if axis >= 0 else axis
        return Jet(self.coeffs.sum(axis=axes), self.degree)

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.coeffs.reshape(self.coeffs.shape[:1] + tuple(shape)), self.degree)

    def transpose(self, *axes) -> "Jet":
        if not axes:
            axes = tuple(reversed(range(len(self.shape))))
        return Jet(self.coeffs.transpose((0,) + tuple(a + 1 for a in axes)), self.degree)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    # -- arithmetic ----------------------------------------------------------

    def _pair(self, other: "Jet") -> tuple[np.ndarray, np.ndarray, int]:
        d = min(self.degree, other.degree)
        n = n_coeffs(d)
        ndim = max(len(self.shape), len(other.shape))
        return _lift(self.coeffs[:n], ndim), _lift(other.coeffs[:n], ndim), d

    def _shift(self, value, sign: float) -> "Jet":
        value = np.asarray(value, dtype=float)
        shape = np.broadcast_shapes(self.shape, value.shape)
        coeffs = np.broadcast_to(_lift(self.coeffs, len(shape)), self.coeffs.shape[:1] + shape).copy()
        coeffs[0] = coeffs[0] * sign + value
        if sign < 0:
            coeffs[1:] *= -1.0
        return Jet(coeffs, self.degree)

    def __add__(self, other) -> "Jet":
        if isinstance(other, Jet):
            a, b, d = self._pair(other)
            return Jet(a + b, d)
        return self._shift(other, 1.0)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.coeffs, self.degree)

    def __pos__(self) -> "Jet":
        return self

    def __sub__(self, other) -> "Jet":
        if isinstance(other, Jet):
            a, b, d = self._pair(other)
            return Jet(a - b, d)
        return self._shift(-np.asarray(other, dtype=float), 1.0)

    def __rsub__(self, other) -> "Jet":
        return self._shift(other, -1.0)

    def __mul__(self, other) -> "Jet":
        if isinstance(other, Jet):
            a, b, d = self._pair(other)
            left, right, scatter = _product_table(d)
            prod = a[left] * b[right]
            return Jet(np.tensordot(scatter, prod, axes=(1, 0)), d)
        value = np.asarray(other, dtype=float)
        ndim = max(len(self.shape), value.ndim)
        return Jet(_lift(self.coeffs, ndim) * value, self.degree)

    __rmul__ = __mul__

    def reciprocal(self, eps: float = DIVISION_EPS) -> "Jet":
        b0 = self.coeffs[0]
        if np.any(np.abs(b0) < eps):
            raise DivisionBySingularJet(
                f"constant term {b0!r} of divisor is below {eps:g} (degenerate chart point?)"
            )
        derivs = [(-1.0) ** k / b0 ** (k + 1) for k in range(self.degree + 1)]
        return _compose(self, derivs)

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        value = np.asarray(other, dtype=float)
        if np.any(np.abs(value) < DIVISION_EPS):
            raise DivisionBySingularJet(f"division by {value!r}")
        return self * (1.0 / value)

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, p) -> "Jet":
        if isinstance(p, (int, np.integer)):
            p = int(p)
            if p < 0:
                return self.reciprocal() ** (-p)
            result = Jet.constant(np.ones(self.shape), self.degree)
            base = self
            while p:
                if p & 1:
                    result = result * base
                p >>= 1
                if p:
                    base = base * base
            return result
        return power(self, float(p))


# -- free functions ------------------------------------------------------------


def _compose(a: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """sum_k derivs[k] * (a - a0)^k, with derivs[k] = f^(k)(a0) / k!."""
    h = Jet(a.coeffs.copy(), a.degree)
    h.coeffs[0] = 0.0
    result = Jet.constant(derivs[a.degree], a.degree)
    for k in range(a.degree - 1, -1, -1):
        result = result * h + derivs[k]
    return result


def _series(fn: Callable[[np.ndarray, int], np.ndarray]):
    def apply(a: Jet) -> Jet:
        a0 = a.coeffs[0]
        return _compose(a, [fn(a0, k) / math.factorial(k) for k in range(a.degree + 1)])

    return apply


def _sin_k(x, k):
    return [np.sin, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t)][k % 4](x)


def _cos_k(x, k):
    return _sin_k(x, k + 1)


def _sinh_k(x, k):
    return np.sinh(x) if k % 2 == 0 else np.cosh(x)


def _cosh_k(x, k):
    return _sinh_k(x, k + 1)


sin = _series(_sin_k)
cos = _series(_cos_k)
sinh = _series(_sinh_k)
cosh = _series(_cosh_k)
exp = _series(lambda x, k: np.exp(x))


def log(a: Jet) -> Jet:
    a0 = a.coeffs[0]
    if np.any(a0 <= 0):
        raise DomainError(f"log needs a positive constant term, got {a0!r}")
    derivs = [np.log(a0)] + [(-1.0) ** (k - 1) / (k * a0**k) for k in range(1, a.degree + 1)]
    return _compose(a, derivs)


def power(a: Jet, p: float) -> Jet:
    if float(p).is_integer():
        return a ** int(p)
    a0 = a.coeffs[0]
    if np.any(a0 <= 0):
        raise DomainError(f"non-integer power needs a positive constant term, got {a0!r}")
    derivs = []
    binom = 1.0
    for k in range(a.degree + 1):
        derivs.append(binom * a0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _compose(a, derivs)


def sqrt(a: Jet) -> Jet:
    return power(a, 0.5)


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    """Stack jets along a new value axis (``axis`` counts value axes only)."""
    d = min(j.degree for j in jets)
    n = n_coeffs(d)
    ax = axis + 1 if axis >= 0 else axis
    return Jet(np.stack([j.coeffs[:n] for j in jets], axis=ax), d)


def as_jet(x, degree: int) -> Jet:
    return x if isinstance(x, Jet) else Jet.constant(x, degree)


def einsum(subscripts: str, a, b) -> Jet:
    """Two-operand einsum over the value axes, with truncated jet multiplication.

    Either operand may be a plain array, which is treated as a constant."""
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    if not isinstance(a, Jet):
        return Jet(np.einsum(f"{sa},z{sb}->z{out}", np.asarray(a, float), b.coeffs), b.degree)
    if not isinstance(b, Jet):
        return Jet(np.einsum(f"z{sa},{sb}->z{out}", a.coeffs, np.asarray(b, float)), a.degree)
    d = min(a.degree, b.degree)
    n = n_coeffs(d)
    left, right, scatter = _product_table(d)
    prod = np.einsum(f"z{sa},z{sb}->z{out}", a.coeffs[:n][left], b.coeffs[:n][right])
    return Jet(np.tensordot(scatter, prod, axes=(1, 0)), d)


# -- operation-style API --------------------------------------------------------

_ARITH = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}

_ELEM = {
    "sqrt": sqrt,
    "sin": sin,
    "cos": cos,
    "exp": exp,
    "log": log,
    "sinh": sinh,
    "cosh": cosh,
}


def jet_arith(a: Jet, b: Jet, kind: str) -> Jet:
    if a.degree != b.degree:
        raise ValueError(f"jet degrees differ: {a.degree} vs {b.degree}")
    try:
        op = _ARITH[kind]
    except KeyError:
        raise ValueError(f"unknown arithmetic kind {kind!r}; expected one of {sorted(_ARITH)}") from None
    return op(a, b)


def jet_elem(a: Jet, fn: str, p: float | None = None) -> Jet:
    if fn == "pow":
        if p is None:
            raise ValueError("jet_elem(..., 'pow') needs an exponent p")
        return power(a, p)
    try:
        f = _ELEM[fn]
    except KeyError:
        raise ValueError(f"unknown function {fn!r}; expected one of {sorted(_ELEM) + ['pow']}") from None
    return f(a)


def jet_partial(a: Jet, i: int, j: int):
    return a.partial(i, j)
