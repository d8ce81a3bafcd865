"""The product space M^n(c) x R realised inside a flat (pseudo-)Euclidean space.

``M^n(c)`` is the quadric ``<x, x> = 1/c`` in R^{n+1}: a round sphere when
``c > 0`` and the upper sheet of the hyperboloid (Lorentz signature on the
first coordinate) when ``c < 0``.  For ``c = 0`` it is flat R^n.  The line
factor is appended as the last coordinate, so the vertical field ``xi`` is the
constant last basis vector and the Levi-Civita connection of the product is the
flat derivative followed by :func:`tangential_project`.

All vector helpers accept plain arrays or :class:`~pmc_verify.jets.Jet` values
with the ambient coordinates on the last value axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NotTangent, OffManifold
from .jets import Jet

TANGENCY_TOL = 1e-9


@dataclass(frozen=True)
class SpaceForm:
    c: float
    n: int = 3

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"space form dimension must be >= 2, got {self.n}")

    @property
    def model(self) -> str:
        if self.c > 0:
            return "sphere"
        if self.c < 0:
            return "hyperboloid"
        return "flat"

    @property
    def coord_dim(self) -> int:
        return self.n if self.c == 0 else self.n + 1

    @cached_property
    def signature(self) -> np.ndarray:
        sig = np.ones(self.coord_dim)
        if self.c < 0:
            sig[0] = -1.0
        return sig

    def quadric_residual(self, x) -> float:
        """|c<x, x> - 1| for c != 0 (relative form of <x,x> = 1/c); 0 in the flat model."""
        if self.c == 0:
            return 0.0
        x = np.asarray(x, dtype=float)
        res = abs(self.c * float(np.sum(self.signature * x * x)) - 1.0)
        if self.c < 0 and x[0] <= 0:
            return max(res, 1.0)  # lower sheet of the hyperboloid
        return res


@dataclass(frozen=True)
class ProductSpace:
    base: SpaceForm

    @classmethod
    def of(cls, c: float, n: int = 3) -> "ProductSpace":
        return cls(SpaceForm(float(c), n))

    @property
    def c(self) -> float:
        return self.base.c

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def ambient_dim(self) -> int:
        return self.base.coord_dim + 1

    @cached_property
    def metric(self) -> np.ndarray:
        """Diagonal of the flat ambient metric (quadric block, then the line)."""
        return np.append(self.base.signature, 1.0)

    @cached_property
    def xi(self) -> np.ndarray:
        e = np.zeros(self.ambient_dim)
        e[-1] = 1.0
        return e

    def quadric_part(self, p):
        """The M-factor coordinates of ``p`` padded with a zero line coordinate."""
        mask = np.ones(self.ambient_dim)
        mask[-1] = 0.0
        return p * mask

    def manifold_residual(self, p) -> float:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.ambient_dim:
            raise DimensionMismatch(f"expected {self.ambient_dim} coordinates, got {p.shape[-1]}")
        return self.base.quadric_residual(p[:-1])


def _check_dim(space: ProductSpace, *vecs) -> None:
    for w in vecs:
        if w.shape[-1] != space.ambient_dim:
            raise DimensionMismatch(
                f"ambient vectors need {space.ambient_dim} coordinates, got {w.shape[-1]}"
            )


def ambient_inner(u, v, space: ProductSpace):
    """Inner product of the flat ambient metric, summed over the last axis."""
    _check_dim(space, u, v)
    return (u * v * space.metric).sum(axis=-1)


def quadric_normal_component(p, w, space: ProductSpace):
    """Coefficient of the quadric position vector in ``w`` (zero when c = 0)."""
    if space.c == 0:
        return 0.0 * ambient_inner(w, w, space)
    pm = space.quadric_part(p)
    return space.c * ambient_inner(w, pm, space)


def tangential_project(p, w, space: ProductSpace, tol: float = TANGENCY_TOL):
    """Orthogonal projection of an ambient vector onto T_p(M^n(c) x R)."""
    p0 = p.value if isinstance(p, Jet) else np.asarray(p, dtype=float)
    _check_dim(space, p, w)
    res = space.manifold_residual(p0)
    if res > tol:
        raise OffManifold(f"point is off the product manifold (residual {res:.3g})")
    if space.c == 0:
        return w
    coef = quadric_normal_component(p, w, space)
    if isinstance(coef, Jet):
        coef = coef.reshape(coef.shape + (1,))
    else:
        coef = np.asarray(coef)[..., None]
    return w - coef * space.quadric_part(p)


def tangency_residual(p, w, space: ProductSpace) -> float:
    """Size of the quadric-normal component of ``w`` at ``p`` (scale-free)."""
    if space.c == 0:
        return 0.0
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    pm = space.quadric_part(p)
    return abs(float(ambient_inner(w, pm, space))) * np.sqrt(abs(space.c))


def ambient_curvature(X, Y, Z, p, space: ProductSpace, tol: float = TANGENCY_TOL) -> np.ndarray:
    """R(X,Y)Z of M^n(c) x R at ``p`` for tangent vectors X, Y, Z."""
    X, Y, Z, p = (np.asarray(a, dtype=float) for a in (X, Y, Z, p))
    _check_dim(space, X, Y, Z, p)
    if space.manifold_residual(p) > tol:
        raise OffManifold("base point is off the product manifold")
    for name, w in (("X", X), ("Y", Y), ("Z", Z)):
        r = tangency_residual(p, w, space)
        if r > tol * max(1.0, float(np.linalg.norm(w))):
            raise NotTangent(f"{name} is not tangent to the product at p (residual {r:.3g})")
    c = space.c
    xi = space.xi

    def ip(a, b):
        return float(ambient_inner(a, b, space))

    yz, xz = ip(Y, Z), ip(X, Z)
    xx, yx, zx = ip(X, xi), ip(Y, xi), ip(Z, xi)
    return c * (
        yz * X
        - xz * Y
        - yx * zx * X
        + xx * zx * Y
        + xz * yx * xi
        - yz * xx * xi
    )
