"""Test-side oracles and surface builders shared across modules."""

from __future__ import annotations

import functools
import math

import numpy as np

from pmc_verify import jets
from pmc_verify.ambient import ProductSpace
from pmc_verify.catalog import CatalogSpec, make_surface
from pmc_verify.surface import Immersion, evaluate_state

@functools.lru_cache(maxsize=None)
def surface(family: str, c: float = 1.0, n: int = 3, **params):
    """Cached catalog construction; immersions are immutable so sharing is safe."""
    return make_surface(CatalogSpec(family, c, dict(params), n))


def generic_surface(c: float) -> Immersion:
    """A codimension-two surface with T, N, nonzero normal curvature and no symmetry.

    Not pmc; used for the identities that hold on every surface.
    """
    space = ProductSpace.of(c)

    def chart(u, v):
        if c > 0:
            r = 0.6 + 0.05 * jets.sin(u + 2 * v)
            s = jets.sqrt(1 / c - r * r)
            q = [r * jets.cos(u), r * jets.sin(u), s * jets.cos(v), s * jets.sin(v)]
        elif c < 0:
            b = math.sqrt(-c)
            w = 0.3 * u + 0.2 * jets.sin(v) * u
            q = [jets.cosh(w) * jets.cosh(v) / b, jets.sinh(w) * jets.cosh(v) / b,
                 jets.sinh(v) * jets.cos(u) / b, jets.sinh(v) * jets.sin(u) / b]
        else:
            q = [u, v, 0.2 * u * u - 0.1 * jets.sin(v) + 0.3 * u * v]
        t = 0.1 * jets.sin(u) * jets.cos(v) + 0.05 * u * v
        return jets.stack(q + [t])

    return Immersion(space, chart, ((0.3, 1.3), (0.2, 1.2)), name="generic", topology="disk", complete=False)


PMC_SURFACES = [
    ("clifford_torus", 1.0, {}),
    ("clifford_torus", 2.0, {"r": 0.3}),
    ("minimal_clifford_torus", 1.0, {}),
    ("round_sphere", 1.0, {}),
    ("round_sphere", 1.0, {"rho": math.pi / 4}),
    ("round_sphere", -1.0, {"rho": 0.5}),
    ("round_sphere", 0.0, {"rho": 1.5}),
    ("horosphere", -1.0, {}),
    ("vertical_cylinder", 1.0, {}),
    ("vertical_cylinder", -1.0, {}),
    ("vertical_cylinder", 0.0, {}),
    ("slice", 1.0, {}),
    ("slice", -1.0, {}),
    ("rotational_cmc", 1.0, {}),
    ("rotational_cmc", -1.0, {}),
    ("rotational_cmc", 0.0, {}),
]


def surface_id(entry) -> str:
    family, c, params = entry
    extra = ",".join(f"{k}={v:.3g}" for k, v in params.items())
    return f"{family}[c={c:g}{',' + extra if extra else ''}]"


FD_STEP = 1e-4


def fd_partials(quantity, im: Immersion, point, h: float = FD_STEP, degree: int = 2) -> dict:
    """Central-difference first and second partials of ``quantity(state) -> ndarray``.

    Only plain values at shifted points are used, never the jet derivatives.
    """
    u, v = point
    f = lambda du, dv: np.asarray(quantity(evaluate_state(im, (u + du, v + dv), degree)), dtype=float)
    f0 = f(0, 0)
    return {
        (1, 0): (f(h, 0) - f(-h, 0)) / (2 * h),
        (0, 1): (f(0, h) - f(0, -h)) / (2 * h),
        (2, 0): (f(h, 0) - 2 * f0 + f(-h, 0)) / h**2,
        (0, 2): (f(0, h) - 2 * f0 + f(0, -h)) / h**2,
        (1, 1): (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h),
    }


def fd_mismatch(jet, fd: dict) -> float:
    """Worst of |a - b| / max(|a|, |b|, 1) over the partials in ``fd``."""
    worst = 0.0
    for (i, j), b in fd.items():
        a = np.asarray(jet.partial(i, j))
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1.0))))
    return worst


ORACLE_QUANTITIES = {
    "g": lambda st: st.g,
    "sigma": lambda st: st.sigma,
    "|phi|^2": lambda st: st.phi2,
}


def fd_laplacian(scalar, im: Immersion, point, h: float = 1e-3) -> float:
    """Divergence-form Laplacian (1/sqrt g) d_i(sqrt g g^ij d_j f) from plain values.

    One Richardson step on steps h and h/2 cancels the O(h^2) error.
    """
    return (4 * _fd_laplacian(scalar, im, point, h / 2) - _fd_laplacian(scalar, im, point, h)) / 3


def _fd_laplacian(scalar, im: Immersion, point, h: float) -> float:
    u, v = point
    vals, mets = {}, {}
    for i in range(-2, 3):
        for j in range(-2, 3):
            if abs(i) + abs(j) > 2 or (abs(i) == 2 and j) or (abs(j) == 2 and i):
                continue
            s = evaluate_state(im, (u + i * h, v + j * h), 2)
            vals[i, j] = float(scalar(s))
            mets[i, j] = s.g.value

    def flux(i, j):
        grad = np.array([(vals[i + 1, j] - vals[i - 1, j]) / (2 * h), (vals[i, j + 1] - vals[i, j - 1]) / (2 * h)])
        g = mets[i, j]
        return math.sqrt(np.linalg.det(g)) * np.linalg.solve(g, grad)

    div = (flux(1, 0)[0] - flux(-1, 0)[0]) / (2 * h) + (flux(0, 1)[1] - flux(0, -1)[1]) / (2 * h)
    return div / math.sqrt(np.linalg.det(mets[0, 0]))
