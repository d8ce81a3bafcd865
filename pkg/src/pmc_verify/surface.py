"""Pointwise extrinsic and intrinsic geometry of a parametrised surface in M^n(c) x R.

Everything is computed from one jet expansion of the immersion at the chart
point: first and second derivatives give the metric and the second fundamental
form, and because every intermediate quantity stays a jet, derived scalars such
as |phi|^2 can be differentiated again for Laplacians and covariant
derivatives without any numerical differencing.

Conventions:

* Weingarten: ``Dbar_X V = -A_V X + nabla^perp_X V``, so ``<A_V X, Y> = <sigma(X,Y), V>``.
* ``H = 1/2 trace sigma``.
* The Laplacian is the analyst's one (non-positive spectrum).
* Frames: ``E1 = x_u/|x_u|``, ``E2`` by Gram-Schmidt; ``E3 = H/|H|`` when
  ``|H| >= MINIMAL_THRESHOLD``, remaining normals by Gram-Schmidt on the ambient
  axes projected to the normal space (largest projection first, the line axis
  winning ties), and the last normal flipped if needed so that
  ``det(p_M, E1, ..., E_{n+1}) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import jets
from .ambient import ProductSpace, ambient_curvature, ambient_inner
from .errors import (
    DegenerateMetric,
    InsufficientJetDegree,
    MinimalPoint,
    OffManifold,
)
from .jets import Jet

MINIMAL_THRESHOLD = 1e-10
RANK_THRESHOLD = 1e-10
MANIFOLD_TOL = 1e-9

Point = tuple[float, float]


@dataclass(frozen=True)
class Immersion:
    """A chart ``(u, v) -> R^{n+2}`` of a surface in ``space``.

    ``chart`` receives the two chart variables as jets and must return a jet
    with value shape ``(space.ambient_dim,)``; written with the elementary
    functions of :mod:`pmc_verify.jets` it works unchanged for plain evaluation
    (degree 0) and for Taylor expansion.
    """

    space: ProductSpace
    chart: Callable[[Jet, Jet], Jet]
    domain: tuple[tuple[float, float], tuple[float, float]]
    name: str = "immersion"
    params: Mapping[str, float] = field(default_factory=dict)
    topology: str = "plane"
    complete: bool = True

    def expand(self, point: Point, degree: int = jets.DEFAULT_DEGREE) -> Jet:
        u = Jet.variable(0, point[0], degree)
        v = Jet.variable(1, point[1], degree)
        x = self.chart(u, v)
        if x.shape != (self.space.ambient_dim,):
            raise OffManifold(
                f"chart returned value shape {x.shape}, expected ({self.space.ambient_dim},)"
            )
        return x

    def position(self, point: Point) -> np.ndarray:
        return self.expand(point, 0).value

    def grid(self, n: int) -> list[Point]:
        return sample_grid(self.domain, n)

    def contains(self, point: Point) -> bool:
        (u0, u1), (v0, v1) = self.domain
        return u0 <= point[0] <= u1 and v0 <= point[1] <= v1


def sample_grid(domain, n: int) -> list[Point]:
    """Cell centres of an n x n grid over the chart rectangle, row-major in u."""
    (u0, u1), (v0, v1) = domain
    us = u0 + (np.arange(n) + 0.5) * (u1 - u0) / n
    vs = v0 + (np.arange(n) + 0.5) * (v1 - v0) / n
    return [(float(u), float(v)) for u in us for v in vs]


@dataclass(eq=False)
class GeometricState:
    """All pointwise data of the surface at one chart point.

    Jets keep their natural degree: with an immersion expanded to degree d,
    tangent data have degree d-1 and curvature data (sigma, H, A, normal
    frame) degree d-2.  Frame-indexed arrays use the orthonormal tangent frame
    (index a) and normal frame (index alpha, 0-based, so alpha=0 is E3).
    """

    space: ProductSpace
    point: Point
    degree: int
    x: Jet  # (m,)
    dx: Jet  # (2, m): x_u, x_v
    ddx: Jet  # (2, 2, m)
    g: Jet  # (2, 2)
    g_inv: Jet
    christoffel: Jet  # (2, 2, 2): [k, i, j] = Gamma^k_ij
    tangent_frame: Jet  # (2, m)
    frame_coeffs: Jet  # (2, 2): E_a = frame_coeffs[a, k] x_k
    normal_frame: Jet  # (q, m)
    sigma: Jet  # (q, 2, 2) coordinate components sigma^alpha_ij
    H: Jet  # (m,)
    A: Jet  # (q, 2, 2) shape operators in the tangent frame
    T_frame: Jet  # (2,)
    T: Jet  # (m,)
    N: Jet  # (m,)
    nu: Jet  # (q,)
    minimal: bool
    riemann: np.ndarray | None  # (2,2,2,2) <R(E_a,E_b)E_c,E_d>

    # -- scalar values --------------------------------------------------

    @property
    def c(self) -> float:
        return self.space.c

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def H_norm(self) -> float:
        return float(np.sqrt(max(self.H2.value, 0.0)))

    @property
    def T2(self) -> Jet:
        return (self.T_frame * self.T_frame).sum()

    @property
    def H2(self) -> Jet:
        return ambient_inner(self.H, self.H, self.space)

    @property
    def sigma2(self) -> Jet:
        return (self.A * self.A).sum()

    @property
    def phi2(self) -> Jet:
        return self.sigma2 - 2.0 * self.H2

    @property
    def H_components(self) -> Jet:
        """<H, E_alpha> for every normal frame vector."""
        return ambient_inner(self.H, self.normal_frame, self.space)

    @property
    def A_H(self) -> Jet:
        return jets.einsum("q,qab->ab", self.H_components, self.A)

    @property
    def A_N(self) -> Jet:
        return jets.einsum("q,qab->ab", self.nu, self.A)

    def require_nonminimal(self) -> None:
        if self.minimal:
            raise MinimalPoint(f"|H| = {self.H_norm:.3g} is below {MINIMAL_THRESHOLD:g}")

    @property
    def H_len(self) -> Jet:
        self.require_nonminimal()
        return jets.sqrt(self.H2)

    @property
    def phi_H(self) -> Jet:
        """(1/|H|) A_H - |H| id, in the tangent frame."""
        h = self.H_len
        return self.A_H / h - _scaled_identity(h)

    @property
    def phi(self) -> Jet:
        """Traceless parts phi_alpha = A_alpha - (tr A_alpha / 2) id, shape (q, 2, 2)."""
        tr = self.A[:, 0, 0] + self.A[:, 1, 1]
        half = (0.5 * tr).reshape(tr.shape + (1, 1))
        return self.A - half * np.eye(2)

    def phi_alpha(self, alpha: int) -> Jet:
        """phi_3 (= phi_H) or phi_4 (= A_4) for alpha in {3, 4}; needs |H| > 0."""
        self.require_nonminimal()
        if alpha == 3:
            return self.A[0] - _scaled_identity(self.H_len)
        return self.A[alpha - 3]

    def scalar_field(self, name: str) -> Jet:
        if name == "|phi|^2":
            return self.phi2
        if name == "|sigma|^2":
            return self.sigma2
        if name == "|H|^2":
            return self.H2
        if name == "|T|^2":
            return self.T2
        if name == "|phi|^2-c|T|^2":
            return self.phi2 - self.c * self.T2
        if name == "|phi_H|^2":
            self.require_nonminimal()
            return (self.A_H * self.A_H).sum() / self.H2 - 2.0 * self.H2
        if name == "|phi_4|^2":
            if self.n != 3:
                raise ValueError("|phi_4|^2 is defined for n = 3 only")
            p4 = self.phi_alpha(4)
            return (p4 * p4).sum()
        raise KeyError(f"unknown scalar field {name!r}; expected one of {SCALAR_FIELDS}")

    # -- coordinate-form tensors ----------------------------------------

    def coordinate_form(self, which) -> Jet:
        """A symmetric 2-tensor in chart coordinates, as a (2, 2) jet.

        ``which`` is "phi3", "phi4", a normal-field name accepted by
        :func:`normal_field`, or a normal vector jet V (giving <sigma_ij, V>).
        """
        if isinstance(which, str) and which in ("phi3", "phi_H"):
            h = self.H_len
            Ah = ambient_inner(self.ddx, self.H, self.space)
            return Ah / h - h.reshape((1, 1)) * self.g
        if isinstance(which, str) and which == "phi4":
            self.require_nonminimal()
            return ambient_inner(self.ddx, self.normal_frame[1], self.space)
        V = normal_field(self, which) if isinstance(which, str) else which
        return ambient_inner(self.ddx, V, self.space)

    def frame_matrix(self, B: Jet) -> Jet:
        """Components B(E_a, E_b) of a coordinate 2-tensor in the tangent frame."""
        e = self.frame_coeffs
        return jets.einsum("al,bl->ab", jets.einsum("ak,kl->al", e, B), e)


SCALAR_FIELDS = ("|phi|^2", "|phi_H|^2", "|phi_4|^2", "|T|^2", "|phi|^2-c|T|^2", "|sigma|^2", "|H|^2")


def _scaled_identity(s: Jet) -> Jet:
    return s.reshape((1, 1)) * np.eye(2)


def _vec_times(coef: Jet, vec: Jet) -> Jet:
    return coef.reshape(coef.shape + (1,)) * vec


def evaluate_state(im: Immersion, point: Point, degree: int = jets.DEFAULT_DEGREE) -> GeometricState:
    """Expand ``im`` at ``point`` and compute the full GeometricState."""
    if degree < 2:
        raise InsufficientJetDegree(f"second fundamental form needs jet degree >= 2, got {degree}")
    space = im.space
    metric = space.metric
    c = space.c
    q = space.n - 1

    x = im.expand(point, degree)
    res = space.manifold_residual(x.value)
    if res > MANIFOLD_TOL:
        raise OffManifold(f"chart point {point} is off the product manifold (residual {res:.3g})")

    dx = jets.stack([x.diff(0), x.diff(1)])
    ddx = jets.stack([jets.stack([dx[0].diff(0), dx[0].diff(1)]), jets.stack([dx[1].diff(0), dx[1].diff(1)])])
    g = jets.einsum("im,jm->ij", dx * metric, dx)

    g0 = g.value
    if g0[0, 0] <= 0 or g0[1, 1] <= 0 or np.linalg.det(g0) <= RANK_THRESHOLD * g0[0, 0] * g0[1, 1]:
        raise DegenerateMetric(f"Gram matrix {g0.tolist()} is degenerate at {point}")

    det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    inv_det = det.reciprocal()
    g_inv = jets.stack([jets.stack([g[1, 1], -g[0, 1]]), jets.stack([-g[1, 0], g[0, 0]])]) * inv_det.reshape((1, 1))

    dg = jets.stack([g.diff(0), g.diff(1)])  # [k, i, j] = d_k g_ij
    first_kind = 0.5 * (dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg)
    christoffel = jets.einsum("lk,kij->lij", g_inv, first_kind)

    # orthonormal tangent frame
    E1 = _vec_times(jets.sqrt(g[0, 0]).reciprocal(), dx[0])
    w = dx[1] - _vec_times(ambient_inner(dx[1], E1, space), E1)
    E2 = _vec_times(jets.sqrt(ambient_inner(w, w, space)).reciprocal(), w)
    tangent_frame = jets.stack([E1, E2])
    frame_coeffs = jets.einsum("al,lk->ak", jets.einsum("am,lm->al", tangent_frame * metric, dx), g_inv)

    pm = space.quadric_part(x)

    def normal_part(vecs: Jet) -> Jet:
        # projection onto the normal bundle of the surface inside T(M x R)
        out = vecs
        if c != 0:
            out = out - _vec_times(c * ambient_inner(vecs, pm, space), pm)
        for a in range(2):
            Ea = tangent_frame[a]
            out = out - _vec_times(ambient_inner(vecs, Ea, space), Ea)
        return out

    sigma_vec = normal_part(ddx)  # (2, 2, m)
    H = 0.5 * jets.einsum("ij,ijm->m", g_inv, sigma_vec)
    H2 = ambient_inner(H, H, space)
    minimal = bool(np.sqrt(max(H2.value, 0.0)) < MINIMAL_THRESHOLD)

    normal_frame = _normal_frame(x, pm, tangent_frame, H, H2, minimal, space, q)
    sigma = jets.einsum("ijm,qm->qij", ddx * metric, normal_frame)
    A = jets.einsum("qal,bl->qab", jets.einsum("ak,qkl->qal", frame_coeffs, sigma), frame_coeffs)

    T_frame = tangent_frame[:, -1]  # <xi, E_a>; the line block of the metric is +1
    T = jets.einsum("a,am->m", T_frame, tangent_frame)
    nu = normal_frame[:, -1]
    N = jets.einsum("q,qm->m", nu, normal_frame)

    riemann = _frame_riemann(christoffel, g, frame_coeffs) if degree >= 3 else None

    return GeometricState(
        space=space,
        point=(float(point[0]), float(point[1])),
        degree=degree,
        x=x,
        dx=dx,
        ddx=ddx,
        g=g,
        g_inv=g_inv,
        christoffel=christoffel,
        tangent_frame=tangent_frame,
        frame_coeffs=frame_coeffs,
        normal_frame=normal_frame,
        sigma=sigma,
        H=H,
        A=A,
        T_frame=T_frame,
        T=T,
        N=N,
        nu=nu,
        minimal=minimal,
        riemann=riemann,
    )


def _normal_frame(x, pm, tangent_frame, H, H2, minimal, space: ProductSpace, q: int) -> Jet:
    metric = space.metric
    m = space.ambient_dim
    c = space.c
    frame: list[Jet] = []
    if not minimal:
        frame.append(_vec_times(jets.sqrt(H2).reciprocal(), H))

    # line axis first so it wins ties (slices, minimal surfaces inside slices)
    order = [m - 1] + list(range(m - 1))
    while len(frame) < q:
        E0 = tangent_frame.value
        F0 = [f.value for f in frame]
        p0 = pm.value
        best_k, best_norm = None, -1.0
        norms = []
        for k in order:
            w = _axis_residual_values(k, p0, E0, F0, metric, c)
            norms.append((k, float(np.sum(w * w * metric))))
        top = max(nrm for _, nrm in norms)
        for k, nrm in norms:
            if nrm >= top - 1e-12:
                best_k, best_norm = k, nrm
                break
        if best_norm <= 1e-20:
            raise DegenerateMetric("could not complete the normal frame")
        w = _axis_residual_jet(best_k, pm, tangent_frame, frame, metric, c, m)
        frame.append(_vec_times(jets.sqrt(ambient_inner(w, w, space)).reciprocal(), w))

    nf = jets.stack(frame)
    # orientation: det(p_M, E1, E2, normals) > 0, flipping the last
    # Gram-Schmidt normal (never E3 = H/|H|)
    rows = ([pm.value] if c != 0 else []) + list(tangent_frame.value) + list(nf.value)
    flippable = len(frame) - 1 >= (0 if minimal else 1)
    if flippable and np.linalg.det(np.array(rows)) < 0:
        coeffs = nf.coeffs.copy()
        coeffs[:, -1] *= -1.0
        nf = Jet(coeffs, nf.degree)
    return nf


def _axis_residual_values(k, p0, E0, F0, metric, c):
    w = np.zeros(len(metric))
    w[k] = 1.0
    if c != 0:
        w = w - c * metric[k] * p0[k] * p0
    for Ea in E0:
        w = w - metric[k] * Ea[k] * Ea
    for F in F0:
        w = w - metric[k] * F[k] * F
    return w


def _axis_residual_jet(k, pm, tangent_frame, frame, metric, c, m) -> Jet:
    e = np.zeros(m)
    e[k] = 1.0
    w = Jet.constant(e, tangent_frame.degree)
    if c != 0:
        w = w - _vec_times((c * metric[k]) * pm[k], pm)
    for a in range(2):
        Ea = tangent_frame[a]
        w = w - _vec_times(metric[k] * Ea[k], Ea)
    for F in frame:
        w = w - _vec_times(metric[k] * F[k], F)
    return w


def _frame_riemann(christoffel: Jet, g: Jet, e: Jet) -> np.ndarray:
    G = christoffel.value  # [l, i, j]
    dG = np.stack([christoffel.diff(0).value, christoffel.diff(1).value])  # [m, l, i, j]
    # R^m_{ijk}: coefficient of d_m in R(d_i, d_j) d_k
    R = (
        np.einsum("imjk->mijk", dG)
        - np.einsum("jmik->mijk", dG)
        + np.einsum("ljk,mil->mijk", G, G)
        - np.einsum("lik,mjl->mijk", G, G)
    )
    R_low = np.einsum("wm,mijk->ijkw", g.value, R)
    ev = e.value
    return np.einsum("ai,bj,ck,dw,ijkw->abcd", ev, ev, ev, ev, R_low)


# -- derived operations -----------------------------------------------------


def normal_field(state: GeometricState, name: str) -> Jet:
    """Resolve "H", "E3", "E4", ... to a normal vector jet."""
    if name == "H":
        return state.H
    if name.startswith("E") and name[1:].isdigit():
        alpha = int(name[1:])
        q = state.normal_frame.shape[0]
        if not 3 <= alpha < 3 + q:
            raise KeyError(f"normal frame has E3..E{2 + q}; {name} does not exist")
        return state.normal_frame[alpha - 3]
    raise KeyError(f"unknown normal field {name!r}")


def split_xi(state: GeometricState) -> tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """(T, |T|^2, N, nu): tangent and normal parts of xi at the point."""
    T = state.T.value
    return T, float(state.T2.value), state.N.value, state.nu.value


def gaussian_curvature_two_ways(state: GeometricState) -> tuple[float, float]:
    """K from the Riemann tensor of g, and K from the Gauss equation."""
    if state.riemann is None:
        raise InsufficientJetDegree("intrinsic curvature needs jet degree >= 3")
    k_int = float(state.riemann[0, 1, 1, 0])
    T2 = float(state.T2.value)
    k_ext = state.c * (1.0 - T2) + 2.0 * float(state.H2.value) - 0.5 * float(state.sigma2.value)
    return k_int, k_ext


def laplacian(state: GeometricState, f: Jet) -> float:
    """Laplace-Beltrami g^ij (d_i d_j f - Gamma^k_ij d_k f) at the point."""
    if f.degree < 2:
        raise InsufficientJetDegree(f"Laplacian needs a jet of degree >= 2, got {f.degree}")
    hess = np.array([[f.partial(2, 0), f.partial(1, 1)], [f.partial(1, 1), f.partial(0, 2)]])
    grad = np.array([f.partial(1, 0), f.partial(0, 1)])
    G = state.christoffel.value
    return float(np.einsum("ij,ij->", state.g_inv.value, hess - np.einsum("kij,k->ij", G, grad)))


def intrinsic_laplacian(im: Immersion, point: Point, field, degree: int = jets.DEFAULT_DEGREE,
                        state: GeometricState | None = None) -> float:
    """Laplacian of a named scalar field (see SCALAR_FIELDS) or of ``field(state) -> Jet``."""
    state = state or evaluate_state(im, point, degree)
    f = field(state) if callable(field) else state.scalar_field(field)
    return laplacian(state, f)


def covariant_derivative(state: GeometricState, B: Jet) -> np.ndarray:
    """(nabla_{E_a} B)(E_b, E_c) for a symmetric coordinate 2-tensor jet B."""
    if B.degree < 1:
        raise InsufficientJetDegree("covariant derivative needs a jet of degree >= 1")
    dB = np.stack([B.diff(0).value, B.diff(1).value])  # [k, i, j]
    B0 = B.value
    G = state.christoffel.value
    nab = dB - np.einsum("lki,lj->kij", G, B0) - np.einsum("lkj,il->kij", G, B0)
    e = state.frame_coeffs.value
    return np.einsum("ak,bi,cj,kij->abc", e, e, e, nab)


def covariant_gradient_norm(im: Immersion, point: Point, which, degree: int = jets.DEFAULT_DEGREE,
                            state: GeometricState | None = None) -> float:
    """|nabla B|^2 for B in {"phi3", "phi4"} or B = A_V with V a named/explicit normal field.

    Only meaningful as the quantity in the Simons identities when the normal
    field involved is parallel (pmc surfaces)."""
    state = state or evaluate_state(im, point, degree)
    if state.degree < 3:
        raise InsufficientJetDegree("covariant derivatives of A need jet degree >= 3")
    D = covariant_derivative(state, state.coordinate_form(which))
    return float(np.sum(D * D))


def normal_derivative(state: GeometricState, V: Jet) -> np.ndarray:
    """[a, beta] = <nabla^perp_{E_a} V, E_beta> for a normal vector jet V."""
    if V.degree < 1:
        raise InsufficientJetDegree("normal derivative needs a jet of degree >= 1")
    metric = state.space.metric
    dV = np.stack([V.diff(0).value, V.diff(1).value])
    coord = (dV * metric) @ state.normal_frame.value.T  # [k, beta]
    return state.frame_coeffs.value @ coord


def normal_connection_residual(im: Immersion, point: Point, degree: int = jets.DEFAULT_DEGREE,
                               state: GeometricState | None = None, field_name: str = "H") -> float:
    """max_a |nabla^perp_{E_a} V| / (1 + |V|); zero exactly when V is parallel (V = H: pmc)."""
    state = state or evaluate_state(im, point, degree)
    V = normal_field(state, field_name)
    D = normal_derivative(state, V)
    size = float(np.sqrt(max(ambient_inner(V.value, V.value, state.space), 0.0)))
    return float(np.max(np.linalg.norm(D, axis=1))) / (1.0 + size)


def q_form(state: GeometricState, i: int, j: int) -> float:
    """Q(E_i, E_j) = 2<sigma(E_i,E_j), H> - c <E_i, xi><E_j, xi> (0-based frame indices)."""
    AH = state.A_H.value
    T = state.T_frame.value
    return float(2.0 * AH[i, j] - state.c * T[i] * T[j])


def ambient_frame_curvature(state: GeometricState, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
    return ambient_curvature(X, Y, Z, state.x.value, state.space)


__all__ = [
    "Immersion",
    "GeometricState",
    "evaluate_state",
    "split_xi",
    "gaussian_curvature_two_ways",
    "intrinsic_laplacian",
    "laplacian",
    "normal_connection_residual",
    "covariant_gradient_norm",
    "covariant_derivative",
    "normal_derivative",
    "normal_field",
    "q_form",
    "sample_grid",
]
