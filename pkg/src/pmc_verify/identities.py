"""Pointwise evaluation of the structure equations and Simons-type formulas.

Each identity is reported as left side, right side, a named breakdown of the
right side, and ``|lhs - rhs| / (1 + sum |terms|)``.  Every kind declares its
hypotheses; outside them :class:`NotApplicable` is raised instead of producing
a meaningless residual.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import jets
from .ambient import ambient_inner
from .errors import NotApplicable, PmcVerifyError
from .jets import Jet
from .surface import (
    GeometricState,
    Immersion,
    Point,
    covariant_derivative,
    laplacian,
    normal_derivative,
    normal_field,
    sample_grid,
)

DEFAULT_TOL = 1e-7
CROSSCHECK_TOL = 1e-10


class IdentityKind(str, Enum):
    GaussEq = "GaussEq"
    Codazzi = "Codazzi"
    RicciCommute = "RicciCommute"
    NormalCurvature = "NormalCurvature"
    SimonsAV = "SimonsAV"
    SimonsPhiH = "SimonsPhiH"
    SimonsPhi4 = "SimonsPhi4"
    SimonsPhi = "SimonsPhi"
    LaplacianT = "LaplacianT"
    DeltaSum = "DeltaSum"
    PhiTNorm = "PhiTNorm"
    SchwarzBound = "SchwarzBound"


@dataclass(frozen=True)
class Applicability:
    pmc: bool = False
    nonminimal: bool = False
    n3: bool = False
    parallel_field: bool = False
    constant_trace: bool = False


APPLICABILITY = {
    IdentityKind.GaussEq: Applicability(),
    IdentityKind.Codazzi: Applicability(parallel_field=True),
    IdentityKind.RicciCommute: Applicability(parallel_field=True),
    IdentityKind.NormalCurvature: Applicability(),
    IdentityKind.SimonsAV: Applicability(parallel_field=True, constant_trace=True),
    IdentityKind.SimonsPhiH: Applicability(pmc=True, nonminimal=True),
    IdentityKind.SimonsPhi4: Applicability(pmc=True, nonminimal=True, n3=True),
    IdentityKind.SimonsPhi: Applicability(pmc=True, nonminimal=True, n3=True),
    IdentityKind.LaplacianT: Applicability(pmc=True),
    IdentityKind.DeltaSum: Applicability(pmc=True, nonminimal=True, n3=True),
    IdentityKind.PhiTNorm: Applicability(nonminimal=True),
    IdentityKind.SchwarzBound: Applicability(),
}

DEFAULT_AUX = {
    IdentityKind.Codazzi: "H",
    IdentityKind.RicciCommute: "H",
    IdentityKind.SimonsAV: "E4",
}

# CLI selector -> (kind, normal field), in suite order
SELECTORS: dict[str, tuple[IdentityKind, str | None]] = {
    "gauss": (IdentityKind.GaussEq, None),
    "codazzi-h": (IdentityKind.Codazzi, "H"),
    "codazzi-e4": (IdentityKind.Codazzi, "E4"),
    "ricci-commute": (IdentityKind.RicciCommute, "H"),
    "normal-curvature": (IdentityKind.NormalCurvature, None),
    "simons-av-e4": (IdentityKind.SimonsAV, "E4"),
    "simons-av-h": (IdentityKind.SimonsAV, "H"),
    "simons-phi-h": (IdentityKind.SimonsPhiH, None),
    "simons-phi4": (IdentityKind.SimonsPhi4, None),
    "simons-phi": (IdentityKind.SimonsPhi, None),
    "laplacian-t": (IdentityKind.LaplacianT, None),
    "delta-sum": (IdentityKind.DeltaSum, None),
    "phi-t-norm": (IdentityKind.PhiTNorm, None),
    "schwarz-bound": (IdentityKind.SchwarzBound, None),
}


@dataclass
class IdentityReport:
    kind: IdentityKind
    point: Point
    lhs: float | None
    rhs: float | None
    terms: dict[str, float]
    residual: float | None
    applicable: bool = True
    reason: str | None = None
    aux: str | None = None
    label: str | None = None
    extras: dict[str, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return f"error: {self.error}"
        if not self.applicable:
            return f"not_applicable: {self.reason}"
        return "evaluated"

    def passed(self, tol: float) -> bool:
        if self.error is not None:
            return False
        if not self.applicable:
            return True
        ok = self.residual is not None and self.residual <= tol
        if "crosscheck" in self.extras:
            ok = ok and self.extras["crosscheck"] <= CROSSCHECK_TOL
        return ok


def _report(kind, state, lhs, terms, aux=None, extras=None, rhs=None) -> IdentityReport:
    rhs = float(sum(terms.values())) if rhs is None else float(rhs)
    scale = 1.0 + sum(abs(t) for t in terms.values())
    return IdentityReport(
        kind=kind,
        point=state.point,
        lhs=float(lhs),
        rhs=rhs,
        terms={k: float(v) for k, v in terms.items()},
        residual=abs(float(lhs) - rhs) / scale,
        aux=aux,
        extras=dict(extras or {}),
    )


# -- applicability -------------------------------------------------------------


def pmc_residual(state: GeometricState) -> float:
    return _parallel_residual(state, state.H)


def _parallel_residual(state: GeometricState, V: Jet) -> float:
    D = normal_derivative(state, V)
    size = float(np.sqrt(max(ambient_inner(V.value, V.value, state.space), 0.0)))
    return float(np.max(np.linalg.norm(D, axis=1))) / (1.0 + size)


def _resolve_field(state: GeometricState, aux: str) -> Jet:
    try:
        return normal_field(state, aux)
    except KeyError:
        raise NotApplicable(f"normal field {aux} does not exist for n = {state.n}") from None


def check_applicable(kind: IdentityKind, state: GeometricState, aux: str | None, tol: float) -> None:
    """Raise NotApplicable with the first failing hypothesis (pmc, minimal, n, field)."""
    req = APPLICABILITY[kind]
    if req.pmc and pmc_residual(state) > tol:
        raise NotApplicable("pmc residual exceeded")
    if req.nonminimal and state.minimal:
        raise NotApplicable("minimal")
    if req.n3 and state.n != 3:
        raise NotApplicable("requires n = 3")
    if req.parallel_field:
        V = _resolve_field(state, aux)
        if _parallel_residual(state, V) > tol:
            raise NotApplicable("pmc residual exceeded" if aux == "H" else "normal field not parallel")
        if req.constant_trace:
            tr = _trace_jet(state, V)
            e = state.frame_coeffs.value
            grad = e @ np.array([tr.partial(1, 0), tr.partial(0, 1)])
            if float(np.linalg.norm(grad)) > tol * (1.0 + abs(float(tr.value))):
                raise NotApplicable("trace of A_V not constant")


# -- frame helpers ---------------------------------------------------------------


def _shape_operator(state: GeometricState, V: Jet) -> Jet:
    """A_V in the tangent frame, as a (2, 2) jet."""
    comps = ambient_inner(V, state.normal_frame, state.space)
    return jets.einsum("q,qab->ab", comps, state.A)


def _trace_jet(state: GeometricState, V: Jet) -> Jet:
    AV = _shape_operator(state, V)
    return AV[0, 0] + AV[1, 1]


@dataclass(frozen=True)
class _Values:
    """Frame values shared by the Simons-type formulas."""

    c: float
    A: np.ndarray
    T: np.ndarray
    T2: float
    nu: np.ndarray
    H: float
    H2: float
    sigma2: float
    phi2: float
    A_N: np.ndarray
    A_H: np.ndarray
    HN: float

    @classmethod
    def of(cls, state: GeometricState) -> "_Values":
        A = state.A.value
        nu = state.nu.value
        hc = state.H_components.value
        H2 = float(state.H2.value)
        return cls(
            c=state.c,
            A=A,
            T=state.T_frame.value,
            T2=float(state.T2.value),
            nu=nu,
            H=float(np.sqrt(max(H2, 0.0))),
            H2=H2,
            sigma2=float(state.sigma2.value),
            phi2=float(state.phi2.value),
            A_N=np.einsum("q,qab->ab", nu, A),
            A_H=np.einsum("q,qab->ab", hc, A),
            HN=float(hc @ nu),
        )

    @property
    def phiTT_H(self) -> float:
        """<phi(T,T), H> = <A_H T, T> - |T|^2 |H|^2."""
        return float(self.T @ self.A_H @ self.T - self.T2 * self.H2)


def _frame_vectors(state: GeometricState) -> tuple[np.ndarray, np.ndarray]:
    return state.tangent_frame.value, state.normal_frame.value


def _ambient_R(state: GeometricState, X, Y, Z, W) -> float:
    c = state.c
    xi = state.space.xi

    def ip(a, b):
        return float(ambient_inner(a, b, state.space))

    # explicit formula so normal arguments (Z or W) are allowed
    return c * (
        ip(Y, Z) * ip(X, W)
        - ip(X, Z) * ip(Y, W)
        - ip(Y, xi) * ip(Z, xi) * ip(X, W)
        + ip(X, xi) * ip(Z, xi) * ip(Y, W)
        + ip(X, Z) * ip(Y, xi) * ip(xi, W)
        - ip(Y, Z) * ip(X, xi) * ip(xi, W)
    )


# -- identities ---------------------------------------------------------------------


def _gauss(state: GeometricState, aux, tol) -> IdentityReport:
    if state.riemann is None:
        from .errors import InsufficientJetDegree

        raise InsufficientJetDegree("Gauss equation needs jet degree >= 3")
    E, _ = _frame_vectors(state)
    A = state.A.value
    best = None
    for a in range(2):
        for b in range(2):
            for cc in range(2):
                for d in range(2):
                    amb = _ambient_R(state, E[a], E[b], E[cc], E[d])
                    ext = float(np.sum(A[:, b, cc] * A[:, a, d] - A[:, a, cc] * A[:, b, d]))
                    lhs = float(state.riemann[a, b, cc, d])
                    rep = _report(IdentityKind.GaussEq, state, lhs, {"<Rbar(Ea,Eb)Ec,Ed>": amb, "sum_alpha sigma terms": ext})
                    if best is None or rep.residual > best.residual:
                        best = rep
                        best.extras = {"component": float(((a * 2 + b) * 2 + cc) * 2 + d)}
    return best


def _codazzi_pieces(state: GeometricState, V: Jet) -> dict[str, np.ndarray]:
    """Arrays [a, b, c] for the general Codazzi equation tested against A_V.

    ``(nabla_a A_V)_bc - (nabla_b A_V)_ac = ambient + correction`` where the
    correction ``A_{nabla_a V}(b, c) - A_{nabla_b V}(a, c)`` vanishes for parallel V.
    """
    D = covariant_derivative(state, state.coordinate_form(V))
    lhs = D - D.transpose(1, 0, 2)
    v = _Values.of(state)
    VN = float(ambient_inner(V.value, state.N.value, state.space))
    I = np.eye(2)
    T = v.T
    amb = v.c * VN * (np.einsum("b,ac->abc", T, I) - np.einsum("a,bc->abc", T, I))
    Dperp = normal_derivative(state, V)  # [a, beta]
    AdV = np.einsum("aq,qbc->abc", Dperp, v.A)  # A_{nabla_a V}
    corr = AdV - AdV.transpose(1, 0, 2)
    return {"lhs": lhs, "ambient": amb, "correction": corr}


def _codazzi(state: GeometricState, aux, tol) -> IdentityReport:
    V = _resolve_field(state, aux)
    pieces = _codazzi_pieces(state, V)
    best = None
    for cc in range(2):
        lhs = float(pieces["lhs"][0, 1, cc])
        rep = _report(IdentityKind.Codazzi, state, lhs, {"c<V,N>(T_b delta_ac - T_a delta_bc)": pieces["ambient"][0, 1, cc]}, aux)
        if best is None or rep.residual > best.residual:
            best = rep
    return best


def _ricci_commute(state: GeometricState, aux, tol) -> IdentityReport:
    V = _resolve_field(state, aux)
    AV = _shape_operator(state, V).value
    A = state.A.value
    worst = max(float(np.linalg.norm(AV @ Au - Au @ AV)) for Au in A)
    return _report(IdentityKind.RicciCommute, state, worst, {}, aux)


def normal_curvature(state: GeometricState) -> np.ndarray:
    """[alpha, beta] = <R^perp(E1, E2) E_alpha, E_beta> from the normal connection."""
    if state.degree < 4:
        from .errors import InsufficientJetDegree

        raise InsufficientJetDegree("normal curvature needs jet degree >= 4")
    metric = state.space.metric
    F = state.normal_frame
    q = F.shape[0]
    out = np.zeros((q, q))
    det_e = float(np.linalg.det(state.frame_coeffs.value))
    for al in range(q):
        W = []
        for k in range(2):
            dF = F[al].diff(k)
            comps = jets.einsum("m,qm->q", dF * metric, F.truncate(dF.degree))
            W.append(jets.einsum("q,qm->m", comps, F))
        curl = W[1].diff(0) - W[0].diff(1)
        out[al] = det_e * (F.value @ (curl.value * metric))
    return out


def _normal_curvature(state: GeometricState, aux, tol) -> IdentityReport:
    Rp = normal_curvature(state)
    A = state.A.value
    E, F = _frame_vectors(state)
    q = A.shape[0]
    best = None
    for al in range(q):
        for be in range(al + 1, q):
            comm = float((A[al] @ A[be] - A[be] @ A[al])[1, 0])  # <M E1, E2> = M[1, 0]
            amb = _ambient_R(state, E[0], E[1], F[al], F[be])
            rep = _report(IdentityKind.NormalCurvature, state, Rp[al, be], {"<[A_a,A_b]E1,E2>": comm, "<Rbar(E1,E2)E_a,E_b>": amb})
            if best is None or rep.residual > best.residual:
                best = rep
    if best is None:
        best = _report(IdentityKind.NormalCurvature, state, 0.0, {})
    return best


def _simons_av(state: GeometricState, aux, tol) -> IdentityReport:
    V = _resolve_field(state, aux)
    AVj = _shape_operator(state, V)
    lhs = 0.5 * laplacian(state, (AVj * AVj).sum())
    v = _Values.of(state)
    AV = AVj.value
    trV = float(np.trace(AV))
    VN = float(ambient_inner(V.value, state.N.value, state.space))
    D = covariant_derivative(state, state.coordinate_form(V))
    c, T = v.c, v.T
    AVT = AV @ T
    terms = {
        "|grad A_V|^2": float(np.sum(D * D)),
        "c(2-|T|^2)|A_V|^2": c * (2.0 - v.T2) * float(np.sum(AV * AV)),
        "-4c|A_V T|^2": -4.0 * c * float(AVT @ AVT),
        "3c tr(A_V)<A_V T,T>": 3.0 * c * trV * float(AVT @ T),
        "2c tr(A_N A_V)<V,N>": 2.0 * c * float(np.trace(v.A_N @ AV)) * VN,
        "-c (tr A_V)^2": -c * trV * trV,
        "-2c tr(A_V)<H,N><V,N>": -2.0 * c * trV * v.HN * VN,
        "sum_alpha tr(A_a) tr(A_V^2 A_a) - tr(A_V A_a)^2": float(
            sum(np.trace(Aa) * np.trace(AV @ AV @ Aa) - np.trace(AV @ Aa) ** 2 for Aa in v.A)
        ),
    }
    return _report(IdentityKind.SimonsAV, state, lhs, terms, aux)


def _simons_phi_h(state: GeometricState, aux, tol) -> IdentityReport:
    phiH = state.phi_H
    lhs = 0.5 * laplacian(state, (phiH * phiH).sum())
    v = _Values.of(state)
    P = phiH.value
    p2 = float(np.sum(P * P))
    D = covariant_derivative(state, state.coordinate_form("phi3"))
    c = v.c
    terms = {
        "|grad phi_H|^2": float(np.sum(D * D)),
        "{c(2-3|T|^2)+4|H|^2-|sigma|^2}|phi_H|^2": (c * (2 - 3 * v.T2) + 4 * v.H2 - v.sigma2) * p2,
        "-2c|H|<phi_H T,T>": -2.0 * c * v.H * float(v.T @ P @ v.T),
        "(2c/|H|)<H,N>tr(A_N phi_H)": 2.0 * c / v.H * v.HN * float(np.trace(v.A_N @ P)),
    }
    return _report(IdentityKind.SimonsPhiH, state, lhs, terms)


def _simons_phi4(state: GeometricState, aux, tol) -> IdentityReport:
    phi4 = state.phi_alpha(4)
    lhs = 0.5 * laplacian(state, (phi4 * phi4).sum())
    v = _Values.of(state)
    P = phi4.value
    D = covariant_derivative(state, state.coordinate_form("phi4"))
    c = v.c
    terms = {
        "|grad phi_4|^2": float(np.sum(D * D)),
        "{c(2-3|T|^2)+4|H|^2-|sigma|^2}|phi_4|^2": (c * (2 - 3 * v.T2) + 4 * v.H2 - v.sigma2) * float(np.sum(P * P)),
        "2c nu_4 tr(A_N phi_4)": 2.0 * c * float(v.nu[1]) * float(np.trace(v.A_N @ P)),
    }
    return _report(IdentityKind.SimonsPhi4, state, lhs, terms)


def _grad_phi_terms(state: GeometricState) -> tuple[float, float]:
    D3 = covariant_derivative(state, state.coordinate_form("phi3"))
    D4 = covariant_derivative(state, state.coordinate_form("phi4"))
    return float(np.sum(D3 * D3)), float(np.sum(D4 * D4))


def _simons_phi(state: GeometricState, aux, tol) -> IdentityReport:
    lhs = 0.5 * laplacian(state, state.phi2)
    v = _Values.of(state)
    c = v.c
    g3, g4 = _grad_phi_terms(state)
    phi3 = v.A[0] - v.H * np.eye(2)
    phi4 = v.A[1]
    mix = v.nu[0] * phi3 + v.nu[1] * phi4
    common = {
        "|grad phi_3|^2": g3,
        "|grad phi_4|^2": g4,
        "-|phi|^4": -v.phi2 * v.phi2,
        "{c(2-3|T|^2)+2|H|^2}|phi|^2": (c * (2 - 3 * v.T2) + 2 * v.H2) * v.phi2,
        "-2c<phi(T,T),H>": -2.0 * c * v.phiTT_H,
    }
    form1 = dict(common)
    form1["2c|nu_3 phi_3+nu_4 phi_4|^2"] = 2.0 * c * float(np.sum(mix * mix))
    form2_tail = 2.0 * c * float(np.sum(v.A_N * v.A_N)) - 4.0 * c * v.HN**2
    rep = _report(IdentityKind.SimonsPhi, state, lhs, form1)
    form2 = dict(common)
    form2["2c|A_N|^2-4c<H,N>^2"] = form2_tail
    rep2 = _report(IdentityKind.SimonsPhi, state, lhs, form2)
    cross = abs(form1["2c|nu_3 phi_3+nu_4 phi_4|^2"] - form2_tail) / (1.0 + abs(form2_tail))
    rep.residual = max(rep.residual, rep2.residual)
    rep.extras = {"rhs_form2": rep2.rhs, "residual_form2": rep2.residual, "crosscheck": cross}
    return rep


def _laplacian_T(state: GeometricState, aux, tol) -> IdentityReport:
    lhs = 0.5 * laplacian(state, state.T2)
    v = _Values.of(state)
    terms = {
        "|A_N|^2": float(np.sum(v.A_N * v.A_N)),
        "-1/2|T|^2|phi|^2": -0.5 * v.T2 * v.phi2,
        "-2<phi(T,T),H>": -2.0 * v.phiTT_H,
        "c|T|^2(1-|T|^2)": v.c * v.T2 * (1 - v.T2),
        "-|T|^2|H|^2": -v.T2 * v.H2,
    }
    return _report(IdentityKind.LaplacianT, state, lhs, terms)


def _delta_sum(state: GeometricState, aux, tol) -> IdentityReport:
    lhs = 0.5 * laplacian(state, state.phi2 - state.c * state.T2)
    v = _Values.of(state)
    c = v.c
    g3, g4 = _grad_phi_terms(state)
    terms = {
        "|grad phi_3|^2": g3,
        "|grad phi_4|^2": g4,
        "{-|phi|^2+(c/2)(4-5|T|^2)+2|H|^2}|phi|^2": (-v.phi2 + 0.5 * c * (4 - 5 * v.T2) + 2 * v.H2) * v.phi2,
        "c|A_N|^2": c * float(np.sum(v.A_N * v.A_N)),
        "-4c<H,N>^2": -4.0 * c * v.HN**2,
        "c|T|^2|H|^2": c * v.T2 * v.H2,
        "-c^2|T|^2(1-|T|^2)": -c * c * v.T2 * (1 - v.T2),
    }
    return _report(IdentityKind.DeltaSum, state, lhs, terms)


def _phi_t_norm(state: GeometricState, aux, tol) -> IdentityReport:
    P = state.phi_H.value
    T = state.T_frame.value
    PT = P @ T
    terms = {"1/2|T|^2|phi_H|^2": 0.5 * float(T @ T) * float(np.sum(P * P))}
    return _report(IdentityKind.PhiTNorm, state, float(PT @ PT), terms)


def _schwarz(state: GeometricState, aux, tol) -> IdentityReport:
    v = _Values.of(state)
    lhs = v.HN**2
    rhs = (1.0 - v.T2) * v.H2
    rep = _report(IdentityKind.SchwarzBound, state, lhs, {"(1-|T|^2)|H|^2": rhs})
    rep.residual = max(0.0, lhs - rhs) / (1.0 + abs(rhs))
    # companion bound used alongside it: |nu_3 phi_3 + nu_4 phi_4|^2 <= (1-|T|^2)|phi|^2
    phis = v.A - np.einsum("q,ab->qab", 0.5 * np.trace(v.A, axis1=1, axis2=2), np.eye(2))
    mix = np.einsum("q,qab->ab", v.nu, phis)
    rep.extras = {
        "slack": rhs - lhs,
        "phi_slack": (1.0 - v.T2) * v.phi2 - float(np.sum(mix * mix)),
    }
    return rep


_EVALUATORS = {
    IdentityKind.GaussEq: _gauss,
    IdentityKind.Codazzi: _codazzi,
    IdentityKind.RicciCommute: _ricci_commute,
    IdentityKind.NormalCurvature: _normal_curvature,
    IdentityKind.SimonsAV: _simons_av,
    IdentityKind.SimonsPhiH: _simons_phi_h,
    IdentityKind.SimonsPhi4: _simons_phi4,
    IdentityKind.SimonsPhi: _simons_phi,
    IdentityKind.LaplacianT: _laplacian_T,
    IdentityKind.DeltaSum: _delta_sum,
    IdentityKind.PhiTNorm: _phi_t_norm,
    IdentityKind.SchwarzBound: _schwarz,
}


def evaluate_identity(
    kind: IdentityKind | str,
    im: Immersion,
    point: Point,
    aux: str | None = None,
    tol: float = DEFAULT_TOL,
    degree: int = jets.DEFAULT_DEGREE,
    state: GeometricState | None = None,
) -> IdentityReport:
    """Evaluate one identity at one point; raises NotApplicable outside its hypotheses."""
    from .surface import evaluate_state

    kind = IdentityKind(kind)
    aux = aux if aux is not None else DEFAULT_AUX.get(kind)
    state = state or evaluate_state(im, point, degree)
    check_applicable(kind, state, aux, tol)
    rep = _EVALUATORS[kind](state, aux, tol)
    rep.aux = aux
    return rep


# -- suites --------------------------------------------------------------------


@dataclass
class SuiteResult:
    reports: list[IdentityReport]
    summary: list[dict]
    tol: float

    @property
    def passed(self) -> bool:
        return all(row["pass"] for row in self.summary)

    @property
    def errors(self) -> int:
        return sum(row["errors"] for row in self.summary)


def resolve_selectors(names) -> list[tuple[str, IdentityKind, str | None]]:
    """"all", a comma-separated string, or an iterable of selector names.

    The result is always in declared order without duplicates, so reports do
    not depend on how the selection was spelled.
    """
    if names is None or names == "all":
        names = list(SELECTORS)
    elif isinstance(names, str):
        names = [s.strip() for s in names.split(",") if s.strip()]
    unknown = [n for n in names if n not in SELECTORS]
    if unknown:
        raise ValueError(f"unknown identity {unknown[0]!r}; valid: {', '.join(SELECTORS)}")
    return [(name, *SELECTORS[name]) for name in SELECTORS if name in names]


def thread_count() -> int:
    raw = os.environ.get("PMC_VERIFY_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PMC_VERIFY_THREADS must be an integer >= 1, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"PMC_VERIFY_THREADS must be an integer >= 1, got {n}")
    return n


def _points(im: Immersion, grid) -> list[Point]:
    if isinstance(grid, int):
        return sample_grid(im.domain, grid)
    pts = [(float(u), float(v)) for u, v in grid]
    for p in pts:
        if not im.contains(p):
            raise ValueError(f"grid point {p} lies outside the chart domain {im.domain}")
    return pts


def _run_point(im, point, selected, tol, degree) -> list[IdentityReport]:
    from .surface import evaluate_state

    out = []
    try:
        state = evaluate_state(im, point, degree)
    except (PmcVerifyError, ArithmeticError) as exc:
        for label, kind, aux in selected:
            out.append(IdentityReport(kind, tuple(point), None, None, {}, None, False, None, aux, label, error=str(exc)))
        return out
    for label, kind, aux in selected:
        try:
            rep = evaluate_identity(kind, im, point, aux, tol, degree, state=state)
        except NotApplicable as exc:
            rep = IdentityReport(kind, state.point, None, None, {}, None, False, exc.reason, aux)
        except (PmcVerifyError, ArithmeticError) as exc:
            rep = IdentityReport(kind, state.point, None, None, {}, None, False, None, aux, error=str(exc))
        rep.label = label
        out.append(rep)
    return out


def run_suite(im: Immersion, grid=8, kinds="all", tol: float = DEFAULT_TOL,
              degree: int = jets.DEFAULT_DEGREE, threads: int | None = None) -> SuiteResult:
    """Evaluate the selected identities over a grid (int n for n x n cell centres, or points)."""
    selected = resolve_selectors(kinds) if not isinstance(kinds, list) or not kinds or isinstance(kinds[0], str) else kinds
    points = _points(im, grid)
    threads = threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda p: _run_point(im, p, selected, tol, degree), points))
    else:
        chunks = [_run_point(im, p, selected, tol, degree) for p in points]
    reports = [r for chunk in chunks for r in chunk]

    summary = []
    for label, kind, aux in selected:
        rows = [r for r in reports if r.label == label]
        evaluated = [r for r in rows if r.applicable and r.error is None]
        summary.append(
            {
                "label": label,
                "kind": kind.value,
                "aux": aux,
                "max_residual": max((r.residual for r in evaluated), default=None),
                "evaluated": len(evaluated),
                "not_applicable": sum(1 for r in rows if not r.applicable and r.error is None),
                "errors": sum(1 for r in rows if r.error is not None),
                "reasons": sorted({r.reason for r in rows if r.reason}),
                "pass": all(r.passed(tol) for r in rows),
            }
        )
    return SuiteResult(reports, summary, tol)
