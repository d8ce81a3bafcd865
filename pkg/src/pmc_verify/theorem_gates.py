"""Hypothesis margins and conclusion checks for the four classification theorems.

Suprema and infima over the surface are replaced by extrema over the sample
grid, which is exact for the homogeneous catalog surfaces and recorded in every
report.  Completeness and topology cannot be measured; they are taken from the
immersion metadata and echoed under ``assumed``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import jets
from .errors import NotApplicable
from .identities import DEFAULT_TOL, _Values, pmc_residual, thread_count
from .surface import GeometricState, Immersion, evaluate_state, gaussian_curvature_two_ways, sample_grid

EQUALITY_RTOL = 1e-7

CASE_ROUND = "case (1): |phi|^2 = 0, round sphere in M^3(c)"
CASE_TORUS = "case (2): |phi|^2 = 2|H|^2 + 2c, torus S^1(r) x S^1(sqrt(1/c - r^2))"
CASE_STANDARD = "standard sphere in M^3(c)"
CASE_MINIMAL_UMBILICAL = "minimal surface in a totally umbilical hypersurface of M^n(c)"
VIOLATED = "hypothesis violated"
AMBIGUOUS = "ambiguous hypothesis"
NO_MATCH = "no conclusion case matches"


class Theorem(str, Enum):
    Sphere2 = "Sphere2"
    GapCneg = "GapCneg"
    GapCpos = "GapCpos"
    GapMain = "GapMain"


# CLI names
THEOREM_NAMES = {
    "sphere2": Theorem.Sphere2,
    "gap-cneg": Theorem.GapCneg,
    "gap-cpos": Theorem.GapCpos,
    "gap-main": Theorem.GapMain,
}


@dataclass
class GateReport:
    theorem: Theorem
    status: str  # "pass" or "fail"
    hypothesis_margins: dict[str, float]
    hypothesis_satisfied: bool
    predicted_case: str
    observed: dict[str, float | bool]
    assumed: dict[str, object]
    grid: dict[str, object]
    readings: dict[str, bool] = field(default_factory=dict)
    reason: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class _Sample:
    T2: float
    H2: float
    phi2: float
    sigma2: float
    phiTT_H: float
    K: float
    phiH2: float  # 0 at minimal points, where the H direction is vacuous
    minimal: float

    @classmethod
    def of(cls, state: GeometricState) -> "_Sample":
        v = _Values.of(state)
        phiH2 = 0.0 if state.minimal else float(state.scalar_field("|phi_H|^2").value)
        return cls(v.T2, v.H2, v.phi2, v.sigma2, v.phiTT_H, gaussian_curvature_two_ways(state)[0],
                   phiH2, float(state.minimal))


def _ge(margin: float, scale: float, tol: float) -> bool:
    return bool(margin >= -tol * (1.0 + abs(scale)))


def _gt(margin: float, scale: float, tol: float) -> bool:
    return bool(margin > tol * (1.0 + abs(scale)))


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= EQUALITY_RTOL * max(1.0, abs(a), abs(b))


def _states(im: Immersion, points, degree: int) -> list[GeometricState]:
    threads = thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: evaluate_state(im, p, degree), points))
    return [evaluate_state(im, p, degree) for p in points]


def check_gate(theorem: Theorem | str, im: Immersion, grid=8, tol: float = DEFAULT_TOL,
               degree: int = jets.DEFAULT_DEGREE) -> GateReport:
    """Evaluate one theorem on the sampled surface.

    Raises NotApplicable when the surface is outside the theorem's scope
    (not pmc, minimal, wrong sign of c, wrong n, topology or completeness).
    """
    theorem = Theorem(THEOREM_NAMES.get(theorem, theorem)) if isinstance(theorem, str) else theorem
    points = sample_grid(im.domain, grid) if isinstance(grid, int) else [tuple(map(float, p)) for p in grid]
    grid_info = {
        "n": grid if isinstance(grid, int) else None,
        "points": len(points),
        "domain": [list(im.domain[0]), list(im.domain[1])],
        "extrema": "taken over the sample grid",
    }
    assumed = {"complete": im.complete, "topology": im.topology}
    c = im.space.c

    states = _states(im, points, degree)
    pmc = max(pmc_residual(s) for s in states)
    if pmc > tol:
        raise NotApplicable("pmc residual exceeded")

    if theorem is Theorem.Sphere2:
        if c == 0:
            raise NotApplicable("requires c != 0")
        if im.topology != "sphere":
            raise NotApplicable("requires a 2-sphere")
    else:
        if theorem is Theorem.GapCneg and not c < 0:
            raise NotApplicable("requires c < 0")
        if theorem in (Theorem.GapCpos, Theorem.GapMain) and not c > 0:
            raise NotApplicable("requires c > 0")
        if im.space.n != 3:
            raise NotApplicable("requires n = 3")
        if any(s.minimal for s in states):
            raise NotApplicable("minimal")
        if not im.complete:
            raise NotApplicable("requires a complete surface")

    samples = [_Sample.of(s) for s in states]
    arr = {k: np.array([getattr(s, k) for s in samples]) for k in ("T2", "H2", "phi2", "sigma2", "phiTT_H", "K", "phiH2", "minimal")}
    case2_gap = arr["phi2"] - (2 * arr["H2"] + 2 * c)
    observed = {
        "max |phi|^2": float(arr["phi2"].max()),
        "min |phi|^2": float(arr["phi2"].min()),
        "max |T|^2": float(arr["T2"].max()),
        "min |T|^2": float(arr["T2"].min()),
        "min |H|^2": float(arr["H2"].min()),
        "max |H|^2": float(arr["H2"].max()),
        "min K": float(arr["K"].min()),
        "max K": float(arr["K"].max()),
        "max ||phi|^2 - (2|H|^2+2c)|": float(np.abs(case2_gap).max()),
        "pmc residual": float(pmc),
    }
    phi_zero = all(_close(p, 0.0) for p in arr["phi2"])
    case2 = all(_close(p, 2 * h + 2 * c) for p, h in zip(arr["phi2"], arr["H2"]))
    xi_normal = all(_close(t, 0.0) for t in arr["T2"])
    observed.update({"case (1) equality": phi_zero, "case (2) equality": case2, "xi normal": xi_normal})

    fn = {
        Theorem.GapCneg: _gap_cneg,
        Theorem.GapCpos: _gap_cpos,
        Theorem.GapMain: _gap_main,
        Theorem.Sphere2: _sphere2,
    }[theorem]
    margins, satisfied, predicted, consistent, readings = fn(arr, c, tol, phi_zero, case2, xi_normal)
    return GateReport(
        theorem=theorem,
        status="pass" if consistent else "fail",
        hypothesis_margins=margins,
        hypothesis_satisfied=satisfied,
        predicted_case=predicted,
        observed=observed,
        assumed=assumed,
        grid=grid_info,
        readings=readings,
        reason=None if consistent else "hypotheses hold but the observed surface matches no conclusion case",
    )


def _gap_conclusion(phi_zero: bool, case2: bool, xi_normal: bool, need_xi_normal: bool):
    if need_xi_normal and not xi_normal:
        return NO_MATCH, False
    if phi_zero:
        return CASE_ROUND, True
    if case2:
        return CASE_TORUS, True
    return NO_MATCH, False


def _gap_cneg(arr, c, tol, phi_zero, case2, xi_normal):
    bound = 2 * arr["H2"] + c * (4 - 5 * arr["T2"])
    m1 = float(bound.min() - arr["phi2"].max())
    m2 = float(arr["phiTT_H"].min())
    margins = {"2|H|^2+c(4-5|T|^2) - sup |phi|^2": m1, "<phi(T,T),H>": m2}
    ok = _gt(m1, bound.min(), tol) and _ge(m2, 0.0, tol)
    if not ok:
        return margins, False, VIOLATED, True, {}
    if phi_zero:
        return margins, True, CASE_ROUND, True, {}
    return margins, True, NO_MATCH, False, {}


def _gap_cpos(arr, c, tol, phi_zero, case2, xi_normal):
    bound = 2 * arr["H2"] + c * (2 - 3 * arr["T2"])
    m1 = float((bound - arr["phi2"]).min())
    m2 = float((-arr["phiTT_H"]).min())
    margins = {"2|H|^2+c(2-3|T|^2) - |phi|^2": m1, "-<phi(T,T),H>": m2}
    ok = _ge(m1, bound.max(), tol) and _ge(m2, 0.0, tol)
    if not ok:
        return margins, False, VIOLATED, True, {}
    predicted, consistent = _gap_conclusion(phi_zero, case2, xi_normal, need_xi_normal=True)
    return margins, True, predicted, consistent, {}


def _gap_main(arr, c, tol, phi_zero, case2, xi_normal):
    T2, H2 = arr["T2"], arr["H2"]
    bound = 2 * H2 + 2 * c - 2.5 * c * T2
    m_i = float((bound - arr["phi2"]).min())
    hb = (3 * T2 - 2) * H2 - c * T2 * (1 - T2)
    margins = {
        "2|H|^2+2c-(5c/2)|T|^2 - |phi|^2": m_i,
        "max |T|^2": float(T2.max()),
        "min |T|^2 - 2/3": float(T2.min() - 2.0 / 3.0),
        "(3|T|^2-2)|H|^2 - c|T|^2(1-|T|^2)": float(hb.min()),
    }
    cond_i = _ge(m_i, bound.max(), tol)
    cond_a = xi_normal
    cond_b = bool(T2.min() > 2.0 / 3.0) and _ge(float(hb.min()), float(np.abs(H2).max()), tol)
    readings = {"i": bool(cond_i), "ii.a": bool(cond_a), "ii.b": bool(cond_b)}
    if not (cond_i and (cond_a or cond_b)):
        return margins, False, VIOLATED, True, readings
    predicted, consistent = _gap_conclusion(phi_zero, case2, xi_normal, need_xi_normal=False)
    return margins, True, predicted, consistent, readings


def _sphere2(arr, c, tol, phi_zero, case2, xi_normal):
    T2 = arr["T2"]
    bound = c * (2 - 3 * T2)
    m_sigma = float((bound - arr["sigma2"]).min())
    sigma_ok = _ge(m_sigma, float(np.abs(bound).max()), tol)
    t_zero = np.array([_close(t, 0.0) for t in T2])
    margins = {"c(2-3|T|^2) - |sigma|^2": m_sigma, "max |T|^2": float(T2.max())}
    readings: dict[str, bool] = {}
    if c > 0:
        margins["2/3 - max |T|^2"] = float(2.0 / 3.0 - T2.max())
        ok = bool(T2.max() <= 2.0 / 3.0 + tol) and sigma_ok
    else:
        margins["min |T|^2 - 2/3"] = float(T2.min() - 2.0 / 3.0)
        t_large = T2 >= 2.0 / 3.0 - tol
        both = bool(np.all(t_zero | t_large)) and sigma_ok
        second = bool(np.all(t_zero | (t_large & sigma_ok)))
        readings = {"bound_on_both": both, "bound_only_on_second": second}
        if both != second:
            # conclusion is still checked against what is observed
            consistent = (not second) or xi_normal
            return margins, second, AMBIGUOUS, consistent, readings
        ok = both
    if not ok:
        return margins, False, VIOLATED, True, readings
    if not xi_normal:
        return margins, True, NO_MATCH, False, readings
    # a great sphere fits both branches; it is reported as the minimal one
    if arr["minimal"].all():
        return margins, True, CASE_MINIMAL_UMBILICAL, True, readings
    if phi_zero:
        return margins, True, CASE_STANDARD, True, readings
    if all(_close(p, 0.0) for p in arr["phiH2"]):
        return margins, True, CASE_MINIMAL_UMBILICAL, True, readings
    return margins, True, NO_MATCH, False, readings
