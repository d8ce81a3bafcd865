"""Model surfaces with closed-form geometry, used as ground truth.

Every family except ``perturbed_graph`` and ``rotational_cmc`` is homogeneous,
so its expected invariants are constants.  Charts are written for general
``c`` with ``a = sqrt(c)`` (c > 0) or ``b = sqrt(-c)`` (c < 0); extra quadric
coordinates for n > 3 are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import jets
from .ambient import ProductSpace
from .errors import BadParameters
from .jets import Jet
from .surface import Immersion

POLE_MARGIN = 0.1
TWO_PI = 2.0 * math.pi

FAMILIES = (
    "slice",
    "round_sphere",
    "clifford_torus",
    "minimal_clifford_torus",
    "horosphere",
    "vertical_cylinder",
    "perturbed_graph",
    "rotational_cmc",
)


@dataclass(frozen=True)
class CatalogSpec:
    family: str
    c: float = 1.0
    params: dict = field(default_factory=dict)
    n: int = 3

    def __hash__(self):
        return hash((self.family, self.c, tuple(sorted(self.params.items())), self.n))


@dataclass(frozen=True)
class ExpectedValues:
    """Closed-form invariants; ``None`` where the value varies over the chart."""

    H_norm: float | None
    T2: float | None
    phi2: float | None
    K: float | None
    pmc: bool
    minimal: bool
    sigma2: float | None = None

    def as_dict(self) -> dict:
        return {
            "|H|": self.H_norm,
            "|T|^2": self.T2,
            "|phi|^2": self.phi2,
            "K": self.K,
            "|sigma|^2": self.sigma2,
            "pmc": self.pmc,
            "minimal": self.minimal,
        }


@dataclass(frozen=True)
class FamilyInfo:
    family: str
    params: dict  # name -> default (None: derived from c)
    c_sign: str  # "any", "positive", "negative"
    witnesses: tuple[str, ...]
    constraints: tuple[str, ...] = ()
    pmc: bool = True
    default_c: float = 1.0


_INFO = {
    "slice": FamilyInfo(
        "slice", {}, "any", ("GaussEq", "Codazzi", "applicability: minimal"), default_c=1.0
    ),
    "round_sphere": FamilyInfo(
        "round_sphere",
        {"rho": math.pi / 3},
        "any",
        ("Sphere2", "GapCneg", "GapMain case (1)", "SimonsPhiH", "SimonsPhi"),
        ("0 < rho < pi/sqrt(c) when c > 0", "rho > 0"),
    ),
    "clifford_torus": FamilyInfo(
        "clifford_torus",
        {"r": 0.6},
        "positive",
        ("GapCpos case (2)", "GapMain case (2)", "SimonsPhiH", "SimonsPhi", "DeltaSum"),
        ("0 < r < 1/sqrt(c)", "r^2 != 1/(2c) for nonminimal"),
    ),
    "minimal_clifford_torus": FamilyInfo(
        "minimal_clifford_torus", {}, "positive", ("SimonsAV", "RicciCommute"), ("r^2 = 1/(2c)",)
    ),
    "horosphere": FamilyInfo(
        "horosphere", {}, "negative", ("GapCneg exclusion (flat)",), ("c < 0",), default_c=-1.0
    ),
    "vertical_cylinder": FamilyInfo(
        "vertical_cylinder",
        {"rho": 1.0},
        "any",
        ("LaplacianT", "SchwarzBound equality", "PhiTNorm"),
        ("0 < rho < pi/(2 sqrt(c)) when c > 0 for nonminimal", "rho > 0"),
    ),
    "perturbed_graph": FamilyInfo(
        "perturbed_graph",
        {"eps": 0.1},
        "any",
        ("negative control: not pmc",),
        ("eps != 0 for a non-pmc surface",),
        pmc=False,
    ),
    "rotational_cmc": FamilyInfo(
        "rotational_cmc",
        {"h": None, "k": None},
        "any",
        ("LaplacianT", "SimonsPhi", "DeltaSum", "PhiTNorm", "SchwarzBound"),
        ("|w| < 1 on the profile interval",),
    ),
}


def list_catalog() -> list[dict]:
    """Stable-ordered description of every family."""
    out = []
    for fam in FAMILIES:
        info = _INFO[fam]
        out.append(
            {
                "family": fam,
                "params": dict(info.params),
                "c_sign": info.c_sign,
                "default_c": info.default_c,
                "pmc": info.pmc,
                "witnesses": list(info.witnesses),
                "constraints": list(info.constraints),
            }
        )
    return out


def family_info(family: str) -> FamilyInfo:
    if family not in _INFO:
        raise BadParameters(f"unknown family {family!r}; valid families: {', '.join(FAMILIES)}")
    return _INFO[family]


def _embed(quadric: list, t, n: int, c: float, like: Jet) -> Jet:
    """Assemble (quadric coords padded with zeros to the model dimension, t)."""
    zero = 0.0 * like
    dim = n if c == 0 else n + 1
    coords = list(quadric) + [zero] * (dim - len(quadric))
    return jets.stack(coords + [t if isinstance(t, Jet) else zero + t])


def _check_sign(family: str, c: float) -> None:
    sign = _INFO[family].c_sign
    if sign == "positive" and not c > 0:
        raise BadParameters(f"{family} requires c > 0, got c = {c}")
    if sign == "negative" and not c < 0:
        raise BadParameters(f"{family} requires c < 0, got c = {c}")


def _param(spec: CatalogSpec, name: str, default):
    extra = set(spec.params) - set(_INFO[spec.family].params)
    if extra:
        raise BadParameters(f"{spec.family} does not take parameter(s) {sorted(extra)}")
    val = spec.params.get(name, default)
    if val is None:
        return None
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise BadParameters(f"parameter {name} must be a number, got {val!r}") from None
    if not math.isfinite(val):
        raise BadParameters(f"parameter {name} must be finite")
    return val


def make_surface(spec: CatalogSpec) -> tuple[Immersion, ExpectedValues]:
    """Build the immersion and its closed-form expected values."""
    if spec.family not in _INFO:
        raise BadParameters(f"unknown family {spec.family!r}; valid families: {', '.join(FAMILIES)}")
    if not math.isfinite(spec.c):
        raise BadParameters("c must be finite")
    if spec.n < 2:
        raise BadParameters("n must be >= 2")
    _check_sign(spec.family, spec.c)
    builder: Callable = globals()[f"_build_{spec.family}"]
    return builder(spec)


# -- families -----------------------------------------------------------------


def _build_slice(spec):
    c, n = spec.c, spec.n
    _param(spec, "", None)
    space = ProductSpace.of(c, n)
    if c > 0:
        a = math.sqrt(c)
        lat = math.pi / 2 - POLE_MARGIN

        def chart(u, v):
            cu = jets.cos(u)
            return _embed([cu * jets.cos(v) / a, cu * jets.sin(v) / a, jets.sin(u) / a], 0.0, n, c, u)

        domain = ((-lat, lat), (0.0, TWO_PI))
        topology = "sphere"
    elif c < 0:
        b = math.sqrt(-c)

        def chart(u, v):
            cv = jets.cosh(v)
            return _embed([jets.cosh(u) * cv / b, jets.sinh(u) * cv / b, jets.sinh(v) / b], 0.0, n, c, u)

        domain = ((-1.0, 1.0), (-1.0, 1.0))
        topology = "plane"
    else:

        def chart(u, v):
            return _embed([u, v], 0.0, n, c, u)

        domain = ((-1.0, 1.0), (-1.0, 1.0))
        topology = "plane"
    im = Immersion(space, chart, domain, "slice", {}, topology)
    return im, ExpectedValues(0.0, 0.0, 0.0, c, True, True, 0.0)


def _sphere_radius_terms(c: float, rho: float) -> tuple[float, float, float]:
    """(S, C, k): sin_c(rho), cos_c(rho) and the geodesic-circle curvature C/S."""
    if c > 0:
        a = math.sqrt(c)
        S, C = math.sin(a * rho) / a, math.cos(a * rho)
    elif c < 0:
        b = math.sqrt(-c)
        S, C = math.sinh(b * rho) / b, math.cosh(b * rho)
    else:
        S, C = rho, 1.0
    return S, C, C / S


def _check_rho(c: float, rho: float, upper: float | None = None) -> None:
    if not rho > 0:
        raise BadParameters(f"rho out of domain: need rho > 0, got {rho}")
    if c > 0:
        limit = upper if upper is not None else math.pi / math.sqrt(c)
        if not rho < limit:
            raise BadParameters(f"rho out of domain: need rho < {limit:.6g} for c = {c}")


def _build_round_sphere(spec):
    c, n = spec.c, spec.n
    rho = _param(spec, "rho", _INFO["round_sphere"].params["rho"])
    _check_rho(c, rho)
    S, C, k = _sphere_radius_terms(c, rho)
    space = ProductSpace.of(c, n)

    def chart(th, ph):
        ct = jets.cos(th)
        pts = [S * ct * jets.cos(ph), S * ct * jets.sin(ph), S * jets.sin(th)]
        if c > 0:
            quadric = pts + [0.0 * th + C / math.sqrt(c)]
        elif c < 0:
            quadric = [0.0 * th + C / math.sqrt(-c)] + pts
        else:
            quadric = pts
        return _embed(quadric, 0.0, n, c, th)

    lat = math.pi / 2 - POLE_MARGIN
    im = Immersion(space, chart, ((-lat, lat), (0.0, TWO_PI)), "round_sphere", {"rho": rho}, "sphere")
    minimal = abs(k) < 1e-15
    # umbilical: sigma = k id in the H direction
    return im, ExpectedValues(abs(k), 0.0, 0.0, 1.0 / S**2, True, minimal, 2.0 * k * k)


def _torus(spec, r: float, family: str):
    c, n = spec.c, spec.n
    if not 0 < r < 1 / math.sqrt(c):
        raise BadParameters(f"r out of domain: need 0 < r < 1/sqrt(c) = {1 / math.sqrt(c):.6g}, got r = {r}")
    s = math.sqrt(1.0 / c - r * r)
    space = ProductSpace.of(c, n)

    def chart(u, v):
        return _embed([r * jets.cos(u), r * jets.sin(u), s * jets.cos(v), s * jets.sin(v)], 0.0, n, c, u)

    k1 = math.sqrt(c) * s / r
    k2 = -math.sqrt(c) * r / s
    H = abs(k1 + k2) / 2
    phi2 = (k1 - k2) ** 2 / 2
    im = Immersion(space, chart, ((0.0, TWO_PI), (0.0, TWO_PI)), family, {"r": r}, "torus")
    return im, ExpectedValues(H, 0.0, phi2, 0.0, True, H < 1e-15, k1 * k1 + k2 * k2)


def _build_clifford_torus(spec):
    r = _param(spec, "r", _INFO["clifford_torus"].params["r"])
    return _torus(spec, r, "clifford_torus")


def _build_minimal_clifford_torus(spec):
    _param(spec, "", None)
    im, ev = _torus(spec, math.sqrt(1.0 / (2.0 * spec.c)), "minimal_clifford_torus")
    return im, ExpectedValues(0.0, 0.0, 2.0 * spec.c, 0.0, True, True, 2.0 * spec.c)


def _build_horosphere(spec):
    c, n = spec.c, spec.n
    _param(spec, "", None)
    R = 1.0 / math.sqrt(-c)
    space = ProductSpace.of(c, n)

    def chart(u, v):
        q = 0.5 * (u * u + v * v)
        return _embed([R * (1.0 + q), R * u, R * v, R * q], 0.0, n, c, u)

    im = Immersion(space, chart, ((-1.0, 1.0), (-1.0, 1.0)), "horosphere", {}, "plane")
    b = math.sqrt(-c)
    return im, ExpectedValues(b, 0.0, 0.0, 0.0, True, False, 2.0 * b * b)


def _build_vertical_cylinder(spec):
    c, n = spec.c, spec.n
    rho = _param(spec, "rho", _INFO["vertical_cylinder"].params["rho"])
    _check_rho(c, rho)
    S, C, k = _sphere_radius_terms(c, rho)
    space = ProductSpace.of(c, n)

    def chart(t, v):
        circle = [S * jets.cos(v), S * jets.sin(v)]
        if c > 0:
            quadric = circle + [0.0 * t + C / math.sqrt(c)]
        elif c < 0:
            quadric = [0.0 * t + C / math.sqrt(-c)] + circle
        else:
            quadric = circle
        return _embed(quadric, t, n, c, t)

    im = Immersion(space, chart, ((-1.0, 1.0), (0.0, TWO_PI)), "vertical_cylinder", {"rho": rho}, "cylinder")
    return im, ExpectedValues(abs(k) / 2, 1.0, k * k / 2, 0.0, True, abs(k) < 1e-15, k * k)


def _build_perturbed_graph(spec):
    eps = _param(spec, "eps", _INFO["perturbed_graph"].params["eps"])
    base, _ = _build_slice(CatalogSpec("slice", spec.c, {}, spec.n))
    space = base.space

    def chart(u, v):
        x = base.chart(u, v)
        t = eps * (u + 0.5 * jets.sin(u) * jets.cos(2.0 * v))
        coeffs = x.coeffs.copy()
        coeffs[:, -1] = t.coeffs
        return Jet(coeffs, x.degree)

    im = Immersion(space, chart, base.domain, "perturbed_graph", {"eps": eps}, base.topology)
    ev = ExpectedValues(None, None, None, None, eps == 0.0, eps == 0.0)
    return im, ev


# rotational constant-mean-curvature surfaces in M^2(c) x R (a totally geodesic
# slab of M^3(c) x R).  With s the distance to the axis in M^2 and
# w = f'/sqrt(1 + f'^2) the profile slope, mean curvature h integrates to
#   c > 0:  w sin(a s)  = k - (2h/a) cos(a s)
#   c < 0:  w sinh(b s) = k + (2h/b) cosh(b s)
#   c = 0:  w s         = k + h s^2

_ROT_DEFAULTS = {1: (0.5, 0.2, (1.0, 2.0)), -1: (0.3, -0.5, (1.0, 2.0)), 0: (0.5, 0.2, (0.5, 1.5))}


def _build_rotational_cmc(spec):
    c, n = spec.c, spec.n
    sgn = (c > 0) - (c < 0)
    h0, k0, s_range = _ROT_DEFAULTS[sgn]
    h = _param(spec, "h", h0)
    k = _param(spec, "k", k0)
    h = h0 if h is None else h
    k = k0 if k is None else k
    space = ProductSpace.of(c, n)

    if c > 0:
        a = math.sqrt(c)

        def S(s):
            return jets.sin(a * s) / a if isinstance(s, Jet) else math.sin(a * s) / a

        def w(s):
            if isinstance(s, Jet):
                return (k - (2 * h / a) * jets.cos(a * s)) / jets.sin(a * s)
            return (k - (2 * h / a) * math.cos(a * s)) / math.sin(a * s)

        def axis_coord(s):
            return jets.cos(a * s) / a
    elif c < 0:
        b = math.sqrt(-c)

        def S(s):
            return jets.sinh(b * s) / b if isinstance(s, Jet) else math.sinh(b * s) / b

        def w(s):
            if isinstance(s, Jet):
                return (k + (2 * h / b) * jets.cosh(b * s)) / jets.sinh(b * s)
            return (k + (2 * h / b) * math.cosh(b * s)) / math.sinh(b * s)

        def axis_coord(s):
            return jets.cosh(b * s) / b
    else:

        def S(s):
            return s

        def w(s):
            return h * s + k / s

        axis_coord = None

    s0, s1 = s_range
    ws = [abs(w(s)) for s in np.linspace(s0, s1, 201)]
    if max(ws) >= 0.999:
        raise BadParameters(f"rotational_cmc profile leaves |w| < 1 on [{s0}, {s1}] for h={h}, k={k}")

    def slope(s):
        ww = w(s)
        return ww / (1.0 - ww * ww) ** 0.5 if not isinstance(ww, Jet) else ww / jets.sqrt(1.0 - ww * ww)

    def chart(s, th):
        f0 = quad(slope, s0, float(s.value), epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        t = slope(s).antiderivative(0, f0)
        circle = [S(s) * jets.cos(th), S(s) * jets.sin(th)]
        if c > 0:
            quadric = circle + [axis_coord(s)]
        elif c < 0:
            quadric = [axis_coord(s)] + circle
        else:
            quadric = circle
        return _embed(quadric, t, n, c, s)

    im = Immersion(space, chart, (s_range, (0.0, TWO_PI)), "rotational_cmc", {"h": h, "k": k}, "annulus", False)
    return im, ExpectedValues(abs(h), None, None, None, True, h == 0.0)
