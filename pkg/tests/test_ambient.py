import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from pmc_verify.ambient import (
    ProductSpace,
    SpaceForm,
    ambient_curvature,
    ambient_inner,
    quadric_normal_component,
    tangential_project,
)
from pmc_verify.errors import DimensionMismatch, NotTangent, OffManifold


def chart_point(q, c):
    """Hyperspherical chart (a, b, psi, t) of M^3(c) x R in the quadric model."""
    a, b, psi, t = q
    k = math.sqrt(abs(c))
    ca, sa = (math.cos(a), math.sin(a)) if c > 0 else (math.cosh(a), math.sinh(a))
    return np.array([ca, sa * math.cos(b), sa * math.sin(b) * math.cos(psi), sa * math.sin(b) * math.sin(psi), k * t]) / k


def chart_metric(q, c):
    a, b = q[0], q[1]
    s = math.sin(a) if c > 0 else math.sinh(a)
    return np.diag([1.0, s * s, s * s * math.sin(b) ** 2, abs(c)]) / abs(c)


def central(f, q, h):
    return np.stack([(f(q + h * e) - f(q - h * e)) / (2 * h) for e in np.eye(len(q))])


def christoffel(q, c, h=1e-5):
    """G[l, i, j] from finite differences of the closed-form chart metric."""
    g = chart_metric(q, c)
    dg = central(lambda x: chart_metric(x, c), q, h)  # [m, i, j] = d_m g_ij
    ginv = np.linalg.inv(g)
    return 0.5 * (np.einsum("lm,imj->lij", ginv, dg) + np.einsum("lm,jmi->lij", ginv, dg)
                  - np.einsum("lm,mij->lij", ginv, dg))


def chart_riemann(q, c, h=1e-4):
    """R[l, k, i, j] with R(d_i, d_j) d_k = R[l,k,i,j] d_l."""
    G = christoffel(q, c)
    dG = central(lambda x: christoffel(x, c), q, h)  # [i, l, j, k]
    return (np.einsum("iljk->lkij", dG) - np.einsum("jlik->lkij", dG)
            + np.einsum("lim,mjk->lkij", G, G) - np.einsum("ljm,mik->lkij", G, G))


@pytest.mark.parametrize("c", [1.0, 2.5, -1.0, -0.5])
def test_curvature_matches_chart_finite_differences(c, rng):
    space = ProductSpace.of(c)
    q = np.array([0.9, 1.1, 0.4, 0.3])
    p = chart_point(q, c)
    J = central(lambda x: chart_point(x, c), q, 1e-6)  # rows: pushforward of d_i
    R = chart_riemann(q, c)
    for _ in range(5):
        x, y, z = rng.normal(size=(3, 4))
        want = J.T @ np.einsum("lkij,i,j,k->l", R, x, y, z)
        got = ambient_curvature(J.T @ x, J.T @ y, J.T @ z, p, space)
        assert_allclose(got, want, atol=1e-6)


def test_inner_product_signature():
    hyp = ProductSpace.of(-1.0)
    e0 = np.eye(5)[0]
    assert ambient_inner(e0, e0, hyp) == -1.0
    assert ambient_inner(e0, e0, hyp) == pytest.approx(1 / hyp.c)
    sph = ProductSpace.of(1.0)
    E = np.eye(5)
    assert_allclose(ambient_inner(E[:, None, :], E[None, :, :], sph), np.eye(5))
    assert ProductSpace.of(0.0).ambient_dim == 4
    assert SpaceForm(-2.0).model == "hyperboloid"
    with pytest.raises(DimensionMismatch):
        ambient_inner(np.ones(4), np.ones(5), sph)


def test_xi_is_a_constant_unit_vector():
    for c in (1.0, -1.0, 0.0):
        space = ProductSpace.of(c, n=4)
        assert ambient_inner(space.xi, space.xi, space) == 1.0
        assert space.xi[-1] == 1.0 and not space.xi[:-1].any()


def test_curvature_simple_sections():
    space = ProductSpace.of(1.0)
    p = np.eye(5)[0]
    X, Y, xi = np.eye(5)[1], np.eye(5)[2], space.xi
    assert_allclose(ambient_curvature(X, Y, Y, p, space), X)
    assert_allclose(ambient_curvature(X, Y, xi, p, space), 0.0)


def test_curvature_rejects_non_tangent_and_off_manifold():
    space = ProductSpace.of(1.0)
    p = np.eye(5)[0]
    X, Y = np.eye(5)[1], np.eye(5)[2]
    with pytest.raises(NotTangent):
        ambient_curvature(p, X, Y, p, space)
    with pytest.raises(OffManifold):
        ambient_curvature(X, Y, X, 2 * p, space)
    with pytest.raises(OffManifold):
        tangential_project(-np.eye(5)[0], X, ProductSpace.of(-1.0))  # lower hyperboloid sheet


def test_projection_kills_position_vector():
    space = ProductSpace.of(1.0)
    p = np.array([0.6, 0.0, 0.8, 0.0, 3.0])
    out = tangential_project(p, space.quadric_part(p), space)
    assert_allclose(out, 0.0, atol=1e-15)


# -- random tangent data ---------------------------------------------------

curvatures = st.sampled_from([1.0, 0.3, -1.0, -2.0, 0.0])
seeds = st.integers(0, 2**32 - 1)


def random_point(c, r, n=3):
    space = ProductSpace.of(c, n)
    d = space.base.coord_dim
    w = r.normal(size=d)
    if c > 0:
        x = w / np.linalg.norm(w) / math.sqrt(c)
    elif c < 0:
        w[0] = 0.0
        x = w.copy()
        x[0] = math.sqrt(1 / -c + w @ w)
    else:
        x = w
    return space, np.append(x, r.normal())


def random_tangent(space, p, r, k):
    return [tangential_project(p, r.normal(size=space.ambient_dim), space) for _ in range(k)]


@given(curvatures, seeds)
def test_projection_is_tangent_and_idempotent(c, seed):
    r = np.random.default_rng(seed)
    space, p = random_point(c, r)
    w = r.normal(size=space.ambient_dim)
    t = tangential_project(p, w, space)
    assert abs(quadric_normal_component(p, t, space)) <= 1e-12 * (1 + np.abs(w).max())
    assert_allclose(tangential_project(p, t, space), t, atol=1e-12)


@given(curvatures, seeds)
def test_curvature_symmetries(c, seed):
    r = np.random.default_rng(seed)
    space, p = random_point(c, r, n=int(r.integers(2, 5)))
    X, Y, Z, W = random_tangent(space, p, r, 4)
    R = lambda a, b, z: ambient_curvature(a, b, z, p, space)
    ip = lambda a, b: float(ambient_inner(a, b, space))
    assert_allclose(R(X, Y, Z) + R(Y, X, Z), 0.0, atol=1e-12)
    assert abs(ip(R(X, Y, Z), W) + ip(R(X, Y, W), Z)) <= 1e-12 * (1 + np.abs(p).max() ** 4)
    assert_allclose(R(X, Y, Z) + R(Y, Z, X) + R(Z, X, Y), 0.0, atol=1e-12 * (1 + np.abs(p).max() ** 4))
    assert abs(quadric_normal_component(p, R(X, Y, Z), space)) <= 1e-10 * (1 + np.abs(p).max() ** 4)
    if c == 0:
        assert not R(X, Y, Z).any()
