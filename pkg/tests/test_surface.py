import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from helpers import ORACLE_QUANTITIES, PMC_SURFACES, fd_mismatch, fd_partials, generic_surface, surface, surface_id
from pmc_verify import jets
from pmc_verify.ambient import ProductSpace, ambient_inner
from pmc_verify.errors import DegenerateMetric, InsufficientJetDegree, MinimalPoint, OffManifold
from pmc_verify.surface import (
    Immersion,
    covariant_gradient_norm,
    evaluate_state,
    gaussian_curvature_two_ways,
    intrinsic_laplacian,
    normal_connection_residual,
    normal_derivative,
    q_form,
    sample_grid,
    split_xi,
)

GENERIC_CS = [1.0, -0.7, 0.0]
ALL_SURFACES = [(surface_id(e), surface(e[0], e[1], **e[2])[0]) for e in PMC_SURFACES] + [
    (f"generic[c={c:g}]", generic_surface(c)) for c in GENERIC_CS
] + [("perturbed_graph", surface("perturbed_graph", 1.0)[0]), ("clifford_torus[n=4]", surface("clifford_torus", 1.0, n=4)[0])]


def states_of(im, n=3):
    return [evaluate_state(im, p) for p in sample_grid(im.domain, n)]


# -- spec examples -----------------------------------------------------------


def test_torus_values():
    im, _ = surface("clifford_torus", 1.0, r=0.6)
    s = evaluate_state(im, (0.3, 1.1))
    assert s.H_norm == pytest.approx(7 / 24, abs=1e-12)
    assert gaussian_curvature_two_ways(s) == pytest.approx((0.0, 0.0), abs=1e-12)
    _, T2, _, nu = split_xi(s)
    assert T2 == pytest.approx(0.0, abs=1e-14)
    assert abs(nu[0]) < 1e-12 and abs(nu[1]) == pytest.approx(1.0)


def test_slice_is_totally_geodesic():
    for c in (1.0, -1.0):
        s = evaluate_state(surface("slice", c)[0], (0.4, 0.5))
        assert s.minimal
        assert_allclose(s.sigma.value, 0.0, atol=1e-13)
        assert_allclose(s.H.value, 0.0, atol=1e-13)


def test_geodesic_sphere_quarter_pi():
    s = evaluate_state(surface("round_sphere", 1.0, rho=math.pi / 4)[0], (0.9, 2.0))
    assert s.H_norm == pytest.approx(1.0, abs=1e-12)
    assert float(s.phi2.value) == pytest.approx(0.0, abs=1e-12)
    assert gaussian_curvature_two_ways(s) == pytest.approx((2.0, 2.0), abs=1e-12)


def test_gauss_two_ways_examples():
    s = evaluate_state(surface("round_sphere", 1.0, rho=math.pi / 3)[0], (1.0, 1.0))
    assert gaussian_curvature_two_ways(s) == pytest.approx((4 / 3, 4 / 3), abs=1e-12)
    s = evaluate_state(surface("horosphere", -1.0)[0], (0.2, -0.3))
    assert gaussian_curvature_two_ways(s) == pytest.approx((0.0, 0.0), abs=1e-12)
    with pytest.raises(InsufficientJetDegree):
        gaussian_curvature_two_ways(evaluate_state(surface("horosphere", -1.0)[0], (0.2, -0.3), degree=2))


def test_split_xi_examples():
    T, T2, N, nu = split_xi(evaluate_state(surface("vertical_cylinder", 1.0)[0], (0.5, 0.5)))
    assert T2 == pytest.approx(1.0)
    assert_allclose(N, 0.0, atol=1e-12)

    # a graph t = 0.3 u over a chart of a geodesic sphere: xi is neither tangent nor normal
    space = ProductSpace.of(1.0)
    rho = math.pi / 3

    def chart(th, ph):
        sr = math.sin(rho)
        return jets.stack([math.cos(rho) + 0 * th, sr * jets.sin(th) * jets.cos(ph),
                           sr * jets.sin(th) * jets.sin(ph), sr * jets.cos(th), 0.3 * th])

    im = Immersion(space, chart, ((0.5, 2.5), (0.0, 6.0)), topology="annulus", complete=False)
    for s in states_of(im, 2):
        T2 = split_xi(s)[1]
        assert 0.0 < T2 < 1.0


def test_laplacian_of_constant_and_height():
    # great sphere of S^3: coordinate functions are first eigenfunctions, Delta x = -2 x
    im, _ = surface("round_sphere", 1.0, rho=math.pi / 2)
    for p in sample_grid(im.domain, 3):
        s = evaluate_state(im, p)
        for k in range(1, 4):
            lap = intrinsic_laplacian(im, p, lambda st: st.x[k], state=s)
            assert lap == pytest.approx(-2.0 * float(s.x.value[k]), abs=1e-11)
        assert intrinsic_laplacian(im, p, lambda st: st.g[0, 0] * 0 + 3.0, state=s) == 0.0
    torus = surface("clifford_torus", 1.0)[0]
    assert intrinsic_laplacian(torus, (0.1, 0.2), "|T|^2") == pytest.approx(0.0, abs=1e-14)


def test_laplacian_against_coordinate_formula():
    # flat chart: Laplacian is the plain coordinate Laplacian
    space = ProductSpace.of(0.0)
    im = Immersion(space, lambda u, v: jets.stack([u, v, 0 * u, 0 * u]), ((-1.0, 1.0), (-1.0, 1.0)))
    harmonic = lambda st: jets.sin(st.x[0]) * jets.exp(st.x[1])
    p = (0.3, -0.4)
    assert intrinsic_laplacian(im, p, harmonic) == pytest.approx(0.0, abs=1e-13)
    f2 = lambda st: st.x[0] ** 3 * st.x[1]
    assert intrinsic_laplacian(im, p, f2) == pytest.approx(6 * 0.3 * -0.4)


def test_normal_connection_residual_examples():
    torus = surface("clifford_torus", 1.0)[0]
    assert max(normal_connection_residual(torus, p) for p in torus.grid(4)) <= 1e-10
    sl = surface("slice", 1.0)[0]
    assert max(normal_connection_residual(sl, p) for p in sl.grid(3)) == 0.0
    pg = surface("perturbed_graph", 1.0, eps=0.1)[0]
    assert max(normal_connection_residual(pg, p) for p in pg.grid(4)) > 1e-3


@pytest.mark.parametrize("family, params", [("clifford_torus", {}), ("round_sphere", {}), ("vertical_cylinder", {})])
def test_covariant_gradient_vanishes_on_homogeneous(family, params):
    im = surface(family, 1.0, **params)[0]
    for p in im.grid(2):
        assert covariant_gradient_norm(im, p, "phi3") <= 1e-20
        assert covariant_gradient_norm(im, p, "phi4") <= 1e-20


def test_covariant_gradient_nonzero_on_rotational():
    im = surface("rotational_cmc", 1.0)[0]
    assert covariant_gradient_norm(im, im.grid(1)[0], "phi3") > 1e-3
    with pytest.raises(MinimalPoint):
        covariant_gradient_norm(surface("slice", 1.0)[0], (0.5, 0.5), "phi3")


def test_q_form_examples():
    s = evaluate_state(surface("round_sphere", 1.0)[0], (1.0, 2.0))
    assert q_form(s, 0, 0) - q_form(s, 1, 1) == pytest.approx(0.0, abs=1e-12)
    assert q_form(s, 0, 1) == pytest.approx(0.0, abs=1e-12)

    s = evaluate_state(surface("vertical_cylinder", 1.0)[0], (0.5, 0.5))
    That = s.T_frame.value / math.sqrt(float(s.T2.value))
    Q = np.array([[q_form(s, i, j) for j in range(2)] for i in range(2)])
    assert That @ Q @ That == pytest.approx(-1.0, abs=1e-12)

    s = evaluate_state(surface("clifford_torus", 1.0)[0], (0.5, 0.5))
    assert q_form(s, 0, 1) == pytest.approx(0.0, abs=1e-13)


def test_error_paths():
    space = ProductSpace.of(1.0)
    flat_fold = Immersion(space, lambda u, v: jets.stack([jets.cos(u + v), jets.sin(u + v), 0 * u, 0 * u, 0 * u]),
                          ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(DegenerateMetric):
        evaluate_state(flat_fold, (0.5, 0.5))
    off = Immersion(space, lambda u, v: jets.stack([1 + u, v, 0 * u, 0 * u, 0 * u]), ((0.0, 1.0), (0.0, 1.0)))
    with pytest.raises(OffManifold):
        evaluate_state(off, (0.5, 0.5))
    with pytest.raises(InsufficientJetDegree):
        evaluate_state(surface("clifford_torus", 1.0)[0], (0.5, 0.5), degree=1)
    with pytest.raises(MinimalPoint):
        evaluate_state(surface("slice", 1.0)[0], (0.5, 0.5)).scalar_field("|phi_H|^2")


def test_sample_grid_is_row_major_cell_centres():
    pts = sample_grid(((0.0, 1.0), (0.0, 2.0)), 2)
    assert pts == [(0.25, 0.5), (0.25, 1.5), (0.75, 0.5), (0.75, 1.5)]


# -- invariants on every surface ------------------------------------------


@pytest.mark.parametrize("name, im", ALL_SURFACES, ids=[n for n, _ in ALL_SURFACES])
def test_state_invariants(name, im):
    space = im.space
    for s in states_of(im):
        g = s.g.value
        assert_allclose(g, g.T, atol=1e-14)
        assert np.all(np.linalg.eigvalsh(g) > 0)
        assert_allclose(s.christoffel.value, s.christoffel.value.transpose(0, 2, 1), atol=1e-13)

        frame = np.vstack([s.tangent_frame.value, s.normal_frame.value])
        gram = ambient_inner(frame[:, None, :], frame[None, :, :], space)
        assert_allclose(gram, np.eye(len(frame)), atol=1e-12)
        if space.c != 0:
            pm = space.quadric_part(s.x.value)
            assert_allclose(ambient_inner(frame, pm, space), 0.0, atol=1e-12)

        assert_allclose(s.T.value + s.N.value, space.xi, atol=1e-12)
        assert float(s.T2.value) + float(ambient_inner(s.N.value, s.N.value, space)) == pytest.approx(1.0, abs=1e-12)

        A = s.A.value
        assert_allclose(A, A.transpose(0, 2, 1), atol=1e-12)
        assert_allclose(np.trace(s.phi.value, axis1=1, axis2=2), 0.0, atol=1e-12)
        scale = 1.0 + float(s.sigma2.value)
        assert float(s.phi2.value) == pytest.approx(float(s.sigma2.value) - 2 * float(s.H2.value), abs=1e-12 * scale)
        assert float(s.phi2.value) == pytest.approx(float(np.sum(s.phi.value ** 2)), abs=1e-12 * scale)

        k_int, k_ext = gaussian_curvature_two_ways(s)
        assert k_int == pytest.approx(k_ext, rel=1e-7, abs=1e-9)

        if not s.minimal:
            E3 = s.normal_frame.value[0]
            assert_allclose(E3 * s.H_norm, s.H.value, atol=1e-12)


@pytest.mark.parametrize("name, im", ALL_SURFACES, ids=[n for n, _ in ALL_SURFACES])
def test_xi_parallel_consequences(name, im):
    """nabla_X T = A_N X and sigma(X, T) = -nabla^perp_X N."""
    space = im.space
    for s in states_of(im):
        e = s.frame_coeffs.value
        dT = np.stack([s.T.diff(0).value, s.T.diff(1).value])  # [k, m]
        dT_frame = e @ dT  # [a, m], derivative along E_a
        nabla_T = ambient_inner(dT_frame[:, None, :], s.tangent_frame.value[None, :, :], space)
        assert_allclose(nabla_T, s.A_N.value, atol=1e-8)

        sigma_XT = np.einsum("qab,b->aq", s.A.value, s.T_frame.value)
        assert_allclose(sigma_XT, -normal_derivative(s, s.N), atol=1e-8)


@pytest.mark.parametrize("family, params", [("clifford_torus", {}), ("rotational_cmc", {}), ("round_sphere", {})])
def test_phi_H_T_norm(family, params):
    for s in states_of(surface(family, 1.0, **params)[0]):
        phT = s.phi_H.value @ s.T_frame.value
        assert phT @ phT == pytest.approx(0.5 * float(s.T2.value) * float(np.sum(s.phi_H.value ** 2)), abs=1e-12)


@pytest.mark.parametrize("entry", PMC_SURFACES, ids=surface_id)
def test_shape_operators_commute_on_pmc(entry):
    im = surface(entry[0], entry[1], **entry[2])[0]
    for s in states_of(im, 2):
        A3, A4 = s.A.value[0], s.A.value[1]
        assert np.abs(A3 @ A4 - A4 @ A3).max() <= 1e-10


# -- jets vs finite differences ------------------------------------------


@pytest.mark.parametrize("family", ["clifford_torus", "round_sphere", "rotational_cmc"])
@pytest.mark.parametrize("quantity", sorted(ORACLE_QUANTITIES))
def test_jet_partials_match_central_differences(family, quantity, rng):
    im = surface(family, 1.0)[0]
    (u0, u1), (v0, v1) = im.domain
    for _ in range(3):
        p = (rng.uniform(u0 + 0.05, u1 - 0.05), rng.uniform(v0 + 0.05, v1 - 0.05))
        fn = ORACLE_QUANTITIES[quantity]
        jet = fn(evaluate_state(im, p))
        fd = fd_partials(lambda st: fn(st).value, im, p)
        assert fd_mismatch(jet, fd) <= 1e-5


@given(st.floats(0.35, 1.25), st.floats(0.25, 1.15), st.sampled_from(GENERIC_CS))
def test_gauss_equation_at_random_points(u, v, c):
    s = evaluate_state(generic_surface(c), (u, v))
    k_int, k_ext = gaussian_curvature_two_ways(s)
    assert k_int == pytest.approx(k_ext, rel=1e-9, abs=1e-11)
