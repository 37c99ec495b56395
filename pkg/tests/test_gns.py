import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatialssa.algebras import (
    AlgebraMismatchError,
    commutant,
    factor_algebra,
    full_algebra,
    functional_from_density,
    restrict_functional,
    scalars,
)
from spatialssa.gns import (
    NotFaithfulError,
    check_intertwining,
    closed_form_tripartite,
    gns,
    gns_subspace_projection,
    inclusion_isometry,
    r_op,
    relative_modular,
    spatial_derivative,
    standard_form,
    theta,
    transport_weights,
)
from spatialssa.linalg import embed, herm_power, kron, loewner_leq, min_eig, partial_trace
from spatialssa.randoms import pattern_algebra, random_subalgebra

from conftest import rand_density, rand_matrix, rand_vec

seeds = st.integers(0, 2**32 - 1)
DIMS = (2, 2, 2)


def tripartite(rng, dims=DIMS):
    da, db, dc = dims
    rho, sigma = rand_density(rng, da * db), rand_density(rng, db * dc)
    n = factor_algebra(dims, [0])
    m = factor_algebra(dims, [0, 1])
    n_p, m_p = commutant(n), commutant(m)
    psi = functional_from_density(m, kron(rho, np.eye(dc) / dc))
    phi = functional_from_density(n_p, kron(np.eye(da) / da, sigma))
    return rho, sigma, n, m, n_p, m_p, psi, phi


def test_gns_examples():
    g = gns(full_algebra(2), functional_from_density(full_algebra(2), np.eye(2) / 2))
    assert g.l2_dim == 4 and g.faithful
    e1 = np.diag([1.0, 0.0]).astype(complex)
    g = gns(full_algebra(2), functional_from_density(full_algebra(2), e1))
    assert g.l2_dim == 2 and not g.faithful
    diag = pattern_algebra(2, "diagonal")
    g = gns(diag, functional_from_density(diag, np.diag([0.3, 0.7])))
    assert g.l2_dim == 2 and g.faithful


@given(seeds, st.sampled_from(["diagonal", "block", "factor", "full"]), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_gns_invariants(seed, pattern, rank):
    rng = np.random.default_rng(seed)
    a = random_subalgebra(4, pattern, rng)
    w = functional_from_density(a, rand_density(rng, 4, rank))
    g = gns(a, w)
    res = g.invariant_residuals()
    assert res["gram"] <= 1e-9
    assert res["unit"] <= 1e-9
    assert res["adjoint"] <= 1e-9 * max(1, np.abs(g.pi).max())
    assert res["product"] <= 1e-9 * max(1, np.abs(g.pi).max() ** 2)
    # <eta(a), eta(b)> = w(a^dag b) on random elements
    x, y = rand_matrix(rng, 4), rand_matrix(rng, 4)
    x, y = a.element(a.coefficients(x)), a.element(a.coefficients(y))
    assert np.isclose(np.vdot(g.eta_of(x), g.eta_of(y)), w(x.conj().T @ y), atol=1e-9)


def test_projection_examples(rng):
    a = full_algebra(4)
    sigma = rand_density(rng, 4)
    g = gns(a, functional_from_density(a, sigma))
    assert np.allclose(gns_subspace_projection(g, a), np.eye(16), atol=1e-10)
    p = gns_subspace_projection(g, scalars(4))
    v = g.eta_of(np.eye(4))
    assert np.allclose(p, np.outer(v, v.conj()) / np.vdot(v, v), atol=1e-10)
    c = factor_algebra((2, 2), [1])
    p = gns_subspace_projection(g, c)
    assert round(np.trace(p).real) == 4
    for x in c.basis:
        px = g.pi_of(x)
        assert np.linalg.norm(p @ px - px @ p) <= 1e-9
    with pytest.raises(AlgebraMismatchError):
        gns_subspace_projection(gns(c, functional_from_density(c, sigma)), a)


def test_r_op_examples(rng):
    d = 3
    a = full_algebra(d)
    sigma = rand_density(rng, d)
    g = gns(a, functional_from_density(a, sigma))
    xi = rand_matrix(rng, d, 1).reshape(-1)
    r = r_op(g, xi)
    # for the full algebra R R^dag = <xi, sigma^-1 xi>, so ||R|| = ||sigma^-1/2 xi||
    exact = np.linalg.norm(herm_power(sigma, -0.5) @ xi)
    assert np.isclose(np.linalg.norm(r, 2), exact, rtol=1e-10)
    assert np.linalg.norm(r, 2) <= np.linalg.norm(herm_power(sigma, -0.5), 2) * np.linalg.norm(xi) * (1 + 1e-12)
    assert np.array_equal(r_op(g, np.zeros(d)), np.zeros((d, d * d)))
    s = scalars(d)
    gs = gns(s, functional_from_density(s, np.eye(d) / d))
    assert np.allclose(r_op(gs, xi) @ gs.eta_of(np.eye(d)), xi)
    for x in a.basis[:3]:
        assert np.allclose(r @ g.eta_of(x), x @ xi, atol=1e-12)


def test_r_op_requires_faithful():
    e1 = np.diag([1.0, 0.0]).astype(complex)
    g = gns(full_algebra(2), functional_from_density(full_algebra(2), e1))
    with pytest.raises(NotFaithfulError):
        r_op(g, np.ones(2))


def test_theta_tripartite_closed_form(rng):
    rho, sigma, n, m, n_p, m_p, psi, phi = tripartite(rng)
    g = gns(n_p, phi)
    xi = rand_vec(rng, 8)
    s = embed(herm_power(sigma, -0.5), DIMS, [1, 2])
    want = partial_trace(s @ np.outer(xi, xi.conj()) @ s, DIMS, [0])
    want = embed(want, DIMS, [0])
    assert np.linalg.norm(theta(g, xi, xi) - want) <= 1e-9 * np.linalg.norm(want)
    alpha, beta = rand_vec(rng, 2), rand_vec(rng, 4)
    t = theta(g, np.kron(alpha, beta), np.kron(alpha, beta))
    scalar = np.vdot(beta, herm_power(sigma, -1) @ beta)
    want = kron(scalar * np.outer(alpha, alpha.conj()), np.eye(4))
    assert np.linalg.norm(t - want) <= 1e-9 * np.linalg.norm(want)
    assert np.array_equal(theta(g, xi, np.zeros(8)), np.zeros((8, 8)))


@given(seeds, st.sampled_from(["diagonal", "block", "factor"]))
@settings(max_examples=25, deadline=None)
def test_theta_in_commutant_psd_sesquilinear(seed, pattern):
    rng = np.random.default_rng(seed)
    a = random_subalgebra(4, pattern, rng)
    g = gns(a, functional_from_density(a, rand_density(rng, 4)))
    x1, x1b, x2 = (rand_matrix(rng, 4, 1).reshape(-1) for _ in range(3))
    alpha = complex(rng.normal(), rng.normal())
    t = theta(g, x1, x2)
    scale = max(1.0, np.linalg.norm(t))
    for b in a.basis:
        assert np.linalg.norm(b @ t - t @ b) <= 1e-9 * scale
    assert min_eig(theta(g, x1, x1)) >= -1e-9 * max(1.0, np.linalg.norm(theta(g, x1, x1)))
    lin = theta(g, alpha * x1 + x1b, x2) - alpha * t - theta(g, x1b, x2)
    anti = theta(g, x2, alpha * x1) - np.conj(alpha) * theta(g, x2, x1)
    assert np.linalg.norm(lin) <= 1e-10 * scale * (1 + abs(alpha))
    assert np.linalg.norm(anti) <= 1e-10 * scale * (1 + abs(alpha))


def test_intertwining_examples(rng):
    rho, sigma, n, m, n_p, m_p, psi, phi = tripartite(rng)
    g = gns(n_p, phi)
    xi = rand_vec(rng, 8)
    assert check_intertwining(g, np.eye(8), np.eye(8), xi) <= 1e-12
    a = n_p.element(rand_matrix(rng, 1, n_p.dim).reshape(-1))
    assert check_intertwining(g, a, np.eye(8), xi) <= 1e-10 * max(1, np.linalg.norm(a @ r_op(g, xi)))
    ap = n.element(rand_matrix(rng, 1, n.dim).reshape(-1))
    lhs = np.linalg.norm(a @ ap @ r_op(g, xi))
    assert check_intertwining(g, a, ap, xi) <= 1e-9 * max(1, lhs)


def test_spatial_derivative_closed_forms(rng):
    rho, sigma, n, m, n_p, m_p, psi, phi = tripartite(rng)
    coarse = spatial_derivative(psi, gns(m_p, restrict_functional(phi, m_p)))
    fine = spatial_derivative(restrict_functional(psi, n), gns(n_p, phi))
    for sd, side in ((coarse, "coarse"), (fine, "fine")):
        want = closed_form_tripartite(rho, sigma, DIMS, side)
        assert np.linalg.norm(sd.matrix - want) <= 1e-8 * np.linalg.norm(want)


def test_spatial_derivative_one_sided(rng):
    d = 3
    rho = rand_density(rng, d)
    psi = functional_from_density(full_algebra(d), rho)
    s = scalars(d)
    sd = spatial_derivative(psi, gns(s, functional_from_density(s, np.eye(d) / d)))
    assert np.allclose(sd.matrix, rho, atol=1e-12)


@given(seeds, st.sampled_from(["diagonal", "block", "factor"]), st.integers(1, 4))
@settings(max_examples=15, deadline=None)
def test_spatial_derivative_pairing(seed, pattern, rank):
    rng = np.random.default_rng(seed)
    mp = random_subalgebra(4, pattern, rng)
    m = commutant(mp)
    phi = functional_from_density(mp, rand_density(rng, 4))
    psi = functional_from_density(m, rand_density(rng, 4, rank))
    sd = spatial_derivative(psi, gns(mp, phi))
    assert min_eig(sd.matrix) >= -1e-9 * np.linalg.norm(sd.matrix, 2)
    for _ in range(100):
        x1, x2 = rand_matrix(rng, 4, 1).reshape(-1), rand_matrix(rng, 4, 1).reshape(-1)
        want = sd.defining_form(x1, x2)
        assert abs(sd.form(x1, x2) - want) <= 1e-8 * max(abs(want), np.linalg.norm(sd.matrix) * np.linalg.norm(x1) * np.linalg.norm(x2))


def test_spatial_derivative_errors(rng):
    rho, sigma, n, m, n_p, m_p, psi, phi = tripartite(rng)
    with pytest.raises(AlgebraMismatchError):
        spatial_derivative(psi, gns(n_p, phi))
    e1 = np.zeros((8, 8), dtype=complex)
    e1[0, 0] = 1
    bad = gns(n_p, functional_from_density(n_p, e1))
    with pytest.raises(NotFaithfulError):
        spatial_derivative(restrict_functional(psi, n), bad)


def test_closed_form_examples(rng):
    rho, sigma = np.eye(4) / 4, np.eye(4) / 4
    assert np.allclose(closed_form_tripartite(rho, sigma, DIMS, "coarse"), np.eye(8) / 2)
    assert np.allclose(closed_form_tripartite(rho, sigma, DIMS, "fine"), 2 * np.eye(8))
    rho, sigma = rand_density(rng, 4), rand_density(rng, 4)
    for side in ("coarse", "fine"):
        out = closed_form_tripartite(rho, sigma, DIMS, side)
        assert np.allclose(out, out.conj().T)
        assert min_eig(out) >= -1e-12 * np.linalg.norm(out, 2)
    with pytest.raises(ValueError):
        closed_form_tripartite(rho, sigma, DIMS, "middle")


def test_standard_form_full_m2(rng):
    sf = standard_form(full_algebra(2))
    res = sf.invariant_residuals()
    assert max(res.values()) <= 1e-9
    a = rand_matrix(rng, 2)
    # J eta(a) = eta(a^dag), and the right representation is right multiplication by a^dag
    assert np.allclose(sf.J(sf.l2.eta_of(a)), sf.l2.eta_of(a.conj().T))
    b = rand_matrix(rng, 2)
    assert np.allclose(sf.right_rep(a) @ sf.l2.eta_of(b), sf.l2.eta_of(b @ a.conj().T))


def test_standard_form_diagonal():
    sf = standard_form(pattern_algebra(2, "diagonal"))
    assert np.allclose(sf.conj_matrix, np.eye(2))
    assert max(sf.invariant_residuals().values()) <= 1e-9


@given(seeds, st.sampled_from(["diagonal", "block", "factor"]))
@settings(max_examples=10, deadline=None)
def test_standard_form_random_algebra(seed, pattern):
    sf = standard_form(random_subalgebra(4, pattern, np.random.default_rng(seed)))
    assert max(sf.invariant_residuals().values()) <= 1e-9


def test_relative_modular_examples(rng):
    sf = standard_form(full_algebra(3))
    assert np.allclose(relative_modular(np.eye(3) / 3, np.eye(3) / 3, sf), np.eye(9), atol=1e-12)
    sf2 = standard_form(full_algebra(2))
    a, b, c, d = 0.2, 0.8, 0.35, 0.65
    delta = relative_modular(np.diag([a, b]), np.diag([c, d]), sf2)
    assert np.allclose(np.sort(np.linalg.eigvalsh(delta)), np.sort([a / c, a / d, b / c, b / d]))
    psi, phi = rand_density(rng, 3), rand_density(rng, 3)
    delta = relative_modular(psi, phi, sf)
    assert np.allclose(delta, delta.conj().T)
    assert min_eig(delta) > 0
    with pytest.raises(AlgebraMismatchError):
        relative_modular(np.eye(2) / 2, np.eye(2) / 2, standard_form(pattern_algebra(2, "diagonal")))


@pytest.mark.parametrize("d", [2, 3])
def test_standard_form_identity(rng, d):
    sf = standard_form(full_algebra(d))
    psi_d, phi_d = rand_density(rng, d), rand_density(rng, d)
    psi, phi = transport_weights(sf, psi_d, phi_d)
    # phi^T(pi(a)) = phi(J pi(a)^dag J) = tr(D_phi a)
    a = rand_matrix(rng, d)
    assert np.isclose(phi(sf.right_rep(a.conj().T)), np.trace(phi_d @ a))
    assert np.isclose(psi(sf.l2.pi_of(a)), np.trace(psi_d @ a))
    sd = spatial_derivative(psi, gns(sf.right_algebra, phi)).matrix
    delta = relative_modular(psi_d, phi_d, sf)
    assert np.linalg.norm(sd - delta) <= 1e-8 * np.linalg.norm(delta)


@given(seeds, st.sampled_from(["diagonal", "block", "factor"]))
@settings(max_examples=25, deadline=None)
def test_subalgebra_projection_mechanism(seed, pattern):
    rng = np.random.default_rng(seed)
    a = full_algebra(4)
    b = random_subalgebra(4, pattern, rng)
    w = functional_from_density(a, rand_density(rng, 4))
    g_a, g_b = gns(a, w), gns(b, restrict_functional(w, b))
    p = gns_subspace_projection(g_a, b)
    v = inclusion_isometry(g_a, g_b)
    assert np.linalg.norm(v.conj().T @ v - np.eye(b.dim)) <= 1e-9
    assert np.linalg.norm(v @ v.conj().T - p) <= 1e-9
    xi = rand_vec(rng, 4)
    r_a, r_b = r_op(g_a, xi), r_op(g_b, xi)
    assert np.linalg.norm(r_a @ v - r_b) <= 1e-10 * max(1, np.linalg.norm(r_a))
    assert np.linalg.norm(r_a @ p - r_b @ v.conj().T) <= 1e-10 * max(1, np.linalg.norm(r_a))
    ok, margin = loewner_leq(r_a @ p @ r_a.conj().T, r_a @ r_a.conj().T)
    assert ok
    assert margin >= -1e-9 * max(1, np.linalg.norm(r_a, 2) ** 2)


def test_gns_serialization(rng):
    a = random_subalgebra(4, "block", rng)
    g = gns(a, functional_from_density(a, rand_density(rng, 4)))
    doc = json.loads(json.dumps(g.to_dict()))
    assert doc["faithful"] is True
    assert len(doc["pi"]) == a.dim
    assert doc["eta"]["rows"] == g.l2_dim
