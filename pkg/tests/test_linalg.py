import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spatialssa.linalg import (
    DimensionError,
    NotHermitianError,
    NotPSDError,
    RankDeficientError,
    Tolerance,
    embed,
    herm_eig,
    herm_power,
    kron,
    loewner_leq,
    matrix_from_dict,
    matrix_to_dict,
    partial_trace,
)

from conftest import rand_density, rand_herm, rand_matrix

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

seeds = st.integers(0, 2**32 - 1)


def brute_partial_trace(x, dims, keep):
    """Loop-over-indices oracle."""
    n = len(dims)
    idx = list(np.ndindex(*dims))
    kept = [i for i in range(n) if i in keep]
    dk = int(np.prod([dims[i] for i in kept]))
    out = np.zeros((dk, dk), dtype=complex)

    def flat(multi, which):
        f = 0
        for i in which:
            f = f * dims[i] + multi[i]
        return f

    for r, ri in enumerate(idx):
        for c, ci in enumerate(idx):
            if all(ri[i] == ci[i] for i in range(n) if i not in keep):
                out[flat(ri, kept), flat(ci, kept)] += x[r, c]
    return out


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))


def test_kron_entrywise_expansion():
    k = kron(SX, SZ)
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            expected[2 * i:2 * i + 2, 2 * j:2 * j + 2] = SX[i, j] * SZ
    assert np.array_equal(k, expected)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, c = rand_matrix(rng, 2, 3), rand_matrix(rng, 3, 2)
    b, d = rand_matrix(rng, 3, 2), rand_matrix(rng, 2, 4)
    lhs = kron(a, b) @ kron(c, d)
    rhs = kron(a @ c, b @ d)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_kron_associative(rng):
    a, b, c = rand_matrix(rng, 2), rand_matrix(rng, 3), rand_matrix(rng, 2)
    assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), rtol=0, atol=1e-13)


def test_partial_trace_examples(rng):
    omega = np.eye(2).reshape(-1)
    assert np.allclose(partial_trace(np.outer(omega, omega), (2, 2), [0]), np.eye(2))
    rho_a, rho_b = rand_density(rng, 2), rand_density(rng, 2)
    assert np.allclose(partial_trace(kron(rho_a, rho_b), (2, 2), [0]), rho_a, atol=1e-14)
    x = rand_density(rng, 4) * 3.7
    assert abs(np.trace(partial_trace(x, (2, 2), [0])) - np.trace(x)) <= 1e-12 * abs(np.trace(x))


@pytest.mark.parametrize("dims,keep", [((2, 3), [0]), ((2, 3), [1]), ((2, 3, 2), [0, 2]),
                                       ((3, 2, 2), [1]), ((2, 2, 3), [1, 2]), ((2, 3, 2), [0, 1, 2])])
def test_partial_trace_matches_brute_force(rng, dims, keep):
    d = int(np.prod(dims))
    x = rand_matrix(rng, d)
    assert np.allclose(partial_trace(x, dims, keep), brute_partial_trace(x, dims, keep), atol=1e-12)


def test_partial_trace_all_factors_is_trace(rng):
    x = rand_matrix(rng, 6)
    assert np.isclose(partial_trace(x, (2, 3), [])[0, 0], np.trace(x))


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_partial_trace_of_product(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_matrix(rng, 3), rand_matrix(rng, 2)
    out = partial_trace(kron(a, b), (3, 2), [0])
    ref = a * np.trace(b)
    assert np.linalg.norm(out - ref) <= 1e-10 * max(1.0, np.linalg.norm(ref))


def test_partial_trace_dimension_error():
    with pytest.raises(DimensionError, match="require a 6x6"):
        partial_trace(np.eye(4), (2, 3), [0])


def test_embed_matches_kron(rng):
    a = rand_matrix(rng, 3)
    assert np.allclose(embed(a, (2, 3, 2), [1]), kron(kron(np.eye(2), a), np.eye(2)))
    b = rand_matrix(rng, 4)
    # b on factors 0 and 2 of (2, 3, 2): compare via brute-force matrix elements
    e = embed(b, (2, 3, 2), [0, 2])
    for r, (i, j, k) in enumerate(np.ndindex(2, 3, 2)):
        for c, (i2, j2, k2) in enumerate(np.ndindex(2, 3, 2)):
            want = b[2 * i + k, 2 * i2 + k2] if j == j2 else 0
            assert np.isclose(e[r, c], want)


def test_herm_eig_examples():
    eig = herm_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(eig.values, [1, 2, 3])
    assert np.allclose(np.abs(eig.vectors), np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]]))
    assert np.allclose(herm_eig(SX).values, [-1, 1])


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_herm_eig_reconstruction(seed):
    rng = np.random.default_rng(seed)
    m = rand_herm(rng, 6)
    eig = herm_eig(m)
    u = eig.vectors
    assert np.all(np.diff(eig.values) >= 0)
    assert np.linalg.norm(u @ np.diag(eig.values) @ u.conj().T - m) <= 1e-10 * (1 + np.linalg.norm(m))
    assert np.linalg.norm(u.conj().T @ u - np.eye(6)) <= 1e-10


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError, match="max"):
        herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


def test_loewner_examples(rng):
    assert loewner_leq(np.zeros((2, 2)), np.eye(2)) == (True, 1.0)
    ok, margin = loewner_leq(np.diag([2.0, 0.0]), np.diag([1.0, 1.0]))
    assert not ok and np.isclose(margin, -1.0)
    with pytest.raises(DimensionError):
        loewner_leq(np.eye(2), np.eye(3))


@given(seeds, st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_loewner_projection_compression(seed, rank):
    # A P A^dag <= A A^dag for any operator A and projection P
    rng = np.random.default_rng(seed)
    a = rand_matrix(rng, 5)
    q, _ = np.linalg.qr(rand_matrix(rng, 5, rank))
    p = q @ q.conj().T
    ok, _ = loewner_leq(a @ p @ a.conj().T, a @ a.conj().T)
    assert ok


def test_herm_power_examples(rng):
    assert np.allclose(herm_power(np.eye(3), -0.5), np.eye(3))
    assert np.allclose(herm_power(np.diag([4.0, 9.0]), 0.5), np.diag([2, 3]))
    s = rand_density(rng, 5)
    r = herm_power(s, -0.5)
    assert np.linalg.norm(r @ s @ r - np.eye(5)) <= 1e-9


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_herm_power_roundtrips(seed):
    rng = np.random.default_rng(seed)
    m = rand_density(rng, 4, rank=int(rng.integers(1, 5)))
    root = herm_power(m, 0.5)
    assert np.linalg.norm(root @ root - m) <= 1e-10 * np.linalg.norm(m)
    assert np.linalg.norm(herm_power(m, 1) - m) <= 1e-10 * np.linalg.norm(m)


def test_herm_power_errors():
    with pytest.raises(RankDeficientError, match="eigenvalue"):
        herm_power(np.diag([1.0, 0.0]), -1)
    with pytest.raises(NotPSDError):
        herm_power(np.diag([1.0, -0.5]), 0.5)


def test_tolerance_validation():
    assert Tolerance().atol == 1e-9 and Tolerance().rtol == 1e-9
    with pytest.raises(ValueError):
        Tolerance(atol=-1)
    with pytest.raises(ValueError):
        Tolerance(rtol=float("nan"))


def test_matrix_serialization_exact_roundtrip(rng):
    m = rand_matrix(rng, 3, 4) * 1e-7 + np.pi
    doc = json.loads(json.dumps(matrix_to_dict(m)))
    assert doc["rows"] == 3 and doc["cols"] == 4
    assert np.array_equal(matrix_from_dict(doc), m)


def test_matrix_serialization_size_check():
    with pytest.raises(DimensionError):
        matrix_from_dict({"rows": 2, "cols": 2, "re": [0.0], "im": [0.0]})
