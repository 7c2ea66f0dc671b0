import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moebius_modules.errors import NotNormalizable, NotPositive, SchemaError
from moebius_modules.numerics import (
    Frame,
    adjoint,
    hermitian_function,
    involutive_normalize,
    is_hermitian,
    is_involution,
    is_unitary,
    matrix_from_json,
    matrix_to_json,
    op_norm,
    positive_sqrt,
    weighted_adjoint,
)
from moebius_modules.sampling import random_hermitian, random_invertible, random_unitary

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 32)


def test_op_norm_examples():
    assert op_norm(np.eye(3)) == pytest.approx(1.0)
    assert op_norm(np.diag([0.5, -0.25])) == pytest.approx(0.5)
    # singular values of [[0,2],[0,0]] are (2, 0)
    assert op_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0)


def test_positive_sqrt_examples():
    assert np.allclose(positive_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(positive_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    R = positive_sqrt(np.array([[2.0, 1.0], [1.0, 2.0]]))
    u, v = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    assert np.allclose(R @ u, np.sqrt(3) * u)
    assert np.allclose(R @ v, v)


def test_positive_sqrt_rejects_indefinite():
    with pytest.raises(NotPositive):
        positive_sqrt(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositive):
        positive_sqrt(np.zeros((2, 2)))


def test_involutive_normalize_examples():
    F = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(involutive_normalize(F), F)
    assert np.allclose(involutive_normalize(np.array([[1.1]])), [[1.0]])
    assert np.allclose(involutive_normalize(np.diag([1.05, -0.95])), np.diag([1.0, -1.0]))


def test_involutive_normalize_rejects_nilpotent():
    with pytest.raises(NotNormalizable):
        involutive_normalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_weighted_adjoint_example():
    G = np.diag([1.0, 4.0])
    M = np.array([[0.0, 1.0], [0.0, 0.0]])
    # G^{-1} M^H G evaluated entrywise
    assert np.allclose(weighted_adjoint(M, G), [[0, 0], [0.25, 0]])
    assert np.allclose(weighted_adjoint(M, np.eye(2)), M.T)
    H = np.array([[1.0, 2j], [-2j, 3.0]])
    assert np.allclose(weighted_adjoint(H, np.eye(2)), H)


def test_weighted_adjoint_rejects_indefinite_gram():
    with pytest.raises(NotPositive):
        weighted_adjoint(np.eye(2), np.diag([1.0, -1.0]))


@given(seeds, st.integers(1, 8))
def test_weighted_adjoint_defining_property(seed, n):
    rng = np.random.default_rng(seed)
    A = random_invertible(rng, n)
    G = A.conj().T @ A
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    x, y = rng.normal(size=n) + 0j, rng.normal(size=n) + 0j
    lhs = (M @ x).conj() @ G @ y
    rhs = x.conj() @ G @ (weighted_adjoint(M, G) @ y)
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))


@given(seeds, st.integers(1, 8))
def test_weighted_adjoint_reverses_products(seed, n):
    rng = np.random.default_rng(seed)
    A = random_invertible(rng, n)
    G = A.conj().T @ A
    M, N = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(2))
    lhs = weighted_adjoint(M @ N, G)
    rhs = weighted_adjoint(N, G) @ weighted_adjoint(M, G)
    assert op_norm(lhs - rhs) < 1e-8 * max(1.0, op_norm(lhs))


@given(seeds, dims)
def test_positive_sqrt_squares_back(seed, n):
    rng = np.random.default_rng(seed)
    A = random_invertible(rng, n)
    Q = A.conj().T @ A
    R = positive_sqrt(Q)
    assert op_norm(R @ R - Q) <= 10 * 1e-9 * op_norm(Q)
    assert is_hermitian(R)
    assert np.linalg.eigvalsh(R).min() > 0


@given(seeds, dims)
def test_involutive_normalize_squares_to_identity(seed, n):
    rng = np.random.default_rng(seed)
    # K^2 has spectrum in [0.5, 1.5]
    signs = rng.choice([-1.0, 1.0], size=n)
    mags = np.sqrt(rng.uniform(0.5, 1.5, size=n))
    U = random_unitary(rng, n)
    K = U @ np.diag(signs * mags) @ U.conj().T
    g = involutive_normalize(K)
    assert op_norm(g @ g - np.eye(n)) <= 10 * 1e-9
    C = U @ np.diag(rng.normal(size=n)) @ U.conj().T
    assert op_norm(g @ C - C @ g) < 1e-8 * max(1.0, op_norm(C))


def test_hermitian_function_weighted():
    G = np.diag([1.0, 4.0])
    H = np.array([[2.0, 1.0], [0.25, 2.0]])  # G-self-adjoint
    assert is_hermitian(H, gram=G)
    R, w = hermitian_function(H, np.sqrt, G)
    assert np.allclose(R @ R, H)
    assert np.allclose(w, [1.5, 2.5])


def test_predicates(rng):
    U = random_unitary(rng, 4)
    assert is_unitary(U)
    assert not is_unitary(2 * U)
    F = U @ np.diag([1, 1, -1, -1]) @ U.conj().T
    assert is_involution(F) and is_hermitian(F)
    assert not is_involution(2 * F)
    H = random_hermitian(rng, 3)
    assert np.allclose(adjoint(H), H)


def test_frame_norm_matches_weighted_norm(rng):
    A = random_invertible(rng, 3)
    G = A.conj().T @ A
    M = rng.normal(size=(3, 3))
    fr = Frame(G)
    assert fr.norm(M) == pytest.approx(op_norm(M, G))
    assert np.allclose(fr.adj(M), weighted_adjoint(M, G))


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_matrix_json_round_trip_is_exact(seed, r, c):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(M))))
    assert np.array_equal(back, M)


def test_matrix_json_rejects_bad_shapes():
    with pytest.raises(SchemaError):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(SchemaError):
        matrix_from_json({"rows": 1, "cols": 1})
