"""Shared constructions for the test suite."""

import numpy as np

from moebius_modules.moebius import positive_element, unitary_element
from moebius_modules.numerics import op_norm
from moebius_modules.projective import TwoByTwoA, gc_from
from moebius_modules.sampling import (
    complex_gaussian,
    random_hermitian,
    random_invertible,
    random_selfadjoint_involution,
    random_unitary,
)
from moebius_modules.star_algebra import StarAlgebra, full_matrix_algebra

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def kron_algebra(left, right_dim):
    """``left (x) 1`` acting on ``C^n (x) C^right_dim``."""
    mats = [np.kron(B, np.eye(right_dim)) for B in left.basis]
    return StarAlgebra.from_spanning(mats)


def block_diag_algebra(*algs):
    n = sum(a.ambient_dim for a in algs)
    mats, off = [], 0
    for a in algs:
        for B in a.basis:
            M = np.zeros((n, n), dtype=complex)
            M[off:off + a.ambient_dim, off:off + a.ambient_dim] = B
            mats.append(M)
        off += a.ambient_dim
    return StarAlgebra.from_spanning(mats)


def random_contraction(rng, n, norm=0.7):
    h = random_hermitian(rng, n)
    return norm * h / op_norm(h)


def random_moebius(rng, n, norm=0.7):
    """``diag(u, u) g_m`` with ``|m| = norm``."""
    return unitary_element(random_unitary(rng, n)) @ positive_element(random_contraction(rng, n, norm))


def random_in_G(rng, n):
    """Random ``[[a, b], [b, a]]`` with ``a +- b`` invertible."""
    x, y = random_invertible(rng, n), random_invertible(rng, n)
    return TwoByTwoA.special(0.5 * (x + y), 0.5 * (x - y))


def random_gc(rng, n):
    alpha = complex(*rng.normal(size=2))
    return gc_from(random_invertible(rng, n), alpha)


def random_commuting_with(rng, f, scale=1.0):
    """Random pair ``(a, b)`` in the commutant of the involution ``f``."""
    n = f.shape[0]
    P = 0.5 * (np.eye(n) + f)
    Q = np.eye(n) - P

    def one():
        X = complex_gaussian(rng, (n, n))
        return P @ X @ P + Q @ X @ Q

    return scale * one() + 3 * np.eye(n), scale * one()


def matrix_units(n):
    out = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1
            out.append(E)
    return out


def odd_fixture(rng):
    """``pi = M_2 (x) 1`` on ``C^2 (x) C^2``: commutant ``1 (x) M_2``; random ``F``."""
    from moebius_modules.fredholm import FredholmModule

    pi = tuple(np.kron(E, np.eye(2)) for E in matrix_units(2))
    F = random_selfadjoint_involution(rng, 4, rank=2)
    return FredholmModule(pi, F)


def even_fixture(rng):
    """``pi = M_2 (x) 1 (x) 1`` on ``C^8`` with grading ``1 (x) 1 (x) sz``."""
    from moebius_modules.fredholm import FredholmModule

    pi = tuple(np.kron(np.kron(E, np.eye(2)), np.eye(2)) for E in matrix_units(2))
    gamma = np.kron(np.eye(4), SZ)
    V = random_unitary(rng, 4)
    # off-diagonal in the grading: |+><-| (x) V* + |-><+| (x) V, written in the tensor order
    up = np.array([[0, 1], [0, 0]], dtype=complex)
    F = np.kron(V.conj().T, up) + np.kron(V, up.T)
    return FredholmModule(pi, F, gamma)


def commutant_moebius(rng, fm, norm=0.6):
    """Random element of the Moebius group of ``fm.pi'``; even ``a``, odd ``b`` when graded."""
    from moebius_modules.moebius import omega_param
    from moebius_modules.star_algebra import commutant_of

    comm = commutant_of(fm.pi)
    h = comm.random_hermitian(rng)
    if fm.gamma is not None:
        g = fm.gamma
        w = 0.5 * (h - g @ h @ g)
        k = 0.5 * (h + g @ h @ g)
    else:
        w, k = h, h
    w = norm * w / max(op_norm(w), 1e-12)
    U = unitary_from_hermitian(k)
    return unitary_element(U) @ omega_param(w)


def unitary_from_hermitian(h):
    w, V = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (V * np.exp(1j * w)) @ V.conj().T


def synthetic_polarized(rng, dim, n_gammas=2, norm=0.6, similarity=True):
    """Polarized module of dimension ``dim`` with planted compatible involutions.

    Returns ``(P, gammas, ms)`` with ``gammas[i] = (1 + ms[i]) gammas[0] (1 + ms[i])^{-1}``
    (``ms[0] = 0``).  The representation is ``M_2 (x) 1`` on each grading block.
    """
    from moebius_modules.polarized import PolarizedModule

    k = dim // 2
    mult = k // 2
    rho = [np.kron(E, np.eye(mult)) for E in matrix_units(2)]
    pi = [np.kron(np.eye(2), r) for r in rho]
    g0 = np.diag(np.r_[np.ones(k), -np.ones(k)]).astype(complex)
    U = random_unitary(rng, k)
    E = np.vstack([np.eye(k), U]) / np.sqrt(2)
    ms = [np.zeros((dim, dim), dtype=complex)]
    for _ in range(n_gammas - 1):
        X = np.kron(np.eye(2), complex_gaussian(rng, (mult, mult)))
        X = norm * rng.uniform(0.3, 1.0) * X / op_norm(X)
        m = np.zeros((dim, dim), dtype=complex)
        m[:k, k:] = X
        m[k:, :k] = X.conj().T
        ms.append(m)
    one = np.eye(dim)
    gammas = [(one + m) @ g0 @ np.linalg.inv(one + m) for m in ms]
    S = g0
    if similarity:
        T = random_invertible(rng, dim, 0.5, 2.0)
        Ti = np.linalg.inv(T)
        S = Ti.conj().T @ S @ Ti
        E = T @ E
        pi = [T @ p @ Ti for p in pi]
        gammas = [T @ g @ Ti for g in gammas]
        ms = [T @ m @ Ti for m in ms]
    return PolarizedModule(S, tuple(pi), E), gammas, ms


def random_conformal_coeffs(rng, lmax_phi=3, amplitude=1.0):
    """Coefficients ``[[l, m, re, im], ...]`` of a real band-limited ``phi`` with ``max |phi| <= amplitude``."""
    from moebius_modules.sphere_geometry import _band_limited

    coeffs = [[l, m, *rng.normal(size=2)] for l in range(lmax_phi + 1) for m in range(-l, l + 1)]
    th = np.linspace(0.01, np.pi - 0.01, 60)
    TH, PH = np.meshgrid(th, np.linspace(0, 2 * np.pi, 120), indexing="ij")
    peak = np.max(np.abs(_band_limited(coeffs, TH.ravel(), PH.ravel())))
    s = amplitude * rng.uniform(0.2, 1.0) / peak
    return [[l, m, re * s, im * s] for l, m, re, im in coeffs]
