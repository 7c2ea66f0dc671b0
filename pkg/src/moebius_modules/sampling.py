"""Seeded random operators for property suites.

All samplers take a ``numpy.random.Generator`` so runs are reproducible.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "complex_gaussian",
    "random_hermitian",
    "random_invertible",
    "random_involution",
    "random_selfadjoint_involution",
    "random_unitary",
]


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_unitary(rng, n):
    """Haar-distributed unitary via QR with phase correction."""
    Z = complex_gaussian(rng, (n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Q * (d / np.abs(d))


def random_hermitian(rng, n, scale=1.0):
    Z = complex_gaussian(rng, (n, n))
    return scale * 0.5 * (Z + Z.conj().T)


def random_invertible(rng, n, smin=0.25, smax=4.0):
    """Invertible matrix with singular values drawn log-uniformly from [smin, smax]."""
    s = np.exp(rng.uniform(np.log(smin), np.log(smax), size=n))
    return (random_unitary(rng, n) * s) @ random_unitary(rng, n)


def random_selfadjoint_involution(rng, n, rank=None):
    """``U diag(+-1) U^H``; ``rank`` fixes the number of +1 eigenvalues."""
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    signs = np.array([1.0] * rank + [-1.0] * (n - rank))
    U = random_unitary(rng, n)
    return (U * signs) @ U.conj().T


def random_involution(rng, n, rank=None):
    """Not necessarily self-adjoint involution ``T diag(+-1) T^{-1}``."""
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    signs = np.array([1.0] * rank + [-1.0] * (n - rank))
    T = random_invertible(rng, n, 0.5, 2.0)
    return (T * signs) @ np.linalg.inv(T)
