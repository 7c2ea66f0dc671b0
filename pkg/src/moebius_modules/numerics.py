"""Dense complex linear algebra used throughout the package.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Several routines
accept an optional ``gram`` matrix ``G``; in that case adjoints, norms and
functional calculus are taken with respect to the inner product
``(x, y)_G = x^H G y`` instead of the Euclidean one.
"""

from __future__ import annotations

import numpy as np

from .errors import NotNormalizable, NotPositive, SchemaError, Singular

__all__ = [
    "DEFAULT_TOL",
    "Frame",
    "SPHERE_TOL",
    "adjoint",
    "anticommutator",
    "as_cmat",
    "commutator",
    "gram_sqrt",
    "hermitian_function",
    "identity",
    "involutive_normalize",
    "inv",
    "is_hermitian",
    "is_invertible",
    "is_involution",
    "is_unitary",
    "matrix_from_json",
    "matrix_to_json",
    "op_norm",
    "positive_sqrt",
    "weighted_adjoint",
]

DEFAULT_TOL = 1e-9
SPHERE_TOL = 1e-6


def as_cmat(M, name="matrix"):
    """Return ``M`` as a finite 2-d complex array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def identity(n):
    return np.eye(n, dtype=np.complex128)


def commutator(A, B):
    return A @ B - B @ A


def anticommutator(A, B):
    return A @ B + B @ A


def op_norm(M, gram=None):
    """Spectral norm; with ``gram`` the operator norm induced by ``(.,.)_G``."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    if gram is None:
        return float(np.linalg.norm(M, 2))
    half, half_inv = gram_sqrt(gram)
    return float(np.linalg.norm(half @ M @ half_inv, 2))


def gram_sqrt(G):
    """Return ``(G^{1/2}, G^{-1/2})`` for a hermitian positive definite ``G``."""
    G = np.asarray(G, dtype=np.complex128)
    Gh = 0.5 * (G + G.conj().T)
    if np.linalg.norm(G - Gh, 2) > 1e-9 * max(1.0, np.linalg.norm(G, 2)):
        raise NotPositive("Gram matrix is not hermitian")
    w, V = np.linalg.eigh(Gh)
    if w[0] <= 0.0:
        raise NotPositive(f"Gram matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    s = np.sqrt(w)
    return (V * s) @ V.conj().T, (V / s) @ V.conj().T


def weighted_adjoint(M, G):
    """Adjoint of ``M`` for the inner product ``(x, y) = x^H G y``: ``G^{-1} M^H G``."""
    gram_sqrt(G)  # positivity check
    G = np.asarray(G, dtype=np.complex128)
    return np.linalg.solve(G, np.asarray(M).conj().T @ G)


def adjoint(M, gram=None):
    M = np.asarray(M, dtype=np.complex128)
    if gram is None:
        return M.conj().T
    return weighted_adjoint(M, gram)


class Frame:
    """Caches ``G^{1/2}`` so repeated weighted norms and adjoints are cheap."""

    def __init__(self, gram=None):
        self.gram = None if gram is None else np.asarray(gram, dtype=np.complex128)
        if self.gram is None:
            self.half = self.half_inv = None
        else:
            self.half, self.half_inv = gram_sqrt(self.gram)

    def to_orthonormal(self, M):
        M = np.asarray(M, dtype=np.complex128)
        return M if self.half is None else self.half @ M @ self.half_inv

    def norm(self, M):
        M = np.asarray(M, dtype=np.complex128)
        return float(np.linalg.norm(self.to_orthonormal(M), 2)) if M.size else 0.0

    def adj(self, M):
        M = np.asarray(M, dtype=np.complex128)
        if self.half is None:
            return M.conj().T
        # G^{-1} M^H G written through the cached square roots
        Gi = self.half_inv @ self.half_inv
        return Gi @ M.conj().T @ self.gram


def is_invertible(M, tol=DEFAULT_TOL):
    """Scale-invariant test: smallest singular value above ``tol`` times the largest."""
    s = np.linalg.svd(np.asarray(M), compute_uv=False)
    return bool(s.size and s[0] > 0 and s[-1] > tol * s[0])


def inv(M, tol=DEFAULT_TOL, what="operator"):
    if not is_invertible(M, tol):
        raise Singular(f"{what} is not invertible")
    return np.linalg.inv(M)


def _scale(M):
    return max(1.0, op_norm(M))


def is_hermitian(M, tol=DEFAULT_TOL, gram=None):
    M = np.asarray(M, dtype=np.complex128)
    return op_norm(M - adjoint(M, gram)) <= tol * _scale(M)


def is_unitary(M, tol=DEFAULT_TOL, gram=None):
    M = np.asarray(M, dtype=np.complex128)
    n = M.shape[0]
    return op_norm(adjoint(M, gram) @ M - identity(n)) <= tol * _scale(M) ** 2


def is_involution(M, tol=DEFAULT_TOL):
    M = np.asarray(M, dtype=np.complex128)
    return op_norm(M @ M - identity(M.shape[0])) <= tol * _scale(M) ** 2


def hermitian_function(H, fn, gram=None):
    """Apply ``fn`` to an operator self-adjoint w.r.t. ``gram`` (Euclidean if None).

    Returns ``(fn(H), eigenvalues)``.  The input is symmetrized in the
    weighted frame before diagonalization, so small non-hermitian noise is
    discarded; callers check hermiticity themselves when it matters.
    """
    H = np.asarray(H, dtype=np.complex128)
    if gram is None:
        Ht = H
    else:
        half, half_inv = gram_sqrt(gram)
        Ht = half @ H @ half_inv
    Ht = 0.5 * (Ht + Ht.conj().T)
    w, U = np.linalg.eigh(Ht)
    out = (U * fn(w)) @ U.conj().T
    if gram is not None:
        out = half_inv @ out @ half
    return out, w


def positive_sqrt(Q, tol=DEFAULT_TOL, gram=None):
    """Positive square root of a (``gram``-)hermitian positive operator."""
    Q = as_cmat(Q, "Q")
    if not is_hermitian(Q, max(tol, 1e-12), gram):
        raise NotPositive("operator is not hermitian")
    R, w = hermitian_function(Q, lambda e: np.sqrt(np.clip(e, 0.0, None)), gram)
    if w[0] <= tol:
        raise NotPositive(f"minimum eigenvalue {w[0]:.3e} is not above {tol:.1e}")
    return R


def involutive_normalize(K, tol=DEFAULT_TOL, gram=None):
    """Repair an almost-involution: ``K (K^2)^{-1/2}``.

    ``K^2`` must be hermitian positive w.r.t. ``gram``.  The result squares to
    the identity and commutes with every operator commuting with ``K``.
    """
    K = as_cmat(K, "K")
    K2 = K @ K
    if op_norm(K2 - adjoint(K2, gram)) > tol * _scale(K2):
        raise NotNormalizable("K^2 is not hermitian")
    root_inv, w = hermitian_function(K2, lambda e: 1.0 / np.sqrt(np.clip(e, tol, None)), gram)
    if w[0] <= tol:
        raise NotNormalizable(f"K^2 is not positive (min eigenvalue {w[0]:.3e})")
    return K @ root_inv


def matrix_to_json(M):
    """Encode a matrix as ``{"rows", "cols", "data": [[re, im], ...]}`` (row-major)."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        A = A.reshape(1, -1) if A.ndim < 2 else A
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj):
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed matrix object: {exc}") from None
    if len(data) != rows * cols:
        raise SchemaError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in data], dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"malformed matrix entry: {exc}") from None
    if not np.all(np.isfinite(flat)):
        raise SchemaError("matrix has non-finite entries")
    return flat.reshape(rows, cols)
