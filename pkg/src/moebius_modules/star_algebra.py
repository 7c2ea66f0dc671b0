"""Finite-dimensional matrix *-algebras given by spanning bases.

An algebra is stored as an orthonormal basis (Frobenius inner product) of its
span inside ``M_n``; membership is decided by the residual of the orthogonal
projection onto that span.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoGrading
from .numerics import DEFAULT_TOL, adjoint, identity, op_norm
from .report import Report
from .sampling import complex_gaussian

__all__ = [
    "StarAlgebra",
    "center",
    "commutant",
    "commutant_of",
    "full_matrix_algebra",
    "generate_algebra",
    "parity_split",
    "span_basis",
]

# stacked-SVD nullspace is used below this many matrix entries, Gram eigh above
_SVD_LIMIT = 4_000_000


def span_basis(mats, tol=DEFAULT_TOL):
    """Orthonormal basis (rows, vectorized) of the span of ``mats``."""
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    if not mats:
        return np.zeros((0, 0), dtype=np.complex128)
    A = np.stack([m.ravel() for m in mats])
    _, s, Vh = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, A.shape[1]), dtype=np.complex128)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return Vh[:rank]


def _nullspace(blocks, ncols, tol):
    """Orthonormal basis (rows) of the common kernel of the stacked ``blocks``."""
    if not blocks:
        return identity(ncols)
    rows = sum(b.shape[0] for b in blocks)
    if rows * ncols <= _SVD_LIMIT:
        C = np.vstack(blocks)
        _, s, Vh = np.linalg.svd(C, full_matrices=True)
        smax = s[0] if s.size else 0.0
        rank = int(np.sum(s > tol * max(1.0, smax)))
        return Vh[rank:].conj()
    L = sum(b.conj().T @ b for b in blocks)
    w, V = np.linalg.eigh(L)
    # eigenvalues of the normal equations carry ~eps*|L| absolute noise
    cut = max(tol**2, 1e-13) * max(1.0, w[-1])
    return V[:, w <= cut].T


@dataclass(frozen=True, eq=False)
class StarAlgebra:
    """A *-subalgebra of ``M_n``.

    ``basis`` has shape ``(k, n, n)`` and is orthonormal for the Frobenius
    inner product.  ``gram`` (optional) is the Hilbert-space inner product
    defining the *-operation; ``grading`` is an optional involution whose
    conjugation action grades the algebra.
    """

    ambient_dim: int
    basis: np.ndarray
    unital: bool = True
    grading: np.ndarray | None = None
    gram: np.ndarray | None = None

    @classmethod
    def from_spanning(cls, mats, *, unital=True, grading=None, gram=None, tol=DEFAULT_TOL,
                      verify=True):
        mats = [np.asarray(m, dtype=np.complex128) for m in mats]
        n = mats[0].shape[0]
        if unital:
            mats = [identity(n)] + mats
        rows = span_basis(mats, tol)
        alg = cls(n, rows.reshape(-1, n, n), unital, grading, gram)
        if verify:
            report = alg.validate(tol)
            if not report.passed:
                raise ValueError(f"span is not a *-algebra: {report.failures()}")
        return alg

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def vectors(self):
        return self.basis.reshape(self.dim, -1)

    def coefficients(self, X):
        return self.vectors.conj() @ np.asarray(X, dtype=np.complex128).ravel()

    def project(self, X):
        n = self.ambient_dim
        return (self.coefficients(X) @ self.vectors).reshape(n, n)

    def residual(self, X):
        """Relative distance of ``X`` from the span."""
        X = np.asarray(X, dtype=np.complex128)
        return float(np.linalg.norm(X - self.project(X)) / max(1.0, np.linalg.norm(X)))

    def contains(self, X, tol=DEFAULT_TOL):
        return self.residual(X) <= tol

    def element(self, coeffs):
        n = self.ambient_dim
        return (np.asarray(coeffs, dtype=np.complex128) @ self.vectors).reshape(n, n)

    def random_element(self, rng):
        return self.element(complex_gaussian(rng, self.dim))

    def random_hermitian(self, rng):
        X = self.random_element(rng)
        return 0.5 * (X + adjoint(X, self.gram))

    def adjoint(self, X):
        return adjoint(X, self.gram)

    def validate(self, tol=DEFAULT_TOL):
        """Closure residuals: products, adjoints, unit, grading."""
        report = Report()
        prod = max((self.residual(a @ b) for a in self.basis for b in self.basis), default=0.0)
        report.add("product_closure", prod, tol)
        adj = max((self.residual(self.adjoint(a)) for a in self.basis), default=0.0)
        report.add("adjoint_closure", adj, tol)
        if self.unital:
            report.add("unit", self.residual(identity(self.ambient_dim)), tol)
        if self.grading is not None:
            g = self.grading
            report.add("grading_involution", op_norm(g @ g - identity(self.ambient_dim)), tol)
            par = max((self.residual(g @ a @ g) for a in self.basis), default=0.0)
            report.add("grading_preserves_span", par, tol)
        report.note("dim", self.dim)
        return report


def full_matrix_algebra(n, grading=None, gram=None):
    basis = np.eye(n * n, dtype=np.complex128).reshape(n * n, n, n)
    return StarAlgebra(n, basis, True, grading, gram)


def generate_algebra(ambient_dim, generators, with_adjoints=True, tol=DEFAULT_TOL,
                     grading=None, gram=None):
    """Smallest unital algebra containing ``generators`` (and their adjoints).

    Words are grown one letter at a time until the span stops growing; the
    dimension is capped at ``ambient_dim**2``.
    """
    n = ambient_dim
    gens = [np.asarray(g, dtype=np.complex128) for g in generators]
    if with_adjoints:
        gens = gens + [adjoint(g, gram) for g in gens]
    rows = span_basis([identity(n)] + gens, tol)
    while rows.shape[0] < n * n:
        current = rows.reshape(-1, n, n)
        words = [b @ g for b in current for g in gens]
        grown = span_basis(list(current) + words, tol)
        if grown.shape[0] == rows.shape[0]:
            break
        rows = grown
    return StarAlgebra(n, rows.reshape(-1, n, n), True, grading, gram)


def _commutation_blocks(mats):
    n = mats[0].shape[0]
    eye = identity(n)
    # row-major vec: vec(XB) = (I kron B^T) vec X,  vec(BX) = (B kron I) vec X
    return [np.kron(eye, B.T) - np.kron(B, eye) for B in mats]


def commutant(alg, tol=DEFAULT_TOL):
    """``{x : [x, b] = 0 for every b in alg}`` as a :class:`StarAlgebra`."""
    n = alg.ambient_dim
    mats = [b for b in alg.basis]
    null = _nullspace(_commutation_blocks(mats), n * n, tol) if mats else identity(n * n)
    rows = span_basis(list(null.reshape(-1, n, n)), tol)
    return StarAlgebra(n, rows.reshape(-1, n, n), True, alg.grading, alg.gram)


def commutant_of(mats, tol=DEFAULT_TOL, grading=None, gram=None):
    """Commutant of an arbitrary finite set of operators (no closure assumed)."""
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    n = mats[0].shape[0]
    null = _nullspace(_commutation_blocks(mats), n * n, tol)
    rows = span_basis(list(null.reshape(-1, n, n)), tol)
    return StarAlgebra(n, rows.reshape(-1, n, n), True, grading, gram)


def center(alg, tol=DEFAULT_TOL):
    """``alg`` intersected with its commutant."""
    k, n = alg.dim, alg.ambient_dim
    B = alg.basis
    # column l of block j is vec([B_l, B_j])
    blocks = [np.stack([(B[l] @ B[j] - B[j] @ B[l]).ravel() for l in range(k)], axis=1)
              for j in range(k)]
    null = _nullspace(blocks, k, tol)
    mats = [alg.element(c) for c in null]
    rows = span_basis(mats, tol) if mats else np.zeros((0, n * n), dtype=np.complex128)
    return StarAlgebra(n, rows.reshape(-1, n, n), alg.unital, alg.grading, alg.gram)


def parity_split(alg, x):
    """Split ``x`` into even and odd parts w.r.t. conjugation by the grading."""
    if alg.grading is None:
        raise NoGrading("algebra has no grading")
    return _parity(alg.grading, x)


def _parity(g, x):
    x = np.asarray(x, dtype=np.complex128)
    conj = g @ x @ g
    even = 0.5 * (x + conj)
    return even, x - even
