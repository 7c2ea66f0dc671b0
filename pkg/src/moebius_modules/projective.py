"""The projective line over a matrix algebra and the groups acting on it.

Points are pairs ``(a, b)`` modulo right multiplication by invertible
elements; ``2 x 2`` block matrices act on the left.  Involutions ``f`` are
finite points ``(f, 1)``, on which ``[[a, b], [c, d]]`` acts by
``f -> (a f + b)(c f + d)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotFinite, NotInG, NotInvolution, Singular, ZeroAlpha
from .numerics import (
    DEFAULT_TOL,
    adjoint,
    as_cmat,
    commutator,
    hermitian_function,
    identity,
    inv,
    is_invertible,
    op_norm,
)
from .report import Report
from .star_algebra import center, full_matrix_algebra

__all__ = [
    "ProjPoint",
    "TwoByTwoA",
    "act_on_involution",
    "commutation_identities",
    "finite_point",
    "g_inverse",
    "gc_from",
    "gc_sample_check",
    "in_G",
    "in_GC_schur",
    "is_even",
    "kernel_N_check",
    "proj_equiv",
    "sample_involution",
    "sample_selfadjoint_involution",
    "schur_identities",
]


@dataclass(frozen=True, eq=False)
class ProjPoint:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_cmat(self.a, "a"))
        object.__setattr__(self, "b", as_cmat(self.b, "b"))


@dataclass(frozen=True, eq=False)
class TwoByTwoA:
    """Block matrix ``[[a, b], [c, d]]`` with entries in a matrix algebra."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, as_cmat(getattr(self, name), name))

    @classmethod
    def special(cls, a, b):
        """``[[a, b], [b, a]]``."""
        return cls(a, b, b, a)

    @classmethod
    def scalar(cls, z):
        z = as_cmat(z)
        zero = np.zeros_like(z)
        return cls(z, zero, zero, z)

    @property
    def n(self):
        return self.a.shape[0]

    def block(self):
        return np.block([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other):
        return TwoByTwoA(
            self.a @ other.a + self.b @ other.c,
            self.a @ other.b + self.b @ other.d,
            self.c @ other.a + self.d @ other.c,
            self.c @ other.b + self.d @ other.d,
        )

    def apply(self, p):
        return ProjPoint(self.a @ p.a + self.b @ p.b, self.c @ p.a + self.d @ p.b)


def _right_divide(X, D, tol, what):
    if not is_invertible(D, tol):
        raise Singular(f"{what} is not invertible")
    return np.linalg.solve(D.T, X.T).T


def proj_equiv(p, q, alg=None, tol=DEFAULT_TOL, rng=None):
    """True iff ``p.a = q.a lam`` and ``p.b = q.b lam`` for an invertible ``lam`` in ``alg``.

    ``lam`` is solved for in the coordinates of the algebra basis, so a
    solution outside the algebra never counts.  When the solution is not
    unique, a few random members of the affine solution set are tried for
    invertibility.
    """
    n = p.a.shape[0]
    if alg is None:
        alg = full_matrix_algebra(n)
    cols = [np.concatenate([(q.a @ B).ravel(), (q.b @ B).ravel()]) for B in alg.basis]
    M = np.stack(cols, axis=1)
    rhs = np.concatenate([p.a.ravel(), p.b.ravel()])
    coef, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    scale = max(1.0, np.linalg.norm(rhs))
    if np.linalg.norm(M @ coef - rhs) > tol * scale * max(1.0, np.linalg.norm(coef)):
        return False
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    null = Vh[rank:].conj()
    candidates = [coef]
    if null.shape[0]:
        rng = np.random.default_rng(0) if rng is None else rng
        for _ in range(4):
            w = rng.standard_normal(null.shape[0]) + 1j * rng.standard_normal(null.shape[0])
            candidates.append(coef + w @ null)
    return any(is_invertible(alg.element(c), tol) for c in candidates)


def finite_point(p, tol=DEFAULT_TOL):
    """``a b^{-1}`` for a point with invertible ``b``."""
    if not is_invertible(p.b, tol):
        raise NotFinite("second coordinate is not invertible")
    return np.linalg.solve(p.b.T, p.a.T).T


def kernel_N_check(T, alg, tol=DEFAULT_TOL, centre=None):
    """Membership in the kernel ``N`` of the action on the projective line.

    ``N`` consists of ``diag(a, a)`` with ``a`` central and invertible.
    """
    scale = max(1.0, op_norm(T.a))
    if op_norm(T.b) > tol * scale or op_norm(T.c) > tol * scale:
        return False
    if op_norm(T.d - T.a) > tol * scale:
        return False
    if not is_invertible(T.a, tol):
        return False
    centre = center(alg, tol) if centre is None else centre
    return centre.contains(T.a, tol)


def in_G(T, tol=DEFAULT_TOL):
    scale = max(1.0, op_norm(T.a), op_norm(T.b))
    if op_norm(T.c - T.b) > tol * scale or op_norm(T.d - T.a) > tol * scale:
        return False
    return is_invertible(T.a + T.b, tol) and is_invertible(T.a - T.b, tol)


def g_inverse(T, tol=DEFAULT_TOL):
    """Inverse through the coordinates ``x = a + b``, ``y = a - b``."""
    if not in_G(T, tol):
        raise NotInG("block matrix is not of the form [[a, b], [b, a]] with a+-b invertible")
    xi = np.linalg.inv(T.a + T.b)
    yi = np.linalg.inv(T.a - T.b)
    return TwoByTwoA.special(0.5 * (xi + yi), 0.5 * (xi - yi))


def act_on_involution(T, f, tol=DEFAULT_TOL):
    """Image ``(a f + b)(c f + d)^{-1}`` of the involution ``f``."""
    f = as_cmat(f, "f")
    n = f.shape[0]
    if op_norm(f @ f - identity(n)) > tol * max(1.0, op_norm(f)) ** 2:
        raise NotInvolution("f does not square to the identity")
    return _right_divide(T.a @ f + T.b, T.c @ f + T.d, tol, "c f + d")


def commutation_identities(a, b, f, tol=DEFAULT_TOL, gram=None):
    """Residuals of the four commutators that decide self-adjointness of the image of ``f``.

    ``report.passed`` is the flag: all four norms below threshold.
    """
    a, b, f = as_cmat(a), as_cmat(b), as_cmat(f)
    sa, sb = adjoint(a, gram), adjoint(b, gram)
    thr = tol * max(1.0, op_norm(a), op_norm(b)) ** 2 * max(1.0, op_norm(f))
    report = Report()
    report.add("[a*a-b*b,f]", op_norm(commutator(sa @ a - sb @ b, f)), thr)
    report.add("[a*b-b*a,f]", op_norm(commutator(sa @ b - sb @ a, f)), thr)
    report.add("[aa*-bb*,f]", op_norm(commutator(a @ sa - b @ sb, f)), thr)
    report.add("[ab*-ba*,f]", op_norm(commutator(a @ sb - b @ sa, f)), thr)
    return report


def schur_identities(a, b, tol=DEFAULT_TOL, gram=None):
    """Check that the four Connes-type combinations are real multiples of the identity.

    With ``a*a - b*b = l1``, ``a*b - b*a = i l2``, ``aa* - bb* = l3`` and
    ``ab* - ba* = i l4`` this also checks ``l1 = l3``, ``l2 = -l4`` and that
    ``(l1, l2) != 0``.  Diagnostics carry ``alpha = l1 - i l2``.
    """
    a, b = as_cmat(a), as_cmat(b)
    n = a.shape[0]
    sa, sb = adjoint(a, gram), adjoint(b, gram)
    combos = [sa @ a - sb @ b, (sa @ b - sb @ a) / 1j, a @ sa - b @ sb, (a @ sb - b @ sa) / 1j]
    thr = tol * max(1.0, op_norm(a), op_norm(b)) ** 2
    report = Report()
    lams = []
    for k, C in enumerate(combos, start=1):
        lam = np.trace(C) / n
        report.add(f"scalar_{k}", op_norm(C - lam * identity(n)), thr)
        report.add(f"real_{k}", abs(lam.imag), thr)
        lams.append(lam.real)
    l1, l2, l3, l4 = lams
    report.add("l1=l3", abs(l1 - l3), thr)
    report.add("l2=-l4", abs(l2 + l4), thr)
    report.add("nonzero", thr / max(np.hypot(l1, l2), 1e-300), 1.0)
    report.note("lambdas", [l1, l2, l3, l4])
    report.note("alpha", [l1, -l2])
    return report


def in_GC_schur(T, tol=DEFAULT_TOL, gram=None):
    """Exact membership test for the full-operator-algebra case."""
    return in_G(T, tol) and schur_identities(T.a, T.b, tol, gram).passed


def gc_from(x, alpha, tol=DEFAULT_TOL, gram=None):
    """Element ``(x, alpha (x*)^{-1})`` in the ``(x, y)`` coordinates, as blocks."""
    x = as_cmat(x, "x")
    if alpha == 0:
        raise ZeroAlpha("alpha must be nonzero")
    y = alpha * inv(adjoint(x, gram), tol, "x*")
    return TwoByTwoA.special(0.5 * (x + y), 0.5 * (x - y))


def sample_selfadjoint_involution(alg, rng, odd=False):
    """``sign(h)`` for a random hermitian ``h`` of the algebra (odd part if requested)."""
    h = alg.random_hermitian(rng)
    if odd:
        g = alg.grading
        h = 0.5 * (h - g @ h @ g)
    f, _ = hermitian_function(h, np.sign, alg.gram)
    return f


def sample_involution(alg, rng):
    """Matrix sign of a random element: an involution of the algebra, generally not self-adjoint."""
    return scipy.linalg.signm(alg.random_element(rng))


def gc_sample_check(T, alg, rng, n_samples=50, tol=DEFAULT_TOL):
    """Randomized test of the 'for all involutions' clause.

    Records the worst relative smallest singular value of ``b f + a`` over
    sampled involutions and the worst self-adjointness defect of the images
    of sampled self-adjoint involutions.  Passing is evidence, not proof.
    """
    report = Report()
    worst_inv = np.inf
    worst_sa = 0.0
    for k in range(n_samples):
        f = sample_involution(alg, rng) if k % 2 else sample_selfadjoint_involution(alg, rng)
        D = T.b @ f + T.a
        s = np.linalg.svd(D, compute_uv=False)
        worst_inv = min(worst_inv, s[-1] / s[0])
        if k % 2 == 0 and s[-1] > tol * s[0]:
            fp = _right_divide(T.a @ f + T.b, D, tol, "b f + a")
            worst_sa = max(worst_sa, op_norm(fp - adjoint(fp, alg.gram)))
    report.add("singular_b_f_plus_a", tol / max(worst_inv, 1e-300), 1.0)
    report.add("selfadjoint_images", worst_sa, tol * max(1.0, op_norm(T.block())) ** 2)
    report.note("min_relative_singular_value", float(worst_inv))
    return report


def is_even(T, grading, tol=DEFAULT_TOL):
    """Diagonal blocks even, off-diagonal blocks odd w.r.t. conjugation by ``grading``."""
    g = grading
    scale = max(1.0, op_norm(T.block()))
    even = max(op_norm(g @ T.a @ g - T.a), op_norm(g @ T.d @ g - T.d))
    odd = max(op_norm(g @ T.b @ g + T.b), op_norm(g @ T.c @ g + T.c))
    return max(even, odd) <= tol * scale
