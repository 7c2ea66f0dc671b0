"""The Moebius group of a *-algebra.

Elements are pairs ``(a, b)`` standing for the block matrix ``[[a, b], [b, a]]``
and satisfying

    a*a - b*b = 1,   a*b - b*a = 0,   aa* - bb* = 1,   ab* - ba* = 0.

The map ``(a, b) -> x = a + b`` identifies the group with the invertible
elements, with inverse ``a = (x + (x*)^{-1}) / 2``, ``b = (x - (x*)^{-1}) / 2``.
Every element factors as a unitary ``diag(u, u)`` times a positive element
built from a hermitian contraction ``m``.

All routines take an optional ``gram`` defining the adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NormTooLarge, NotPositive, Singular
from .numerics import (
    DEFAULT_TOL,
    adjoint,
    as_cmat,
    hermitian_function,
    identity,
    inv,
    is_hermitian,
    is_unitary,
    op_norm,
)
from .projective import TwoByTwoA
from .report import Report

__all__ = [
    "Classification",
    "MoebiusElement",
    "cayley",
    "cayley_inv",
    "classify",
    "connes_check",
    "from_x",
    "mu_ev_check",
    "omega_of",
    "omega_param",
    "polar",
    "polar_reconstruct",
    "positive_element",
    "retraction_path",
    "unitary_element",
]


@dataclass(frozen=True, eq=False)
class MoebiusElement:
    a: np.ndarray
    b: np.ndarray
    algebra: object = None
    gram: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", as_cmat(self.a, "a"))
        object.__setattr__(self, "b", as_cmat(self.b, "b"))
        if self.a.shape != self.b.shape:
            raise ValueError("a and b must have the same shape")

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def x(self):
        return self.a + self.b

    @property
    def y(self):
        return self.a - self.b

    def block(self):
        return np.block([[self.a, self.b], [self.b, self.a]])

    def as_two_by_two(self):
        return TwoByTwoA.special(self.a, self.b)

    def __matmul__(self, other):
        a = self.a @ other.a + self.b @ other.b
        b = self.a @ other.b + self.b @ other.a
        return MoebiusElement(a, b, self.algebra, self.gram)

    def inverse(self):
        """``[[a*, -b*], [-b*, a*]]``, valid for elements satisfying the identities."""
        return MoebiusElement(adjoint(self.a, self.gram), -adjoint(self.b, self.gram),
                              self.algebra, self.gram)

    def distance(self, other):
        return op_norm(self.block() - other.block())


def connes_check(a, b, tol=DEFAULT_TOL, gram=None):
    a, b = as_cmat(a, "a"), as_cmat(b, "b")
    one = identity(a.shape[0])
    sa, sb = adjoint(a, gram), adjoint(b, gram)
    thr = tol * max(1.0, op_norm(a), op_norm(b)) ** 2
    report = Report()
    report.add("a*a-b*b-1", op_norm(sa @ a - sb @ b - one), thr)
    report.add("a*b-b*a", op_norm(sa @ b - sb @ a), thr)
    report.add("aa*-bb*-1", op_norm(a @ sa - b @ sb - one), thr)
    report.add("ab*-ba*", op_norm(a @ sb - b @ sa), thr)
    return report


def from_x(x, tol=DEFAULT_TOL, gram=None, algebra=None):
    x = as_cmat(x, "x")
    xsi = inv(adjoint(x, gram), tol, "x*")
    return MoebiusElement(0.5 * (x + xsi), 0.5 * (x - xsi), algebra, gram)


def unitary_element(u, gram=None, algebra=None):
    u = as_cmat(u, "u")
    return MoebiusElement(u, np.zeros_like(u), algebra, gram)


def positive_element(m, gram=None, algebra=None):
    """``a = (1 - m^2)^{-1/2}``, ``b = -m (1 - m^2)^{-1/2}`` for a hermitian contraction ``m``."""
    m = as_cmat(m, "m")
    c, w = hermitian_function(identity(m.shape[0]) - m @ m, lambda e: 1.0 / np.sqrt(e), gram)
    if w[0] <= 0:
        raise NormTooLarge("m must have norm strictly below one")
    return MoebiusElement(c, -m @ c, algebra, gram)


def _check_positive(Q, tol, gram):
    if not is_hermitian(Q, max(tol, 1e-12), gram):
        raise NotPositive("operator is not hermitian")
    _, w = hermitian_function(Q, lambda e: e, gram)
    if w[0] <= tol * max(1.0, abs(w[-1])):
        raise NotPositive(f"minimum eigenvalue {w[0]:.3e} is not positive")


def cayley(Q, tol=DEFAULT_TOL, gram=None):
    """``m = (1 - Q)(1 + Q)^{-1}`` for hermitian positive invertible ``Q``."""
    Q = as_cmat(Q, "Q")
    _check_positive(Q, tol, gram)
    one = identity(Q.shape[0])
    return np.linalg.solve((one + Q).T, (one - Q).T).T


def cayley_inv(m, tol=DEFAULT_TOL, gram=None):
    """``Q = (1 - m)(1 + m)^{-1}`` for a hermitian ``m`` with norm below ``1 - tol``."""
    m = as_cmat(m, "m")
    if not is_hermitian(m, max(tol, 1e-12), gram):
        raise ValueError("m is not hermitian")
    if op_norm(m, gram) >= 1.0 - tol:
        raise NormTooLarge(f"norm of m is {op_norm(m, gram):.6g}, must be below 1")
    one = identity(m.shape[0])
    return np.linalg.solve((one + m).T, (one - m).T).T


@dataclass(frozen=True)
class Classification:
    kind: str  # "unitary", "positive" or "general"
    u: np.ndarray | None = None
    m: np.ndarray | None = None


def classify(g, tol=DEFAULT_TOL):
    """Unitary if ``b = 0`` and ``a`` unitary; positive if ``g`` is the element built from
    ``m = -a^{-1} b`` and ``x`` is positive; otherwise general."""
    gram = g.gram
    scale = max(1.0, op_norm(g.a), op_norm(g.b))
    if op_norm(g.b) <= tol * scale and is_unitary(g.a, tol, gram):
        return Classification("unitary", u=g.a)
    try:
        m = -inv(g.a, tol, "a") @ g.b
    except Singular:
        return Classification("general")
    if not is_hermitian(m, tol, gram) or op_norm(m, gram) >= 1.0 - tol:
        return Classification("general")
    x = g.x
    if not is_hermitian(x, tol, gram):
        return Classification("general")
    _, w = hermitian_function(x, lambda e: e, gram)
    if w[0] <= tol:
        return Classification("general")
    ref = positive_element(0.5 * (m + adjoint(m, gram)), gram)
    if g.distance(ref) > tol * scale:
        return Classification("general")
    return Classification("positive", m=m)


def omega_param(omega, gram=None, algebra=None):
    omega = as_cmat(omega, "omega")
    a, _ = hermitian_function(omega, np.cosh, gram)
    b, _ = hermitian_function(omega, np.sinh, gram)
    return MoebiusElement(a, b, algebra, gram)


def omega_of(g, tol=DEFAULT_TOL):
    """Hermitian logarithm of the positive ``x = a + b``."""
    x = g.x
    if not is_hermitian(x, max(tol, 1e-12) * 10, g.gram):
        raise NotPositive("x = a + b is not hermitian")
    out, w = hermitian_function(x, lambda e: np.log(np.clip(e, 1e-300, None)), g.gram)
    if w[0] <= tol:
        raise NotPositive(f"x = a + b is not positive (min eigenvalue {w[0]:.3e})")
    return out


def polar(g, side="left", tol=DEFAULT_TOL):
    """Return ``(u, m)`` with ``g = diag(u, u) g_m`` (left) or ``g_m diag(u, u)`` (right)."""
    gram = g.gram
    sa = adjoint(g.a, gram)
    ainv = inv(g.a, tol, "a")
    if side == "left":
        root_inv, _ = hermitian_function(sa @ g.a, lambda e: 1.0 / np.sqrt(e), gram)
        return g.a @ root_inv, -ainv @ g.b
    if side == "right":
        root_inv, _ = hermitian_function(g.a @ sa, lambda e: 1.0 / np.sqrt(e), gram)
        return root_inv @ g.a, -g.b @ ainv
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def polar_reconstruct(u, m, side="left", gram=None):
    U = unitary_element(u, gram)
    P = positive_element(0.5 * (m + adjoint(m, gram)), gram)
    return U @ P if side == "left" else P @ U


def retraction_path(g, t, tol=DEFAULT_TOL):
    """``diag(u, u) g_{t m}`` from the left polar decomposition of ``g``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    u, m = polar(g, "left", tol)
    m = 0.5 * (m + adjoint(m, g.gram))
    return unitary_element(u, g.gram, g.algebra) @ positive_element(t * m, g.gram, g.algebra)


def mu_ev_check(g, grading, tol=DEFAULT_TOL):
    """Even ``a``, odd ``b`` and ``gamma x* gamma x = 1``."""
    gam = as_cmat(grading, "grading")
    scale = max(1.0, op_norm(g.a), op_norm(g.b))
    if op_norm(gam @ g.a @ gam - g.a) > tol * scale:
        return False
    if op_norm(gam @ g.b @ gam + g.b) > tol * scale:
        return False
    x = g.x
    resid = op_norm(gam @ adjoint(x, g.gram) @ gam @ x - identity(g.n))
    return resid <= tol * scale**2
