"""Polarized modules: a Krein form ``S``, a representation and a Lagrangian subspace ``E``.

A compatible involution ``gamma`` turns the Krein form into a Hilbert inner
product ``G = S gamma`` and lifts the polarized module to a Fredholm module
with ``F = +1`` on ``E`` and ``-1`` on ``gamma(E)``.  Two compatible
involutions are joined by a generalized Moebius transformation with blocks
``(1 +- gamma_2 gamma_1) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSplit, EndpointMismatch, InvalidModule, NotCompatible
from .fredholm import FredholmModule
from .numerics import DEFAULT_TOL, Frame, as_cmat, gram_sqrt, hermitian_function, identity
from .report import Report

__all__ = [
    "CompatibleInvolution",
    "GenMoebius",
    "PolarizedModule",
    "apply_gen",
    "cayley_between",
    "cayley_relation_check",
    "compatible_check",
    "gen_connes_check",
    "gen_moebius",
    "gen_polar",
    "gen_polar_residual",
    "groupoid_compose",
    "lift",
    "real_polarized_check",
    "subspace_gap",
    "underlying_polarized",
    "validate_polarized",
]


@dataclass(frozen=True, eq=False)
class PolarizedModule:
    S: np.ndarray
    pi: tuple
    E: np.ndarray
    algebra: object = None

    def __post_init__(self):
        object.__setattr__(self, "S", as_cmat(self.S, "S"))
        object.__setattr__(self, "pi", tuple(as_cmat(p, "pi") for p in self.pi))
        E = np.asarray(self.E, dtype=np.complex128)
        if E.ndim == 1:
            E = E.reshape(-1, 1)
        object.__setattr__(self, "E", E)

    @property
    def dim(self):
        return self.S.shape[0]

    @property
    def k(self):
        return self.E.shape[1]

    def orthonormal_E(self):
        return scipy.linalg.orth(self.E)


@dataclass(frozen=True, eq=False)
class CompatibleInvolution:
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_cmat(self.gamma, "gamma"))


def _gamma(g):
    return g.gamma if isinstance(g, CompatibleInvolution) else as_cmat(g, "gamma")


@dataclass(frozen=True, eq=False)
class GenMoebius:
    """Blocks ``A, B`` mapping the lift for ``source`` to the lift for ``target``."""

    A: np.ndarray
    B: np.ndarray
    source: np.ndarray
    target: np.ndarray
    S: np.ndarray

    @property
    def Q(self):
        return self.target @ self.source

    def block(self):
        return np.block([[self.A, self.B], [self.B, self.A]])


def subspace_gap(E1, E2):
    """Largest principal angle between two column spans (radians)."""
    E1, E2 = np.asarray(E1), np.asarray(E2)
    if E1.shape[1] != E2.shape[1]:
        return np.pi / 2
    if E1.shape[1] == 0:
        return 0.0
    return float(np.max(scipy.linalg.subspace_angles(E1, E2)))


def validate_polarized(P, tol=DEFAULT_TOL):
    report = Report()
    S = P.S
    nS = max(1.0, np.linalg.norm(S, 2))
    report.add("S_hermitian", np.linalg.norm(S - S.conj().T, 2) / nS, tol)
    s = np.linalg.svd(S, compute_uv=False)
    report.add("S_nondegenerate", tol * s[0] / max(s[-1], 1e-300), 1.0)
    E = P.orthonormal_E()
    report.add("E_full_rank", float(abs(E.shape[1] - P.k)), 0.5)
    report.add("isotropic", np.linalg.norm(E.conj().T @ S @ E, 2) / nS, tol)
    # Lagrangian: dim E = n / 2, and the sigma-annihilator of E is E itself
    report.add("half_dimension", float(abs(2 * E.shape[1] - P.dim)), 0.5)
    ann = scipy.linalg.null_space(E.conj().T @ S, rcond=tol)
    report.add("annihilator_dimension", float(abs(ann.shape[1] - E.shape[1])), 0.5)
    report.note("compressed_norms",
                [float(np.linalg.norm(E.conj().T @ S @ p @ E, 2)) for p in P.pi])
    return report


def underlying_polarized(fm, tol=DEFAULT_TOL):
    """Krein form ``S = G gamma`` and ``E`` = +1 eigenspace of ``F``."""
    if not fm.is_even:
        raise InvalidModule("the underlying polarized module needs a grading")
    n = fm.dim
    G = identity(n) if fm.gram is None else fm.gram
    frame = Frame(G)
    F, g = fm.F, fm.gamma
    one = identity(n)
    defects = {
        "F_involution": frame.norm(F @ F - one),
        "F_selfadjoint": frame.norm(F - frame.adj(F)),
        "gamma_involution": frame.norm(g @ g - one),
        "gamma_selfadjoint": frame.norm(g - frame.adj(g)),
        "anticommute": frame.norm(g @ F + F @ g),
    }
    scale = max(1.0, frame.norm(F), frame.norm(g)) ** 2
    bad = [k for k, v in defects.items() if v > 10 * tol * scale]
    if bad:
        raise InvalidModule(f"module fails {bad}")
    Ft = frame.to_orthonormal(F)
    w, V = np.linalg.eigh(0.5 * (Ft + Ft.conj().T))
    Vp = V[:, w > 0]
    E = Vp if frame.half_inv is None else frame.half_inv @ Vp
    return PolarizedModule(G @ g, fm.pi, E, fm.algebra)


def compatible_check(P, gamma, tol=DEFAULT_TOL, rep_tol=None):
    """``gamma^2 = 1``, Krein self-adjointness, ``S gamma > 0`` and ``[gamma, pi] = 0``."""
    rep_tol = tol if rep_tol is None else rep_tol
    g = _gamma(gamma)
    S = P.S
    n = P.dim
    report = Report()
    ng = max(1.0, np.linalg.norm(g, 2))
    nS = max(1.0, np.linalg.norm(S, 2))
    report.add("involution", np.linalg.norm(g @ g - identity(n), 2) / ng**2, tol)
    report.add("krein_selfadjoint", np.linalg.norm(g.conj().T @ S - S @ g, 2) / (ng * nS), tol)
    G = S @ g
    Gh = 0.5 * (G + G.conj().T)
    w = np.linalg.eigvalsh(Gh)
    report.note("min_eigenvalue", float(w[0]))
    report.add("positive", tol * max(abs(w[-1]), 1e-300) / w[0] if w[0] > 0 else np.inf, 1.0)
    worst = max((np.linalg.norm(g @ p - p @ g, 2) / (ng * max(1.0, np.linalg.norm(p, 2)))
                 for p in P.pi), default=0.0)
    report.add_or_note("commutes_with_pi", worst, rep_tol)
    return report


def _require_compatible(P, gamma, tol, rep_tol):
    report = compatible_check(P, gamma, tol, rep_tol)
    if not report.passed:
        raise NotCompatible(f"involution is not compatible: {report.failures()}")
    return _gamma(gamma)


def cayley_between(P, gamma0, gamma1, tol=DEFAULT_TOL, rep_tol=None):
    """``m = (1 - Q)(1 + Q)^{-1}`` with ``Q = gamma0 gamma1``."""
    g0 = _require_compatible(P, gamma0, tol, rep_tol)
    g1 = _require_compatible(P, gamma1, tol, rep_tol)
    one = identity(P.dim)
    Q = g0 @ g1
    return np.linalg.solve((one + Q).T, (one - Q).T).T


def cayley_relation_check(P, gamma0, gamma1, m, tol=DEFAULT_TOL, rep_tol=None):
    """Residuals for ``gamma1 = (1+m) gamma0 (1+m)^{-1}``, ``{m, gamma0} = 0``,
    ``[m, pi] = 0`` and the ``G_0``-norm of ``m`` below one."""
    rep_tol = tol if rep_tol is None else rep_tol
    g0, g1 = _gamma(gamma0), _gamma(gamma1)
    one = identity(P.dim)
    report = Report()
    conj = np.linalg.solve((one + m).T, ((one + m) @ g0).T).T
    report.add("conjugation", np.linalg.norm(conj - g1, 2), tol * max(1.0, np.linalg.norm(g1, 2)))
    report.add("anticommutes", np.linalg.norm(m @ g0 + g0 @ m, 2), tol * max(1.0, np.linalg.norm(g0, 2)))
    worst = max((np.linalg.norm(m @ p - p @ m, 2) / max(1.0, np.linalg.norm(p, 2)) for p in P.pi),
                default=0.0)
    report.add_or_note("commutes_with_pi", worst, rep_tol)
    norm0 = Frame(P.S @ g0).norm(m)
    report.note("norm_G0", norm0)
    report.add("contraction", norm0, 1.0 - tol)
    return report


def lift(P, gamma, tol=DEFAULT_TOL, rep_tol=None):
    """Fredholm module with ``gram = S gamma`` and ``F = +1`` on ``E``, ``-1`` on ``gamma(E)``."""
    g = _require_compatible(P, gamma, tol, rep_tol)
    E = P.orthonormal_E()
    gE = scipy.linalg.orth(g @ E)
    split = np.hstack([E, gE])
    s = np.linalg.svd(split, compute_uv=False)
    if split.shape[1] != P.dim or s[-1] <= tol * s[0]:
        raise DegenerateSplit("E and gamma(E) do not span the space")
    G = P.S @ g
    G = 0.5 * (G + G.conj().T)
    # G-orthogonal projection onto E; gamma(E) is its G-orthocomplement
    proj = E @ np.linalg.solve(E.conj().T @ G @ E, E.conj().T @ G)
    F = 2.0 * proj - identity(P.dim)
    return FredholmModule(P.pi, F, g, G, P.algebra)


def gen_moebius(P, gamma2, gamma1, tol=DEFAULT_TOL, rep_tol=None):
    """Blocks ``A = (1 + Q)/2``, ``B = (1 - Q)/2`` with ``Q = gamma2 gamma1``."""
    g2 = _require_compatible(P, gamma2, tol, rep_tol)
    g1 = _require_compatible(P, gamma1, tol, rep_tol)
    one = identity(P.dim)
    Q = g2 @ g1
    return GenMoebius(0.5 * (one + Q), 0.5 * (one - Q), g1, g2, P.S)


def _cross_adjoint(T, G_from, G_to):
    """Adjoint of ``T : (H, G_from) -> (H, G_to)``: ``G_from^{-1} T^H G_to``."""
    return np.linalg.solve(G_from, T.conj().T @ G_to)


def gen_connes_check(g, tol=DEFAULT_TOL, pi=()):
    """Connes identities with adjoints between ``G_1 = S gamma_1`` and ``G_2 = S gamma_2``,
    plus commutation of ``A`` and ``B`` with ``pi``."""
    G1, G2 = g.S @ g.source, g.S @ g.target
    A, B = g.A, g.B
    sA, sB = _cross_adjoint(A, G1, G2), _cross_adjoint(B, G1, G2)
    one = identity(A.shape[0])
    thr = tol * max(1.0, np.linalg.norm(A, 2), np.linalg.norm(B, 2)) ** 2
    report = Report()
    report.add("A*A-B*B-1", np.linalg.norm(sA @ A - sB @ B - one, 2), thr)
    report.add("A*B-B*A", np.linalg.norm(sA @ B - sB @ A, 2), thr)
    report.add("AA*-BB*-1", np.linalg.norm(A @ sA - B @ sB - one, 2), thr)
    report.add("AB*-BA*", np.linalg.norm(A @ sB - B @ sA, 2), thr)
    if pi:
        worst = max(max(np.linalg.norm(A @ p - p @ A, 2), np.linalg.norm(B @ p - p @ B, 2))
                    / max(1.0, np.linalg.norm(p, 2)) for p in pi)
        report.add("commutes_with_pi", worst, thr)
    return report


def gen_polar(g, tol=DEFAULT_TOL):
    """``(m, W)``: ``m`` the Cayley transform of ``Q``, ``W = Q^{1/2}`` for the ``G_1`` inner product."""
    G1 = g.S @ g.source
    G1 = 0.5 * (G1 + G1.conj().T)
    Q = g.Q
    one = identity(Q.shape[0])
    m = np.linalg.solve((one + Q).T, (one - Q).T).T
    W, w = hermitian_function(Q, lambda e: np.sqrt(np.clip(e, 0.0, None)), G1)
    if w[0] <= tol:
        raise NotCompatible(f"Q is not positive (min eigenvalue {w[0]:.3e})")
    return m, W


def gen_polar_residual(g, m, W, tol=DEFAULT_TOL):
    """``|| g - g+_m diag(W, W) ||`` with ``g+_m = [[c, m c], [m c, c]]``, ``c = (1 - m^2)^{-1/2}``."""
    G1 = g.S @ g.source
    G1 = 0.5 * (G1 + G1.conj().T)
    one = identity(m.shape[0])
    c, _ = hermitian_function(one - m @ m, lambda e: 1.0 / np.sqrt(e), G1)
    A = c @ W
    B = m @ c @ W
    return float(max(np.linalg.norm(A - g.A, 2), np.linalg.norm(B - g.B, 2)))


def groupoid_compose(g32, g21, tol=DEFAULT_TOL):
    if np.linalg.norm(g32.source - g21.target, 2) > tol * max(1.0, np.linalg.norm(g21.target, 2)):
        raise EndpointMismatch("source of the left factor differs from target of the right factor")
    A = g32.A @ g21.A + g32.B @ g21.B
    B = g32.A @ g21.B + g32.B @ g21.A
    return GenMoebius(A, B, g21.source, g32.target, g32.S)


def apply_gen(g, fm1, tol=DEFAULT_TOL):
    """Transport the lift for ``gamma_1`` to the target inner product ``S gamma_2``.

    The representation and grading are conjugated by ``W = Q^{1/2}``, which
    is unitary from ``G_1`` to ``G_2``; ``F`` goes to ``(A F + B)(B F + A)^{-1}``.
    """
    _, W = gen_polar(g, tol)
    Wi = np.linalg.inv(W)
    F1 = fm1.F
    D = g.B @ F1 + g.A
    F2 = np.linalg.solve(D.T, (g.A @ F1 + g.B).T).T
    G2 = g.S @ g.target
    G2 = 0.5 * (G2 + G2.conj().T)
    gram_sqrt(G2)  # raises NotPositive for a degenerate target inner product
    pis = tuple(W @ p @ Wi for p in fm1.pi)
    gamma = W @ g.source @ Wi
    return FredholmModule(pis, F2, gamma, G2, fm1.algebra)


def real_polarized_check(P, rs, tol=DEFAULT_TOL):
    """``C^2 = 1``, ``J^H S J = eps conj(S)``, ``C pi C = pi(c(.))`` and ``C(E) in E``."""
    J = rs.J
    n = P.dim
    S = P.S
    nJ = max(1.0, np.linalg.norm(J, 2))
    report = Report()
    report.add("C_squared", np.linalg.norm(J @ J.conj() - identity(n), 2) / nJ**2, tol)
    report.add("sigma_twist",
               np.linalg.norm(J.conj().T @ S @ J - rs.epsilon * S.conj(), 2)
               / (nJ**2 * max(1.0, np.linalg.norm(S, 2))), tol)
    if P.pi:
        k = len(P.pi)
        cmap = np.eye(k) if rs.c_map is None else np.asarray(rs.c_map, dtype=np.complex128)
        stack = np.stack(P.pi)
        worst = 0.0
        for i, p in enumerate(P.pi):
            diff = J @ p.conj() @ J.conj() - np.tensordot(cmap[i], stack, axes=1)
            worst = max(worst, np.linalg.norm(diff, 2) / (nJ**2 * max(1.0, np.linalg.norm(p, 2))))
        report.add("C_pi", worst, tol)
    E = P.orthonormal_E()
    CE = J @ E.conj()
    report.add("C_preserves_E", np.linalg.norm(CE - E @ (E.conj().T @ CE), 2) / nJ, tol)
    return report

