"""Fredholm modules over a finite-dimensional algebra and the Moebius action on them.

A module is a representation ``pi`` (one matrix per algebra basis element), a
self-adjoint involution ``F`` and, in the even case, a grading ``gamma``.  An
element ``(a, b)`` of the Moebius group of the commutant sends ``F`` to
``(aF + b)(bF + a)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NotInCommutant, NotUnitary, Singular
from .moebius import polar, retraction_path
from .numerics import DEFAULT_TOL, Frame, as_cmat, hermitian_function, identity, is_invertible
from .report import Report
from .star_algebra import commutant_of, span_basis

__all__ = [
    "FredholmModule",
    "RealStructure",
    "commutant_residual",
    "commutator_transform_residual",
    "conjugate_module",
    "homotopy_path",
    "homotopy_sample",
    "moebius_act",
    "random_commutant_unitary",
    "real_check",
    "validate_fredholm",
]


@dataclass(frozen=True, eq=False)
class FredholmModule:
    """``pi[i]`` represents basis element ``i``; ``gamma`` is None for odd modules.

    ``algebra`` optionally carries the abstract algebra whose basis ``pi`` is
    indexed by, so structure constants can be checked.
    """

    pi: tuple
    F: np.ndarray
    gamma: np.ndarray | None = None
    gram: np.ndarray | None = None
    algebra: object = None

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(as_cmat(p, "pi") for p in self.pi))
        object.__setattr__(self, "F", as_cmat(self.F, "F"))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", as_cmat(self.gamma, "gamma"))
        if self.gram is not None:
            object.__setattr__(self, "gram", as_cmat(self.gram, "gram"))

    @property
    def dim(self):
        return self.F.shape[0]

    @property
    def is_even(self):
        return self.gamma is not None

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class RealStructure:
    """Antilinear ``C(v) = J conj(v)``; ``c_map[i, j]`` expands ``c(a_i)`` in the basis."""

    J: np.ndarray
    epsilon: int = 1
    c_map: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "J", as_cmat(self.J, "J"))
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")


def _rel(frame, M, scale):
    return frame.norm(M) / max(1.0, scale)


def validate_fredholm(fm, tol=DEFAULT_TOL, rep_tol=None, check_homomorphism=True):
    """Residuals of the module axioms.

    ``rep_tol`` (default ``tol``) applies to the checks involving the
    representation, which on truncated geometric models hold only up to a
    discretization error; an infinite ``rep_tol`` records them as
    diagnostics.  Compressed representations are not multiplicative, so
    ``check_homomorphism=False`` skips that part.  Norms of ``[F, pi_i]``
    are always diagnostics.
    """
    rep_tol = tol if rep_tol is None else rep_tol
    n = fm.dim
    one = identity(n)
    report = Report()
    frame = Frame(fm.gram)
    F = fm.F
    nF = frame.norm(F)
    report.add("F_involution", _rel(frame, F @ F - one, nF**2), tol)
    report.add("F_selfadjoint", _rel(frame, F - frame.adj(F), nF), tol)
    if fm.is_even:
        g = fm.gamma
        ng = frame.norm(g)
        report.add("gamma_involution", _rel(frame, g @ g - one, ng**2), tol)
        report.add("gamma_selfadjoint", _rel(frame, g - frame.adj(g), ng), tol)
        report.add("gamma_F_anticommute", _rel(frame, g @ F + F @ g, ng * nF), tol)
        worst = max((_rel(frame, g @ p - p @ g, ng * frame.norm(p)) for p in fm.pi), default=0.0)
        report.add_or_note("gamma_commutes_with_pi", worst, rep_tol)
    if check_homomorphism:
        hom = _homomorphism_checks(fm, frame, rep_tol)
        for c in hom.checks.values():
            report.add_or_note(c.name, c.residual, c.threshold)
    report.note("commutator_norms", [frame.norm(F @ p - p @ F) for p in fm.pi])
    return report


def _homomorphism_checks(fm, frame, tol):
    report = Report()
    pis = fm.pi
    if not pis:
        return report
    norms = [max(1.0, frame.norm(p)) for p in pis]
    alg = fm.algebra
    if alg is not None and getattr(alg, "dim", None) == len(pis):
        B = alg.basis
        P = np.stack(pis)
        worst_mul = 0.0
        for i in range(len(B)):
            for j in range(len(B)):
                c = alg.coefficients(B[i] @ B[j])
                target = np.tensordot(c, P, axes=1)
                worst_mul = max(worst_mul, _rel(frame, pis[i] @ pis[j] - target, norms[i] * norms[j]))
        worst_adj = 0.0
        for i in range(len(B)):
            d = alg.coefficients(B[i].conj().T)
            target = np.tensordot(d, P, axes=1)
            worst_adj = max(worst_adj, _rel(frame, frame.adj(pis[i]) - target, norms[i]))
        report.add("pi_multiplicative", worst_mul, tol)
        report.add("pi_star", worst_adj, tol)
        return report
    # no abstract algebra: the image must at least be a *-closed algebra
    tilde = [frame.to_orthonormal(p) for p in pis]
    rows = span_basis(tilde, tol)
    k = rows.shape[0]
    if k == 0:
        return report

    def dist(X):
        v = X.ravel()
        return np.linalg.norm(v - (rows.conj() @ v) @ rows) / max(1.0, np.linalg.norm(v))

    report.add("pi_span_products", max(dist(x @ y) for x in tilde for y in tilde), tol)
    report.add("pi_span_adjoints", max(dist(x.conj().T) for x in tilde), tol)
    return report


def commutant_residual(fm, a, tol=DEFAULT_TOL):
    """Worst ``||[x, pi_i]|| / (tol ||pi_i||)`` over ``x`` in ``a``; at most 1 means inside."""
    frame = Frame(fm.gram)
    worst = 0.0
    for x in a:
        nx = max(1.0, frame.norm(x))
        for p in fm.pi:
            r = frame.norm(x @ p - p @ x) / (tol * nx * max(1.0, frame.norm(p)))
            worst = max(worst, r)
    return worst


def random_commutant_unitary(fm, rng, tol=DEFAULT_TOL, commutant=None):
    """``exp(i h)`` for a random hermitian ``h`` in the commutant of ``fm.pi``."""
    if commutant is None:
        commutant = commutant_of(fm.pi, tol, gram=fm.gram)
    h = commutant.random_hermitian(rng)
    u, _ = hermitian_function(h, lambda e: np.exp(1j * e), fm.gram)
    return u


def _moebius_image(a, b, X, tol):
    D = b @ X + a
    if not is_invertible(D, tol):
        raise Singular("b F + a is not invertible")
    return np.linalg.solve(D.T, (a @ X + b).T).T


def moebius_act(g, fm, transform_gamma=False, tol=DEFAULT_TOL, check_commutant=True):
    """Image of ``fm`` under ``g``: ``F -> (aF + b)(bF + a)^{-1}``.

    With ``transform_gamma`` the grading is moved by the same formula;
    otherwise it is kept, which preserves the axioms only for even ``a`` and
    odd ``b``.
    """
    if check_commutant and commutant_residual(fm, (g.a, g.b), tol) > 1.0:
        raise NotInCommutant("a, b must commute with the representation")
    F2 = _moebius_image(g.a, g.b, fm.F, tol)
    gamma = fm.gamma
    if transform_gamma and gamma is not None:
        gamma = _moebius_image(g.a, g.b, gamma, tol)
    return fm.replace(F=F2, gamma=gamma)


def commutator_transform_residual(g, fm, x, tol=DEFAULT_TOL):
    """``||[F', x] - (D^{-1})* [F, x] D^{-1}||`` with ``D = bF + a``.

    Vanishes (up to rounding) when ``x`` commutes with ``a`` and ``b``; in
    general the difference is the correction term built from ``[a, x]`` and
    ``[b, x]``.
    """
    x = as_cmat(x, "x")
    frame = Frame(fm.gram)
    F = fm.F
    D = g.b @ F + g.a
    if not is_invertible(D, tol):
        raise Singular("b F + a is not invertible")
    Di = np.linalg.inv(D)
    F2 = (g.a @ F + g.b) @ Di
    lhs = F2 @ x - x @ F2
    rhs = frame.adj(Di) @ (F @ x - x @ F) @ Di
    return frame.norm(lhs - rhs)


def conjugate_module(U, fm, tol=DEFAULT_TOL, target_gram=None):
    """``(U pi U^{-1}, U gamma U^{-1}, U F U^{-1})`` on the target space.

    ``U`` must be unitary from ``(H, fm.gram)`` to ``(H, target_gram)``,
    i.e. ``U^H G_target U = G_source``.
    """
    U = as_cmat(U, "U")
    n = fm.dim
    G1 = identity(n) if fm.gram is None else fm.gram
    G2 = G1 if target_gram is None else as_cmat(target_gram, "target_gram")
    defect = np.linalg.norm(U.conj().T @ G2 @ U - G1, 2) / max(1.0, np.linalg.norm(G1, 2))
    if defect > tol * max(1.0, np.linalg.norm(U, 2)) ** 2:
        raise NotUnitary(f"U is not unitary between the given inner products (defect {defect:.3e})")
    Ui = np.linalg.inv(U)

    def conj(X):
        return U @ X @ Ui

    gram = fm.gram if target_gram is None else G2
    return FredholmModule(
        tuple(conj(p) for p in fm.pi),
        conj(fm.F),
        None if fm.gamma is None else conj(fm.gamma),
        gram,
        fm.algebra,
    )


def homotopy_path(g, fm, n_steps, tol=DEFAULT_TOL):
    """``[(t_k, F_t)]`` along the retraction of ``g`` onto its unitary part."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if commutant_residual(fm, (g.a, g.b), tol) > 1.0:
        raise NotInCommutant("a, b must commute with the representation")
    out = []
    for k in range(n_steps + 1):
        t = k / n_steps
        gt = retraction_path(g, t, tol)
        out.append((t, _moebius_image(gt.a, gt.b, fm.F, tol)))
    return out


@dataclass
class PathSummary:
    report: Report
    ts: list = field(default_factory=list)
    steps: list = field(default_factory=list)


def homotopy_sample(g, fm, n_steps, tol=DEFAULT_TOL):
    """Sample the path of involutions joining ``u F u*`` to ``g(F)``.

    Checks every sample is a self-adjoint involution and that the ``t = 0``
    end is the unitary conjugate; records step sizes.
    """
    path = homotopy_path(g, fm, n_steps, tol)
    frame = Frame(fm.gram)
    one = identity(fm.dim)
    report = Report()
    inv_res = max(frame.norm(F @ F - one) / max(1.0, frame.norm(F)) ** 2 for _, F in path)
    sa_res = max(frame.norm(F - frame.adj(F)) / max(1.0, frame.norm(F)) for _, F in path)
    report.add("path_involution", inv_res, 10 * tol)
    report.add("path_selfadjoint", sa_res, 10 * tol)
    u, _ = polar(g, "left", tol)
    start = u @ fm.F @ frame.adj(u)
    report.add("start_is_unitary_conjugate", frame.norm(path[0][1] - start), 10 * tol)
    end = _moebius_image(g.a, g.b, fm.F, tol)
    report.add("end_is_image", frame.norm(path[-1][1] - end), 10 * tol)
    steps = [frame.norm(path[k + 1][1] - path[k][1]) for k in range(len(path) - 1)]
    report.note("max_step", max(steps))
    report.note("steps", steps)
    return PathSummary(report, [t for t, _ in path], steps)


def real_check(fm, rs, tol=DEFAULT_TOL):
    """Residuals for a real structure ``C = J conj(.)`` on ``fm``."""
    J = rs.J
    n = fm.dim
    G = identity(n) if fm.gram is None else fm.gram
    frame = Frame(fm.gram)
    nJ = frame.norm(J)
    report = Report()
    report.add("C_squared", np.linalg.norm(J @ J.conj() - identity(n), 2) / max(1.0, nJ) ** 2, tol)
    report.add("antiunitary",
               np.linalg.norm(J.conj().T @ G @ J - G.conj(), 2) / max(1.0, np.linalg.norm(G, 2)) / max(1.0, nJ) ** 2,
               tol)
    if fm.is_even:
        g = fm.gamma
        report.add("C_gamma", frame.norm(J @ g.conj() - rs.epsilon * g @ J) / max(1.0, nJ * frame.norm(g)), tol)
    if fm.pi:
        k = len(fm.pi)
        cmap = np.eye(k) if rs.c_map is None else np.asarray(rs.c_map, dtype=np.complex128)
        P = np.stack(fm.pi)
        worst = 0.0
        for i, p in enumerate(fm.pi):
            lhs = J @ p.conj() @ J.conj()
            rhs = np.tensordot(cmap[i], P, axes=1)
            worst = max(worst, frame.norm(lhs - rhs) / max(1.0, nJ**2 * frame.norm(p)))
        report.add("C_pi", worst, tol)
    F = fm.F
    report.add("C_F", frame.norm(J @ F.conj() - F @ J) / max(1.0, nJ * frame.norm(F)), tol)
    return report
