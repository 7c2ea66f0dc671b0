"""Spectral model of 1-forms on the round 2-sphere.

The truncated space is spanned by the exact forms ``dY_lm`` followed by the
coexact forms ``*0 dY_lm`` (``*0`` the round Hodge star), ``1 <= l <= lmax``.
Forms are sampled by their components in the orthonormal round frame
``(e_theta, e_phi / sin theta)`` on a Gauss-Legendre x uniform grid, and
every operator is assembled by quadrature followed by round L2 projection.

The Krein pairing is ``sigma(w, v) = -i * integral(w ^ conj(v))``.  A metric
enters only through its Hodge star, which on 1-forms of a surface is
invariant under conformal rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import sph_harm_y

from .errors import NotInCommutant, NotNormalizable, NotSPD, SchemaError
from .fredholm import FredholmModule, RealStructure, commutant_residual
from .numerics import DEFAULT_TOL, SPHERE_TOL, Frame, involutive_normalize
from .polarized import PolarizedModule, apply_gen, gen_moebius, lift
from .report import Report

__all__ = [
    "MetricField",
    "SphereBasis",
    "bridge_check",
    "build_basis",
    "canonical_polarized",
    "commutator_decay",
    "conformal_lift",
    "function_lms",
    "gamma_from_metric",
    "harmonic",
    "hodge_involution",
    "multiplication_operator",
    "sigma_gram",
    "sphere_real_structure",
    "trace_invariance_check",
]


def harmonic(l, m, theta, phi):
    """Complex ``Y_lm`` with the Condon-Shortley phase; zero when ``|m| > l``."""
    if abs(m) > l:
        return np.zeros(np.shape(theta), dtype=np.complex128)
    return sph_harm_y(l, m, theta, phi)


def _grad_harmonic(l, m, theta, phi):
    """Frame components of ``dY_lm``: ``(d_theta Y, d_phi Y / sin theta)``."""
    y = harmonic(l, m, theta, phi)
    d_theta = m / np.tan(theta) * y
    if m < l:
        d_theta = d_theta + np.sqrt((l - m) * (l + m + 1)) * np.exp(-1j * phi) * harmonic(l, m + 1, theta, phi)
    d_phi = 1j * m * y / np.sin(theta)
    return d_theta, d_phi


def function_lms(func_lmax):
    return [(l, m) for l in range(func_lmax + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True, eq=False)
class SphereBasis:
    """Sampled basis 1-forms.  ``comp1``/``comp2`` have shape ``(nodes, 2N)``."""

    lmax: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    lms: tuple
    comp1: np.ndarray
    comp2: np.ndarray

    @property
    def N(self):
        return len(self.lms)

    @property
    def dim(self):
        return 2 * self.N

    @property
    def quad_nodes(self):
        return list(zip(self.theta, self.phi, self.weights))

    @cached_property
    def gram0(self):
        """Round L2 Gram matrix (diagonal ``l(l+1)`` analytically)."""
        return self.pair(self.comp1, self.comp2)

    @cached_property
    def _gram0_inv(self):
        return np.linalg.inv(self.gram0)

    def pair(self, v1, v2, weight=None):
        """``B^H diag(w f) V`` summed over both frame components."""
        w = self.weights if weight is None else self.weights * weight
        return self.comp1.conj().T @ (w[:, None] * v1) + self.comp2.conj().T @ (w[:, None] * v2)

    def project(self, v1, v2, weight=None):
        """Round L2 projection of sampled forms onto the span, as coefficients."""
        return self._gram0_inv @ self.pair(v1, v2, weight)

    def shell(self, l):
        """Indices of the basis forms of degree ``l`` (exact and coexact)."""
        idx = [j for j, (ll, _) in enumerate(self.lms) if ll == l]
        return np.array(idx + [self.N + j for j in idx], dtype=int)


def build_basis(lmax):
    if lmax < 1:
        raise ValueError("lmax must be at least 1")
    x, w = leggauss(2 * (lmax + 2))
    n_phi = 2 * (2 * lmax + 2)
    th = np.arccos(x)
    ph = 2.0 * np.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2.0 * np.pi / n_phi))
    TH, PH, W = TH.ravel(), PH.ravel(), W.ravel()
    lms = tuple((l, m) for l in range(1, lmax + 1) for m in range(-l, l + 1))
    N = len(lms)
    c1 = np.zeros((TH.size, 2 * N), dtype=np.complex128)
    c2 = np.zeros_like(c1)
    for j, (l, m) in enumerate(lms):
        a1, a2 = _grad_harmonic(l, m, TH, PH)
        c1[:, j], c2[:, j] = a1, a2
        # round star on frame components: (a1, a2) -> (-a2, a1)
        c1[:, N + j], c2[:, N + j] = -a2, a1
    return SphereBasis(lmax, TH, PH, W, lms, c1, c2)


def sigma_gram(basis):
    """``S[i, j] = sigma(b_i, b_j)`` (hermitian)."""
    c1, c2, w = basis.comp1, basis.comp2, basis.weights
    return -1j * (c2.conj().T @ (w[:, None] * c1) - c1.conj().T @ (w[:, None] * c2))


def _band_limited(coeffs, theta, phi):
    """Real part of ``sum c_lm Y_lm`` for ``[[l, m, re, im], ...]``, or a constant."""
    if isinstance(coeffs, (int, float)):
        return np.full(np.shape(theta), float(coeffs))
    out = np.zeros(np.shape(theta), dtype=np.complex128)
    for entry in coeffs:
        l, m, re, im = entry
        out += complex(re, im) * harmonic(int(l), int(m), theta, phi)
    return out.real


class MetricField:
    """Riemannian metric given by its 2 x 2 matrix in the round orthonormal frame.

    ``fn(theta, phi)`` returns an array of shape ``(nodes, 2, 2)``.
    """

    def __init__(self, fn, kind="tensor", spec=None):
        self.fn = fn
        self.kind = kind
        self.spec = spec

    def at(self, theta, phi):
        g = np.asarray(self.fn(theta, phi), dtype=float)
        if g.shape != (np.size(theta), 2, 2):
            raise NotSPD(f"metric must have shape (nodes, 2, 2), got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NotSPD("metric has non-finite entries")
        if np.max(np.abs(g - g.transpose(0, 2, 1))) > 1e-12 * max(1.0, np.max(np.abs(g))):
            raise NotSPD("metric is not symmetric")
        if np.any(g[:, 0, 0] <= 0) or np.any(np.linalg.det(g) <= 0):
            raise NotSPD("metric is not positive definite at every node")
        return g

    @classmethod
    def round(cls):
        return cls(lambda th, ph: np.broadcast_to(np.eye(2), (np.size(th), 2, 2)).copy(),
                   "round", {"type": "round"})

    @classmethod
    def conformal(cls, phi_coeffs, base=None):
        """``exp(2 f) g_base`` with ``f`` band-limited."""
        base = cls.round() if base is None else base

        def fn(th, ph):
            scale = np.exp(2.0 * _band_limited(phi_coeffs, th, ph))
            return scale[:, None, None] * base.fn(th, ph)

        return cls(fn, "conformal", {"type": "conformal", "phi_coeffs": phi_coeffs})

    @classmethod
    def tensor(cls, a11, a12, a22):
        def fn(th, ph):
            g11 = _band_limited(a11, th, ph)
            g12 = _band_limited(a12, th, ph)
            g22 = _band_limited(a22, th, ph)
            return np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)

        return cls(fn, "tensor", {"type": "tensor", "a11": a11, "a12": a12, "a22": a22})

    @classmethod
    def from_function(cls, fn, kind="tensor"):
        return cls(fn, kind)

    @classmethod
    def sin2_deformation(cls, amplitude=0.3):
        """``diag(1 + amplitude sin^2 theta, 1)``: smooth and band-limited."""
        def fn(th, ph):
            g = np.zeros((np.size(th), 2, 2))
            g[:, 0, 0] = 1.0 + amplitude * np.sin(th) ** 2
            g[:, 1, 1] = 1.0
            return g

        return cls(fn, "tensor", {"type": "sin2", "amplitude": amplitude})

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "type" not in obj:
            raise SchemaError("metric must be an object with a 'type' key")
        kind = obj["type"]
        try:
            if kind == "round":
                return cls.round()
            if kind == "conformal":
                return cls.conformal(_coeff_list(obj["phi_coeffs"]))
            if kind == "tensor":
                return cls.tensor(*(_coeff_list(obj[k]) for k in ("a11", "a12", "a22")))
        except KeyError as exc:
            raise SchemaError(f"metric of type {kind!r} is missing {exc}") from None
        raise SchemaError(f"unknown metric type {kind!r}")


def _coeff_list(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, list):
        raise SchemaError("coefficient list must be a number or a list of [l, m, re, im]")
    out = []
    for entry in value:
        if not (isinstance(entry, list) and len(entry) == 4):
            raise SchemaError("each coefficient must be [l, m, re, im]")
        l, m, re, im = entry
        if int(l) != l or int(m) != m or l < 0 or abs(m) > l:
            raise SchemaError(f"invalid harmonic index ({l}, {m})")
        out.append([int(l), int(m), float(re), float(im)])
    return out


def hodge_involution(basis, metric, tol=DEFAULT_TOL):
    """Compatible involution of ``metric`` and diagnostics of its construction.

    The pointwise operator ``-i *_g`` is projected onto the truncated span and
    repaired with ``K (K^2)^{-1/2}``.  The overall sign is the one making
    ``S K`` positive.  Returns ``(gamma, info)``.
    """
    g = metric.at(basis.theta, basis.phi)
    det = np.linalg.det(g)
    gi = np.linalg.inv(g)
    eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
    star = -np.sqrt(det)[:, None, None] * np.einsum("ab,qbc->qac", eps, gi)
    c1, c2 = basis.comp1, basis.comp2
    s1 = star[:, 0, 0, None] * c1 + star[:, 0, 1, None] * c2
    s2 = star[:, 1, 0, None] * c1 + star[:, 1, 1, None] * c2
    K = basis.project(-1j * s1, -1j * s2)
    S = sigma_gram(basis)
    SK = S @ K
    w = np.linalg.eigvalsh(0.5 * (SK + SK.conj().T))
    if w[-1] <= 0:
        K, SK, w = -K, -SK, -w[::-1]
    if w[0] <= 0:
        raise NotNormalizable("projected Hodge operator is not definite for the Krein form")
    gram = 0.5 * (SK + SK.conj().T)
    K2 = K @ K
    repair = Frame(gram).norm(K2 - np.eye(basis.dim))
    gamma = involutive_normalize(K, max(tol, 1e-12), gram)
    info = {"repair_norm": repair, "min_eigenvalue_SK": float(w[0])}
    return gamma, info


def gamma_from_metric(basis, metric, tol=DEFAULT_TOL):
    return hodge_involution(basis, metric, tol)[0]


def multiplication_operator(basis, values):
    """Multiply-then-project operator for a function sampled at the nodes."""
    return basis.project(basis.comp1, basis.comp2, weight=values)


def canonical_polarized(basis, func_lmax):
    """Krein form, exact forms as ``E`` and ``Y_lm`` (``l <= func_lmax``) acting by multiplication."""
    if func_lmax > basis.lmax or func_lmax < 0:
        raise ValueError("func_lmax must lie in [0, lmax]")
    pis = tuple(multiplication_operator(basis, harmonic(l, m, basis.theta, basis.phi))
                for l, m in function_lms(func_lmax))
    E = np.eye(basis.dim, basis.N, dtype=np.complex128)
    return PolarizedModule(sigma_gram(basis), pis, E)


def conformal_lift(basis, metric, func_lmax, tol=DEFAULT_TOL, rep_tol=None, polarized=None):
    """Lift of the canonical polarized module through the metric's Hodge involution.

    ``rep_tol = inf`` turns the commutation of ``gamma`` with the truncated
    multiplication operators into a recorded diagnostic.
    """
    P = canonical_polarized(basis, func_lmax) if polarized is None else polarized
    gamma = gamma_from_metric(basis, metric, tol)
    return lift(P, gamma, tol, rep_tol)


def _top_shell_norm(basis, frame, C):
    """Hilbert norm of ``C`` restricted to the degree-``lmax`` forms."""
    idx = basis.shell(basis.lmax)
    T = np.zeros((basis.dim, idx.size), dtype=np.complex128)
    T[idx, np.arange(idx.size)] = 1.0
    Z = T if frame.half is None else frame.half @ T
    q, r = np.linalg.qr(Z)
    out = C @ T @ np.linalg.inv(r)
    out = out if frame.half is None else frame.half @ out
    return float(np.linalg.norm(out, 2))


def commutator_decay(f_lm, lmax_list, metric=None, tol=DEFAULT_TOL):
    """Commutator ``[F, pi(Y_lm)]`` on the top shell of each truncation.

    Each row holds ``comm_norm`` (restriction to the forms of degree
    ``lmax``) and, as a diagnostic, ``full_norm`` (the whole truncated
    operator, which converges to the nonzero norm of the limiting compact
    commutator rather than to zero).
    """
    metric = MetricField.round() if metric is None else metric
    fl, fm_ = f_lm
    rows = []
    for lmax in lmax_list:
        basis = build_basis(lmax)
        S = sigma_gram(basis)
        E = np.eye(basis.dim, basis.N, dtype=np.complex128)
        gamma = gamma_from_metric(basis, metric, tol)
        mult = multiplication_operator(basis, harmonic(fl, fm_, basis.theta, basis.phi))
        P = PolarizedModule(S, (mult,), E)
        fm = lift(P, gamma, tol, rep_tol=np.inf)
        frame = Frame(fm.gram)
        C = fm.F @ mult - mult @ fm.F
        rows.append({
            "lmax": int(lmax),
            "f_l": int(fl),
            "f_m": int(fm_),
            "comm_norm": _top_shell_norm(basis, frame, C),
            "full_norm": frame.norm(C),
        })
    return rows


def sphere_real_structure(basis, func_lmax=None):
    """Complex conjugation of forms: ``(l, m) -> (-1)^m (l, -m)`` in both blocks, ``epsilon = -1``."""
    N = basis.N
    index = {lm: j for j, lm in enumerate(basis.lms)}
    J = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    for j, (l, m) in enumerate(basis.lms):
        k = index[(l, -m)]
        sign = (-1.0) ** m
        J[k, j] = sign
        J[N + k, N + j] = sign
    c_map = None
    if func_lmax is not None:
        flms = function_lms(func_lmax)
        findex = {lm: j for j, lm in enumerate(flms)}
        c_map = np.zeros((len(flms), len(flms)))
        for i, (l, m) in enumerate(flms):
            c_map[i, findex[(l, -m)]] = (-1.0) ** m
    return RealStructure(J, -1, c_map)


def bridge_check(basis, metric, func_lmax, tol=DEFAULT_TOL, cmp_tol=SPHERE_TOL):
    """Transport the round lift to ``metric`` by the generalized Moebius map and
    compare with the direct lift; ``F``, ``gamma`` and ``gram`` are checks, the
    representation drift is a diagnostic."""
    P = canonical_polarized(basis, func_lmax)
    g_round = gamma_from_metric(basis, MetricField.round(), tol)
    g_metric = gamma_from_metric(basis, metric, tol)
    fm_round = lift(P, g_round, tol, rep_tol=np.inf)
    fm_metric = lift(P, g_metric, tol, rep_tol=np.inf)
    gm = gen_moebius(P, g_metric, g_round, tol, rep_tol=np.inf)
    moved = apply_gen(gm, fm_round, tol)
    report = Report()
    rel = lambda X, Y: float(np.linalg.norm(X - Y, 2) / max(1.0, np.linalg.norm(Y, 2)))
    report.add("bridge_F", rel(moved.F, fm_metric.F), cmp_tol)
    report.add("bridge_gamma", rel(moved.gamma, fm_metric.gamma), cmp_tol)
    report.add("bridge_gram", rel(moved.gram, fm_metric.gram), cmp_tol)
    report.note("bridge_pi", max((rel(a, b) for a, b in zip(moved.pi, fm_metric.pi)), default=0.0))
    return report


def trace_invariance_check(fm, u, f_list, g_list, tol=1e-10):
    """``trace(sum f_i [F, g_i])`` before and after ``F -> u F u^{-1}``.

    ``f_list`` and ``g_list`` hold operators or indices into ``fm.pi``.
    """
    if commutant_residual(fm, (u,), max(tol, DEFAULT_TOL)) > 1.0:
        raise NotInCommutant("u must commute with the representation")
    pick = lambda x: fm.pi[x] if isinstance(x, (int, np.integer)) else np.asarray(x, dtype=np.complex128)
    F = fm.F
    F2 = u @ F @ np.linalg.inv(u)
    before = after = 0.0
    for f, g in zip(f_list, g_list):
        f, g = pick(f), pick(g)
        before = before + np.trace(f @ (F @ g - g @ F))
        after = after + np.trace(f @ (F2 @ g - g @ F2))
    report = Report()
    report.add("trace_difference", abs(before - after), tol)
    report.note("trace", [float(np.real(before)), float(np.imag(before))])
    return report
