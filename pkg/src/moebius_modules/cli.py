"""Command-line driver: ``verify``, ``sphere`` and ``orbit`` subcommands.

Exit status is 0 when every check passes, 1 when a check fails (or a
numerical precondition such as commutant membership is violated) and 2 for
unreadable or schema-invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from .errors import MoebiusError, SchemaError
from .fredholm import commutator_transform_residual, homotopy_sample, moebius_act, validate_fredholm
from .moebius import classify, connes_check, polar, polar_reconstruct
from .numerics import DEFAULT_TOL, SPHERE_TOL, identity, matrix_to_json, op_norm
from .polarized import (
    apply_gen,
    cayley_between,
    cayley_relation_check,
    compatible_check,
    gen_connes_check,
    gen_moebius,
    gen_polar,
    gen_polar_residual,
    lift,
    real_polarized_check,
    subspace_gap,
    underlying_polarized,
    validate_polarized,
)
from .projective import (
    act_on_involution,
    commutation_identities,
    g_inverse,
    gc_sample_check,
    in_G,
    kernel_N_check,
    schur_identities,
)
from .report import Report
from .scenario import load_json, load_scenario, resolve_tol
from .sphere_geometry import (
    MetricField,
    bridge_check,
    build_basis,
    canonical_polarized,
    commutator_decay,
    hodge_involution,
    sigma_gram,
    sphere_real_structure,
)
from .fredholm import real_check

__all__ = ["build_parser", "main"]

DECAY_FIELDS = ["lmax", "f_l", "f_m", "comm_norm"]


class Run:
    """Collects section reports, timing each section and trapping numerical errors."""

    def __init__(self):
        self.report = Report()
        self.times = {}
        self.errors = {}

    def section(self, name, fn):
        start = time.perf_counter()
        try:
            result = fn()
        except MoebiusError as exc:
            self.report.add(f"{name}.error", math.inf, 0.0)
            self.errors[name] = f"{type(exc).__name__}: {exc}"
            result = None
        else:
            if isinstance(result, Report):
                self.report.merge(result, prefix=f"{name}.")
        self.times[name] = time.perf_counter() - start
        return result


def _plain(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _write_report(path, command, params, run, extra=None, started=None):
    doc = {
        "command": command,
        "parameters": params,
        "checks": [
            {"name": c.name, "residual": c.residual, "threshold": c.threshold, "passed": c.passed,
             "wall_time_s": run.times.get(c.name.split(".")[0], 0.0)}
            for c in run.report.checks.values()
        ],
        "diagnostics": run.report.diagnostics,
        "errors": run.errors,
        "sections": [{"name": k, "wall_time_s": v} for k, v in run.times.items()],
        "passed": run.report.passed,
        "wall_time_s": time.perf_counter() - started if started is not None else 0.0,
    }
    if extra:
        doc.update(extra)
    text = json.dumps(_plain(doc), indent=2, sort_keys=True)
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _summary(run, out=sys.stderr):
    for c in run.report.checks.values():
        if not c.passed:
            print(f"FAIL {c.name}: residual {c.residual:.3e} >= {c.threshold:.3e}", file=out)
    for name, msg in run.errors.items():
        print(f"ERROR {name}: {msg}", file=out)
    status = "PASS" if run.report.passed else "FAIL"
    print(f"{status}: {sum(c.passed for c in run.report.checks.values())}/{len(run.report.checks)} checks",
          file=out)


# ---------------------------------------------------------------- verify


def _verify_algebra(alg, tol):
    from .star_algebra import center, commutant

    report = alg.validate(tol)
    report.note("commutant_dim", commutant(alg, tol).dim)
    report.note("center_dim", center(alg, tol).dim)
    return report


def _verify_transform(sc, tol, seed):
    T = sc.transform
    report = Report()
    member = in_G(T, tol)
    report.note("in_G", member)
    if member:
        Ti = g_inverse(T, tol)
        one = identity(2 * T.n)
        report.add("inverse_left", op_norm((Ti @ T).block() - one), 10 * tol)
        report.add("inverse_right", op_norm((T @ Ti).block() - one), 10 * tol)
        report.note("schur_identities", schur_identities(T.a, T.b, tol).passed)
    if sc.algebra is not None:
        report.note("in_kernel_N", kernel_N_check(T, sc.algebra, tol))
        if member:
            sampled = gc_sample_check(T, sc.algebra, np.random.default_rng(seed), tol=tol)
            report.note("gc_sampled", sampled.passed)
            report.merge(Report(diagnostics=sampled.diagnostics), prefix="gc_")
    if sc.involution is not None:
        f = sc.involution
        fp = act_on_involution(T, f, tol)
        report.add("image_involution", op_norm(fp @ fp - identity(T.n)), 10 * tol * max(1.0, op_norm(fp)) ** 2)
        flag = commutation_identities(T.a, T.b, f, tol).passed
        sa = op_norm(fp - fp.conj().T) <= 10 * tol * max(1.0, op_norm(fp))
        report.note("commutation_flag", flag)
        report.note("image_selfadjoint", bool(sa))
        report.note("image", matrix_to_json(fp))
    return report


def _verify_moebius(sc, tol):
    g = sc.moebius
    report = connes_check(g.a, g.b, tol, g.gram)
    cls = classify(g, tol)
    report.note("classification", cls.kind)
    scale = max(1.0, op_norm(g.a), op_norm(g.b))
    for side in ("left", "right"):
        u, m = polar(g, side, tol)
        report.add(f"polar_{side}", polar_reconstruct(u, m, side, g.gram).distance(g), 10 * tol * scale**2)
    return report


def _verify_action(sc, tol):
    g, fm = sc.moebius, sc.fredholm
    out = moebius_act(g, fm, tol=tol)
    report = validate_fredholm(out, 10 * tol)
    worst = max((commutator_transform_residual(g, fm, p, tol) for p in fm.pi), default=0.0)
    report.add("commutator_transform", worst, 10 * tol * max(1.0, op_norm(g.block())) ** 2)
    report.note("F_image", matrix_to_json(out.F))
    return report


def _verify_polarized(sc, tol):
    P = sc.polarized
    report = validate_polarized(P, tol)
    for k, gam in enumerate(sc.gammas):
        report.merge(compatible_check(P, gam, tol), prefix=f"gamma{k}.")
        fm = lift(P, gam, tol)
        report.merge(validate_fredholm(fm, 10 * tol), prefix=f"lift{k}.")
        back = underlying_polarized(fm, tol)
        report.add(f"roundtrip{k}.S", op_norm(back.S - P.S), 10 * tol * max(1.0, op_norm(P.S)))
        report.add(f"roundtrip{k}.E", subspace_gap(back.E, P.orthonormal_E()), 10 * tol)
    for k in range(len(sc.gammas) - 1):
        g1, g2 = sc.gammas[k], sc.gammas[k + 1]
        m = cayley_between(P, g1, g2, tol)
        report.merge(cayley_relation_check(P, g1, g2, m, 10 * tol), prefix=f"cayley{k}{k + 1}.")
        gm = gen_moebius(P, g2, g1, tol)
        report.merge(gen_connes_check(gm, 10 * tol, P.pi), prefix=f"gen{k + 1}{k}.")
        mm, W = gen_polar(gm, tol)
        report.add(f"gen{k + 1}{k}.polar", gen_polar_residual(gm, mm, W), 10 * tol)
        moved = apply_gen(gm, lift(P, g1, tol), tol)
        target = lift(P, g2, tol)
        report.add(f"gen{k + 1}{k}.apply_F", op_norm(moved.F - target.F), 100 * tol)
        report.add(f"gen{k + 1}{k}.apply_gamma", op_norm(moved.gamma - target.gamma), 100 * tol)
    return report


def cmd_verify(args):
    started = time.perf_counter()
    try:
        sc = load_scenario(args.scenario)
        tol = resolve_tol(args.tol, sc.tol)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else (sc.seed if sc.seed is not None else 0)
    run = Run()
    if sc.algebra is not None:
        run.section("algebra", lambda: _verify_algebra(sc.algebra, tol))
    if sc.transform is not None:
        run.section("transform", lambda: _verify_transform(sc, tol, seed))
    if sc.moebius is not None:
        run.section("moebius", lambda: _verify_moebius(sc, tol))
    if sc.fredholm is not None:
        run.section("fredholm", lambda: validate_fredholm(sc.fredholm, tol))
    if sc.moebius is not None and sc.fredholm is not None:
        run.section("action", lambda: _verify_action(sc, tol))
    if sc.polarized is not None:
        run.section("polarized", lambda: _verify_polarized(sc, tol))
    params = {"scenario": str(args.scenario), "name": sc.name, "tol": tol, "seed": seed}
    _write_report(args.report, "verify", params, run, started=started)
    _summary(run)
    return 0 if run.report.passed else 1


# ---------------------------------------------------------------- orbit


def cmd_orbit(args):
    started = time.perf_counter()
    try:
        sc = load_scenario(args.scenario)
        tol = resolve_tol(args.tol, sc.tol)
        if sc.fredholm is None or sc.moebius is None:
            raise SchemaError("orbit needs both 'fredholm' and 'moebius' entries")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    g, fm = sc.moebius, sc.fredholm
    run = Run()
    extra = {}

    def orbit():
        out = moebius_act(g, fm, tol=tol)
        report = validate_fredholm(out, 10 * tol)
        extra["orbit"] = {"F": matrix_to_json(out.F),
                          "gamma": None if out.gamma is None else matrix_to_json(out.gamma)}
        return report

    def factors():
        report = Report()
        for side in ("left", "right"):
            u, m = polar(g, side, tol)
            scale = max(1.0, op_norm(g.a), op_norm(g.b))
            report.add(f"{side}_reconstruction", polar_reconstruct(u, m, side, g.gram).distance(g),
                       10 * tol * scale**2)
            extra.setdefault("polar", {})[side] = {"u": matrix_to_json(u), "m": matrix_to_json(m)}
        return report

    def path():
        summary = homotopy_sample(g, fm, args.steps, tol)
        extra["homotopy"] = {"t": summary.ts, "steps": summary.steps}
        return summary.report

    run.section("orbit", orbit)
    if "orbit" in extra:
        run.section("polar", factors)
        run.section("homotopy", path)
    params = {"scenario": str(args.scenario), "name": sc.name, "tol": tol, "steps": args.steps}
    _write_report(args.report, "orbit", params, run, extra, started=started)
    _summary(run)
    return 0 if run.report.passed else 1


# ---------------------------------------------------------------- sphere


def decay_levels(lmax):
    levels = sorted({math.ceil(lmax / 2), math.ceil(3 * lmax / 4), lmax})
    return [lv for lv in levels if lv >= 1]


def cmd_sphere(args):
    started = time.perf_counter()
    try:
        if args.lmax < 1:
            raise SchemaError("--lmax must be at least 1")
        func_lmax = args.func_lmax if args.func_lmax is not None else min(2, args.lmax)
        if not 0 <= func_lmax <= args.lmax:
            raise SchemaError("--func-lmax must lie in [0, lmax]")
        metric = MetricField.round() if args.metric is None else MetricField.from_json(load_json(args.metric))
        sphere_tol = resolve_tol(args.tol, None, SPHERE_TOL)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    tol = DEFAULT_TOL
    exact_class = metric.kind in ("round", "conformal")
    rep_tol = tol if exact_class else math.inf
    run = Run()
    state = {}

    def structure():
        basis = build_basis(args.lmax)
        S = sigma_gram(basis)
        N = basis.N
        P = canonical_polarized(basis, func_lmax)
        state.update(basis=basis, P=P)
        report = validate_polarized(P, tol)
        report.add("isotropy_max", float(np.max(np.abs(S[:N, :N]))), 1e-10)
        report.add("S_hermitian", float(np.max(np.abs(S - S.conj().T))), 1e-12)
        report.note("dim", basis.dim)
        return report

    def lifts():
        basis, P = state["basis"], state["P"]
        g_round, _ = hodge_involution(basis, MetricField.round(), tol)
        g_metric, info = hodge_involution(basis, metric, tol)
        fm_round = lift(P, g_round, tol)
        fm_metric = lift(P, g_metric, tol, rep_tol)
        state.update(fm_round=fm_round, fm_metric=fm_metric)
        N = basis.N
        report = Report()
        target = np.diag(np.r_[np.ones(N), -np.ones(N)])
        report.add("round_F_block", float(np.max(np.abs(fm_round.F - target))), tol)
        report.merge(validate_fredholm(fm_round, tol, check_homomorphism=False), prefix="round.")
        report.merge(validate_fredholm(fm_metric, tol, rep_tol, check_homomorphism=False), prefix="metric.")
        delta = op_norm(g_metric - g_round)
        if exact_class:
            report.add("gamma_conformal_delta", delta, 1e-7)
        else:
            report.note("gamma_conformal_delta", delta)
        report.note("repair_norm", info["repair_norm"])
        report.note("metric_kind", metric.kind)
        return report

    def bridge():
        return bridge_check(state["basis"], metric, func_lmax, tol, sphere_tol)

    def real():
        basis = state["basis"]
        rs = sphere_real_structure(basis, func_lmax)
        report = Report()
        report.merge(real_check(state["fm_round"], rs, tol), prefix="round.")
        report.merge(real_check(state["fm_metric"], rs, tol), prefix="metric.")
        report.merge(real_polarized_check(state["P"], rs, tol), prefix="polarized.")
        return report

    rows = []

    def decay():
        levels = decay_levels(args.lmax)
        rows.extend(commutator_decay((1, 0), levels, metric, tol))
        report = Report()
        worst = max((rows[k + 1]["comm_norm"] / rows[k]["comm_norm"] for k in range(len(rows) - 1)),
                    default=0.0)
        report.add("nonincreasing_ratio", worst, 1.05)
        report.note("table", rows)
        return report

    run.section("structure", structure)
    if "basis" in state:
        run.section("lift", lifts)
        if "fm_metric" in state:
            run.section("bridge", bridge)
            run.section("real", real)
    run.section("decay", decay)
    if args.decay and rows:
        with open(args.decay, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=DECAY_FIELDS, extrasaction="ignore", lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({**row, "comm_norm": repr(row["comm_norm"])})
    params = {"lmax": args.lmax, "func_lmax": func_lmax, "metric": metric.spec,
              "sphere_tol": sphere_tol, "tol": tol}
    _write_report(args.report, "sphere", params, run, started=started)
    _summary(run)
    return 0 if run.report.passed else 1


# ---------------------------------------------------------------- entry point


def build_parser():
    parser = argparse.ArgumentParser(prog="moebius", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None, help="check tolerance (default: MOEBIUS_TOL or built-in)")
        p.add_argument("--report", default=None, help="write the JSON report here (default: stdout)")

    v = sub.add_parser("verify", help="run every check applicable to a scenario")
    v.add_argument("scenario", help="scenario JSON path or bundled scenario name")
    v.add_argument("--seed", type=int, default=None)
    common(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sphere", help="spectral sphere model: structure, lifts, bridge, real structure, decay")
    s.add_argument("--lmax", type=int, default=6)
    s.add_argument("--func-lmax", type=int, default=None)
    s.add_argument("--metric", default=None, help="metric JSON (default: round)")
    s.add_argument("--decay", default=None, help="write the commutator decay table as CSV")
    s.add_argument("--seed", type=int, default=None)
    common(s)
    s.set_defaults(func=cmd_sphere)

    o = sub.add_parser("orbit", help="Moebius image of a Fredholm module, polar factors and homotopy path")
    o.add_argument("scenario")
    o.add_argument("--steps", type=int, default=16)
    common(o)
    o.set_defaults(func=cmd_orbit)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if getattr(args, "steps", 1) is not None and getattr(args, "steps", 1) < 1:
        print("--steps must be at least 1", file=sys.stderr)
        return 2
    return args.func(args)


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
