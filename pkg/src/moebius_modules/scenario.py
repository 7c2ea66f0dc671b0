"""Scenario files: JSON documents describing algebras, transformations and modules."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SchemaError
from .fredholm import FredholmModule
from .moebius import MoebiusElement, from_x, omega_param
from .numerics import DEFAULT_TOL, matrix_from_json
from .polarized import PolarizedModule
from .projective import TwoByTwoA
from .star_algebra import generate_algebra

__all__ = ["Scenario", "load_scenario", "parse_scenario", "resolve_path", "resolve_tol"]

_MATRIX = {
    "type": "object",
    "required": ["rows", "cols", "data"],
    "properties": {
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "data": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
        },
    },
}
_MATRIX_OR_NULL = {"oneOf": [_MATRIX, {"type": "null"}]}
_MATRICES = {"type": "array", "items": _MATRIX}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "algebra": {
            "type": "object",
            "required": ["ambient_dim", "generators"],
            "additionalProperties": False,
            "properties": {
                "ambient_dim": {"type": "integer", "minimum": 1},
                "generators": _MATRICES,
                "grading": _MATRIX_OR_NULL,
            },
        },
        "transform": {
            "type": "object",
            "required": ["a", "b"],
            "additionalProperties": False,
            "properties": {"a": _MATRIX, "b": _MATRIX, "c": _MATRIX_OR_NULL, "d": _MATRIX_OR_NULL},
        },
        "involution": _MATRIX,
        "moebius": {
            "oneOf": [
                {"type": "object", "required": ["a", "b"], "additionalProperties": False,
                 "properties": {"a": _MATRIX, "b": _MATRIX}},
                {"type": "object", "required": ["x"], "additionalProperties": False,
                 "properties": {"x": _MATRIX}},
                {"type": "object", "required": ["omega"], "additionalProperties": False,
                 "properties": {"omega": _MATRIX}},
            ]
        },
        "fredholm": {
            "type": "object",
            "required": ["pi", "F"],
            "additionalProperties": False,
            "properties": {"pi": _MATRICES, "gamma": _MATRIX_OR_NULL, "F": _MATRIX,
                           "gram": _MATRIX_OR_NULL},
        },
        "polarized": {
            "type": "object",
            "required": ["S", "pi", "E"],
            "additionalProperties": False,
            "properties": {"S": _MATRIX, "pi": _MATRICES, "E": _MATRIX, "gammas": _MATRICES},
        },
    },
}


@dataclass
class Scenario:
    name: str = ""
    tol: float | None = None
    seed: int | None = None
    algebra: object = None
    transform: TwoByTwoA | None = None
    involution: np.ndarray | None = None
    moebius: MoebiusElement | None = None
    fredholm: FredholmModule | None = None
    polarized: PolarizedModule | None = None
    gammas: list = field(default_factory=list)


def _square(M, n, what):
    if M.shape != (n, n):
        raise SchemaError(f"{what} has shape {M.shape}, expected ({n}, {n})")
    return M


def parse_scenario(doc):
    """Validate ``doc`` against the schema and build the objects it describes."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None
    sc = Scenario(name=doc.get("name", ""), tol=doc.get("tol"), seed=doc.get("seed"))

    n = None

    def dim_of(M, what):
        nonlocal n
        if n is None:
            n = M.shape[0]
        return _square(M, n, what)

    if "algebra" in doc:
        spec = doc["algebra"]
        n = spec["ambient_dim"]
        gens = [dim_of(matrix_from_json(g), "algebra generator") for g in spec["generators"]]
        grading = spec.get("grading")
        grading = None if grading is None else dim_of(matrix_from_json(grading), "grading")
        sc.algebra = generate_algebra(n, gens, grading=grading)
    if "transform" in doc:
        t = doc["transform"]
        a, b = (dim_of(matrix_from_json(t[k]), f"transform.{k}") for k in ("a", "b"))
        c = b if t.get("c") is None else dim_of(matrix_from_json(t["c"]), "transform.c")
        d = a if t.get("d") is None else dim_of(matrix_from_json(t["d"]), "transform.d")
        sc.transform = TwoByTwoA(a, b, c, d)
    if "involution" in doc:
        sc.involution = dim_of(matrix_from_json(doc["involution"]), "involution")

    fred = doc.get("fredholm")
    gram = None
    if fred is not None:
        F = dim_of(matrix_from_json(fred["F"]), "fredholm.F")
        pis = [dim_of(matrix_from_json(p), "fredholm.pi") for p in fred["pi"]]
        gamma = None if fred.get("gamma") is None else dim_of(matrix_from_json(fred["gamma"]), "fredholm.gamma")
        gram = None if fred.get("gram") is None else dim_of(matrix_from_json(fred["gram"]), "fredholm.gram")
        sc.fredholm = FredholmModule(tuple(pis), F, gamma, gram)
    if "moebius" in doc:
        mo = doc["moebius"]
        if "x" in mo:
            sc.moebius = from_x(dim_of(matrix_from_json(mo["x"]), "moebius.x"), gram=gram)
        elif "omega" in mo:
            sc.moebius = omega_param(dim_of(matrix_from_json(mo["omega"]), "moebius.omega"), gram=gram)
        else:
            a = dim_of(matrix_from_json(mo["a"]), "moebius.a")
            b = dim_of(matrix_from_json(mo["b"]), "moebius.b")
            sc.moebius = MoebiusElement(a, b, gram=gram)
    if "polarized" in doc:
        pol = doc["polarized"]
        S = matrix_from_json(pol["S"])
        m = S.shape[0]
        _square(S, m, "polarized.S")
        E = matrix_from_json(pol["E"])
        if E.shape[0] != m:
            raise SchemaError(f"polarized.E has {E.shape[0]} rows, expected {m}")
        pis = [_square(matrix_from_json(p), m, "polarized.pi") for p in pol["pi"]]
        sc.polarized = PolarizedModule(S, tuple(pis), E)
        sc.gammas = [_square(matrix_from_json(g), m, "polarized.gammas") for g in pol.get("gammas", [])]
    return sc


def resolve_path(path):
    """``path`` itself, or a bundled scenario of that file name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = resources.files("moebius_modules").joinpath("scenarios", p.name)
    if bundled.is_file():
        return Path(str(bundled))
    raise SchemaError(f"scenario file not found: {path}")


def load_json(path):
    p = resolve_path(path)
    try:
        return json.loads(p.read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise SchemaError(f"cannot read {p}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p} is not valid JSON: {exc}") from None


def load_scenario(path):
    return parse_scenario(load_json(path))


def resolve_tol(flag=None, scenario_tol=None, default=DEFAULT_TOL):
    """Flag, then scenario, then ``MOEBIUS_TOL``, then ``default``."""
    if flag is not None:
        return float(flag)
    if scenario_tol is not None:
        return float(scenario_tol)
    env = os.environ.get("MOEBIUS_TOL")
    if env:
        try:
            value = float(env)
        except ValueError:
            raise SchemaError(f"MOEBIUS_TOL is not a number: {env!r}") from None
        if not value > 0:
            raise SchemaError("MOEBIUS_TOL must be positive")
        return value
    return default
