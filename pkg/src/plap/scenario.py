"""Self-contained scenario documents: parsing, validation, and realization.

A scenario is a single JSON document naming the domain, the problem data
(with weights inlined as coordinate expression strings), solver
tolerances, the continuation schedule, and output options.  Validation
errors carry the JSON field path; syntax errors carry line and column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .expressions import ExpressionError, evaluate_on_domain, parse_expression
from .mesh import Domain, MeshError, ScalarField
from .subsuper import ProblemSpec, ProblemSpecError

__all__ = ["ScenarioError", "Scenario", "load_scenario", "scenario_from_dict"]


class ScenarioError(ValueError):
    """Malformed scenario configuration; message carries field diagnostics."""


@dataclass
class Scenario:
    name: str
    domain: Domain
    problem: ProblemSpec
    tol: float = 1e-10
    eigen_tol: float = 1e-10
    fp_tol: float = 1e-9
    fp_max_iter: int = 2000
    stages: int = 8
    q0: float | None = None
    check_n_u: int = 33
    check_n_s: int = 17
    figures: bool = True
    seed: int = 0
    raw: dict = dc_field(default_factory=dict)

    @property
    def wants_continuation(self) -> bool:
        return self.problem.form == "two-param" and abs(self.problem.q - self.problem.p) <= 1e-12


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}.{key}: missing required field")
    return d[key]


def _num(d: dict, key: str, path: str, default=None, minimum=None, strict_min=None):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{path}.{key}: missing required number")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {v!r}")
    v = float(v)
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{path}.{key}: must be >= {minimum}, got {v}")
    if strict_min is not None and v <= strict_min:
        raise ScenarioError(f"{path}.{key}: must be > {strict_min}, got {v}")
    return v


def _int(d: dict, key: str, path: str, default=None, minimum=None):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{path}.{key}: missing required integer")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"{path}.{key}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ScenarioError(f"{path}.{key}: must be >= {minimum}, got {v}")
    return v


def _weight_field(d: dict, key: str, path: str, dom: Domain, default: str | None = None) -> ScalarField:
    src = d.get(key, default)
    if src is None:
        raise ScenarioError(f"{path}.{key}: missing required expression string")
    if not isinstance(src, str):
        raise ScenarioError(f"{path}.{key}: expected an expression string, got {src!r}")
    try:
        vals = evaluate_on_domain(parse_expression(src), dom)
    except ExpressionError as e:
        raise ScenarioError(f"{path}.{key}: {e}") from e
    if np.any(vals < 0):
        raise ScenarioError(f"{path}.{key}: weight expression takes negative values")
    if np.max(vals) <= 0:
        raise ScenarioError(f"{path}.{key}: weight expression is identically zero")
    return ScalarField(dom, vals)


def _build_domain(d: dict, h_override: float | None) -> Domain:
    kind = _need(d, "kind", "domain")
    try:
        if kind == "interval":
            length = _num(d, "length", "domain", default=1.0, strict_min=0.0)
            cells = _int(d, "cells", "domain", default=256, minimum=2)
            if h_override:
                cells = max(2, round(length / h_override))
            return Domain.interval(length, cells)
        if kind == "rectangle":
            lengths = d.get("lengths", [1.0, 1.0])
            if not (isinstance(lengths, list) and len(lengths) == 2):
                raise ScenarioError("domain.lengths: expected a [Lx, Ly] pair")
            cells = d.get("cells", [64, 64])
            if isinstance(cells, int):
                cells = [cells, cells]
            if not (isinstance(cells, list) and len(cells) == 2):
                raise ScenarioError("domain.cells: expected an [nx, ny] pair")
            if h_override:
                cells = [max(2, round(float(L) / h_override)) for L in lengths]
            return Domain.rectangle(tuple(map(float, lengths)), tuple(map(int, cells)))
        if kind == "ball":
            radius = _num(d, "radius", "domain", default=1.0, strict_min=0.0)
            dimension = _int(d, "dimension", "domain", default=2, minimum=2)
            cells = _int(d, "cells", "domain", default=256, minimum=2)
            if h_override:
                cells = max(2, round(radius / h_override))
            return Domain.ball(radius, dimension, cells)
    except MeshError as e:
        raise ScenarioError(f"domain: {e}") from e
    raise ScenarioError(f"domain.kind: unknown kind {kind!r}")


def _build_problem(d: dict, dom: Domain) -> ProblemSpec:
    form = d.get("form", "two-param")
    p = _num(d, "p", "problem", strict_min=1.0)
    q = _num(d, "q", "problem", strict_min=1.0)
    lam = _num(d, "lambda", "problem", minimum=0.0)
    try:
        if form == "two-param":
            beta = _num(d, "beta", "problem", minimum=0.0)
            a = _num(d, "a", "problem", strict_min=0.0)
            b = _num(d, "b", "problem", strict_min=0.0)
            w1 = _weight_field(d, "omega1", "problem", dom, default="1")
            w2 = _weight_field(d, "omega2", "problem", dom, default="1")
            return ProblemSpec(p=p, q=q, lam=lam, beta=beta, a=a, b=b, omega1=w1, omega2=w2)
        if form == "example1":
            w = _weight_field(d, "omega", "problem", dom, default="1")
            return ProblemSpec(p=p, q=q, lam=lam, beta=0.0, omega1=w, omega2=w, form="example1")
        if form == "example2":
            c0 = _num(d, "c0", "problem", strict_min=0.0)
            c1 = _num(d, "c1", "problem", strict_min=0.0)
            env = _weight_field(d, "envelope", "problem", dom, default=None)
            one = ScalarField(dom, np.ones(dom.shape))
            return ProblemSpec(
                p=p, q=q, lam=lam, beta=0.0, omega1=one, omega2=one,
                form="example2", env=env, c0=c0, c1=c1,
            )
    except ProblemSpecError as e:
        raise ScenarioError(f"problem: {e}") from e
    raise ScenarioError(f"problem.form: unknown form {form!r}")


def scenario_from_dict(doc: dict, h_override: float | None = None, tol_override: float | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("top level: expected a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: missing or empty scenario name")
    dom = _build_domain(_need(doc, "domain", ""), h_override)
    problem = _build_problem(_need(doc, "problem", ""), dom)
    sol = doc.get("solver", {})
    if not isinstance(sol, dict):
        raise ScenarioError("solver: expected an object")
    sched = doc.get("schedule", {})
    if not isinstance(sched, dict):
        raise ScenarioError("schedule: expected an object")
    checks = doc.get("checks", {})
    if not isinstance(checks, dict):
        raise ScenarioError("checks: expected an object")
    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ScenarioError("output: expected an object")
    tol = tol_override if tol_override is not None else _num(sol, "tol", "solver", default=1e-10, strict_min=0.0)
    sc = Scenario(
        name=name,
        domain=dom,
        problem=problem,
        tol=tol,
        eigen_tol=_num(sol, "eigen_tol", "solver", default=1e-10, strict_min=0.0),
        fp_tol=_num(sol, "fp_tol", "solver", default=1e-9, strict_min=0.0),
        fp_max_iter=_int(sol, "fp_max_iter", "solver", default=2000, minimum=1),
        stages=_int(sched, "stages", "schedule", default=8, minimum=1),
        q0=sched.get("q0"),
        check_n_u=_int(checks, "n_u", "checks", default=33, minimum=2),
        check_n_s=_int(checks, "n_s", "checks", default=17, minimum=2),
        figures=bool(out.get("figures", True)),
        seed=_int(doc, "seed", "", default=0, minimum=0),
        raw=doc,
    )
    if sc.q0 is not None:
        if isinstance(sc.q0, bool) or not isinstance(sc.q0, (int, float)):
            raise ScenarioError("schedule.q0: expected a number")
        sc.q0 = float(sc.q0)
        if not (1.0 < sc.q0 < sc.problem.p):
            raise ScenarioError(f"schedule.q0: need 1 < q0 < p, got {sc.q0}")
    return sc


def load_scenario(path, h_override: float | None = None, tol_override: float | None = None) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return scenario_from_dict(doc, h_override=h_override, tol_override=tol_override)
    except ScenarioError as e:
        raise ScenarioError(f"{path}: {e}") from e
