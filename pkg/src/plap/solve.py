"""Sandwiched fixed-point solutions and the homogeneous-limit continuation.

The frozen-gradient iteration solves, at every step, a torsion-type
problem whose right-hand side is the nonlinearity evaluated at the
previous iterate (value and gradient both frozen).  Iterates start at
the sub-solution; membership in the order interval is monitored at every
step and violations are flagged, never clamped away.

The continuation drives q up to p through the schedule
q_n = p - (p - q0) 2^(-n), records the normalized amplitude and the
induced multiplier lambda_q = lam / sup(v_q)^(p-q) at each stage, and
extrapolates the limit multiplier from the final three stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import EigenPair
from .mesh import Domain, ScalarField, nodal_gradient_magnitude, sup_norm, weak_residual
from .plaplace import PLapSolver, TorsionData
from .subsuper import ProblemSpec, SubSuperPair, build_pair, nonlinearity

__all__ = [
    "SolveReport",
    "StageRecord",
    "ContinuationTrace",
    "frozen_gradient_solve",
    "continuation_q_to_p",
    "homogeneity_check",
    "nonexistence_probe",
    "ProbeReport",
]


@dataclass
class SolveReport:
    solution: ScalarField
    iterations: int
    residual: float
    sup_u: float
    converged: bool
    sandwich_pass: bool
    margin_low: float
    margin_high: float
    escaped: bool
    trace: list = field(default_factory=list)  # (sup_norm, step_diff) per iteration

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "sup_u": self.sup_u,
            "converged": self.converged,
            "sandwich_pass": self.sandwich_pass,
            "margin_low": self.margin_low,
            "margin_high": self.margin_high,
            "escaped": self.escaped,
            "trace": [[a, b] for a, b in self.trace],
        }


def frozen_gradient_solve(
    ps: ProblemSpec,
    pair: SubSuperPair,
    tol: float = 1e-9,
    max_iter: int = 400,
    solver: PLapSolver | None = None,
    init: ScalarField | None = None,
    stop_scale: float = 1.0,
    monitor: float = 1e-8,
) -> SolveReport:
    """Iterate u <- solve(-div(|grad u|^{p-2} grad u) = f(x, u_prev, grad u_prev)).

    Stops once sup|u_next - u| <= tol * max(sup_u, stop_scale).  The default
    floor stop_scale = 1 suits order-one solutions; continuation stages with
    minuscule amplitudes pass stop_scale = 0 for a fully relative criterion.
    The frozen right-hand side is clamped at 0 from below (discrete
    undershoot is noise; the nonlinearity is nonnegative by hypothesis).
    """
    if not pair.ordered:
        raise ValueError("the sub/super pair is not ordered")
    dom = ps.domain
    solver = solver or PLapSolver(dom, ps.p)
    f = nonlinearity(ps)
    sub_v, sup_v = pair.sub.values, pair.super.values
    if init is not None:
        u = np.minimum(np.maximum(init.values, sub_v), sup_v)
    else:
        u = sub_v.copy()
    trace: list[tuple[float, float]] = []
    escaped = False
    converged = False
    iterations = 0
    w = None
    for iterations in range(1, max_iter + 1):
        s = _grad_mag(dom, u)
        rhs = np.maximum(f(u, s), 0.0)
        w, _ = solver.solve(rhs, init=w if w is not None else u)
        diff = float(np.max(np.abs(w - u)))
        u = w
        sup_u = float(np.max(u))
        trace.append((sup_u, diff))
        lo = float(np.min(u - sub_v))
        hi = float(np.min(sup_v - u))
        slack = monitor * max(sup_u, 1e-300)
        if lo < -slack or hi < -slack:
            escaped = True
        if diff <= tol * max(sup_u, stop_scale):
            converged = True
            break

    s = _grad_mag(dom, u)
    rhs_field = ScalarField(dom, np.maximum(f(u, s), 0.0))
    sol = ScalarField(dom, u, dirichlet=True)
    residual = weak_residual(sol, rhs_field, ps.p)
    sup_u = sup_norm(sol)
    margin_low = float(np.min(u - sub_v))
    margin_high = float(np.min(sup_v - u))
    slack = monitor * max(sup_u, 1e-300)
    return SolveReport(
        solution=sol,
        iterations=iterations,
        residual=residual,
        sup_u=sup_u,
        converged=converged,
        sandwich_pass=(margin_low >= -slack and margin_high >= -slack),
        margin_low=margin_low,
        margin_high=margin_high,
        escaped=escaped,
        trace=trace,
    )


def _grad_mag(dom: Domain, values: np.ndarray) -> np.ndarray:
    return nodal_gradient_magnitude(ScalarField(dom, values)).values


# ---------------------------------------------------------------------------
# continuation q -> p^-
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageRecord:
    n: int
    q: float
    sup_v: float
    lambda_q: float
    iterations: int
    converged: bool
    bracket_ok: bool
    grad_sup: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "q": self.q,
            "sup_v": self.sup_v,
            "lambda_q": self.lambda_q,
            "iterations": self.iterations,
            "converged": self.converged,
            "bracket_ok": self.bracket_ok,
            "grad_sup": self.grad_sup,
        }


@dataclass
class ContinuationTrace:
    stages: list
    lambda_beta: float
    lambda_beta_err: float
    u_beta: ScalarField | None
    lambda_lower: float  # alpha - beta mu^b
    lambda_upper: float  # lambda1
    complete: bool

    @property
    def lambda_qs(self) -> list[float]:
        return [s.lambda_q for s in self.stages]

    def to_json_dict(self) -> dict:
        return {
            "stages": [s.to_json_dict() for s in self.stages],
            "lambda_beta": self.lambda_beta,
            "lambda_beta_err": self.lambda_beta_err,
            "lambda_lower": self.lambda_lower,
            "lambda_upper": self.lambda_upper,
            "complete": self.complete,
        }


def continuation_q_to_p(
    ps: ProblemSpec,
    td: TorsionData,
    ep: EigenPair,
    n_stages: int = 8,
    tol: float = 1e-9,
    bracket_slack: float = 1e-8,
    solver: PLapSolver | None = None,
    max_stage_iter: int | None = None,
) -> ContinuationTrace:
    """Run the schedule q_n = p - (p - q0) 2^(-n), n = 0 .. n_stages-1.

    Each stage builds its sub/super pair, solves by frozen-gradient
    iteration seeded with the previous stage's solution, and records
    sup(v_q) and lambda_q = lam / sup(v_q)^(p-q).  The two-sided amplitude
    bound lam/lambda1 <= sup(v_q)^(p-q) <= lam/(alpha - beta mu^b) is
    verified per stage.  The limit multiplier is the last value plus a
    geometric-sequence (Aitken) correction from the final three stages.
    """
    p, q0 = ps.p, ps.q
    if abs(ps.a + ps.b - (p - 1.0)) > 1e-12 * max(1.0, p - 1.0):
        raise ValueError("continuation requires a + b = p - 1")
    if not q0 < p:
        raise ValueError("continuation starts from q0 < p")
    solver = solver or PLapSolver(ps.domain, p)
    lam_lo = td.alpha - ps.beta * td.mu**ps.b
    if lam_lo <= 0:
        raise ValueError("beta violates beta < alpha / mu^b")

    stages: list[StageRecord] = []
    prev: ScalarField | None = None
    complete = True
    for n in range(n_stages):
        qn = p - (p - q0) * 2.0**-n
        ps_n = ps.at_q(qn)
        pair = build_pair(ps_n, td, ep)
        # the fixed-point contraction slows like 1 - (p - q)/(p - 1)
        max_iter = max_stage_iter or 2000 + int(40.0 * (p - 1.0) / (p - qn))
        rep = frozen_gradient_solve(
            ps_n, pair, tol=tol, max_iter=max_iter, solver=solver,
            init=prev, stop_scale=0.0,
        )
        sup_v = rep.sup_u
        lam_q = math.exp(math.log(ps.lam) - (p - qn) * math.log(sup_v)) if sup_v > 0 else math.inf
        amp = sup_v ** (p - qn)
        bracket_ok = (
            amp >= (ps.lam / ep.lambda1) * (1.0 - bracket_slack)
            and amp <= (ps.lam / lam_lo) * (1.0 + bracket_slack)
        )
        grad_sup = float(np.max(_grad_mag(ps.domain, rep.solution.values / sup_v))) if sup_v > 0 else 0.0
        stages.append(
            StageRecord(
                n=n, q=qn, sup_v=sup_v, lambda_q=lam_q,
                iterations=rep.iterations, converged=rep.converged,
                bracket_ok=bracket_ok, grad_sup=grad_sup,
            )
        )
        if not rep.converged:
            complete = False
            break
        prev = rep.solution

    lam_beta, err = _aitken([s.lambda_q for s in stages])
    u_beta = None
    if prev is not None and sup_norm(prev) > 0:
        u_beta = ScalarField(prev.domain, prev.values / np.max(prev.values), dirichlet=True)
    return ContinuationTrace(
        stages=stages,
        lambda_beta=lam_beta,
        lambda_beta_err=err,
        u_beta=u_beta,
        lambda_lower=lam_lo,
        lambda_upper=ep.lambda1,
        complete=complete,
    )


def _aitken(xs: list[float]) -> tuple[float, float]:
    """Limit estimate from the last three terms of a near-geometric sequence."""
    if not xs:
        return math.nan, math.nan
    if len(xs) < 3:
        return xs[-1], math.inf
    x1, x2, x3 = xs[-3:]
    d1, d2 = x2 - x1, x3 - x2
    if d1 == d2 or d2 == 0.0:
        return x3, abs(d2)
    correction = d2 * d2 / (d1 - d2)
    return x3 + correction, abs(correction)


# ---------------------------------------------------------------------------
# homogeneous-case diagnostics
# ---------------------------------------------------------------------------


def homogeneity_check(u: ScalarField, ps: ProblemSpec, k: float) -> tuple[float, float]:
    """Weak residuals of u and k*u against the same homogeneous problem.

    At q = p with a + b = p - 1 both sides of the equation scale by
    k^(p-1), so the two residuals must match under that factor.
    """
    if abs(ps.q - ps.p) > 1e-12:
        raise ValueError("homogeneity requires q = p")
    if abs(ps.a + ps.b - (ps.p - 1.0)) > 1e-12 * max(1.0, ps.p - 1.0):
        raise ValueError("homogeneity requires a + b = p - 1")
    f = nonlinearity(ps)
    dom = ps.domain

    def residual_of(scaled: np.ndarray) -> float:
        fld = ScalarField(dom, scaled, dirichlet=True)
        s = _grad_mag(dom, scaled)
        rhs = ScalarField(dom, np.maximum(f(scaled, s), 0.0))
        return weak_residual(fld, rhs, ps.p)

    return residual_of(u.values), residual_of(k * u.values)


@dataclass
class ProbeReport:
    outcome: str  # "collapsed" | "blew_up" | "growing" | "anomaly"
    growth_factors: list
    predicted_factor: float
    sup_history: list
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "growth_factors": self.growth_factors,
            "predicted_factor": self.predicted_factor,
            "sup_history": self.sup_history,
            "seed": self.seed,
        }


def nonexistence_probe(
    ps: ProblemSpec,
    td: TorsionData,
    ep: EigenPair,
    iters: int = 30,
    n_starts: int = 3,
    seed: int = 0,
    solver: PLapSolver | None = None,
    require_above: bool = True,
) -> list[ProbeReport]:
    """Probe the homogeneous problem at multipliers where no positive
    solution should exist.

    Runs the fixed-point iteration from several positive starts and
    reports whether iterates collapse toward zero or grow without bound;
    a converged strictly positive profile with small residual is flagged
    as an anomaly.  The asymptotic per-step growth factor is
    (lam/lambda1)^(1/(p-1)); for p = 2 this is the linear power-iteration
    rate lam/lambda1.
    """
    if abs(ps.q - ps.p) > 1e-12:
        raise ValueError("the probe runs at q = p")
    if require_above and ps.lam < ep.lambda1 * (1.0 + 1e-3):
        raise ValueError("the probe expects lam >= lambda1 * (1 + 1e-3)")
    dom = ps.domain
    solver = solver or PLapSolver(dom, ps.p)
    f = nonlinearity(ps)
    predicted = (ps.lam / ep.lambda1) ** (1.0 / (ps.p - 1.0))
    rng = np.random.default_rng(seed)

    starts = []
    starts.append(0.5 * td.phi.values / td.sup_phi)
    starts.append(0.5 * ep.u1.values)
    while len(starts) < n_starts:
        noise = td.weight.values * rng.uniform(0.5, 1.5, size=dom.shape)
        vals, _ = solver.solve(noise)
        starts.append(0.5 * vals / max(np.max(vals), 1e-300))

    reports = []
    for j, u0 in enumerate(starts[:n_starts]):
        u = u0.copy()
        sup0 = float(np.max(u))
        sups = [sup0]
        factors: list[float] = []
        outcome = "growing"
        for _ in range(iters):
            s = _grad_mag(dom, u)
            rhs = np.maximum(f(u, s), 0.0)
            w, _ = solver.solve(rhs, init=u)
            sup_w = float(np.max(w))
            diff = float(np.max(np.abs(w - u)))
            factors.append(sup_w / max(sups[-1], 1e-300))
            sups.append(sup_w)
            u = w
            if sup_w <= 1e-10 * sup0:
                outcome = "collapsed"
                break
            if sup_w >= 1e10 * max(sup0, 1.0):
                outcome = "blew_up"
                break
            if diff <= 1e-12 * max(sup_w, 1e-300) and sup_w > 1e-8 * sup0:
                sol = ScalarField(dom, u, dirichlet=True)
                rhs_f = ScalarField(dom, np.maximum(f(u, _grad_mag(dom, u)), 0.0))
                if weak_residual(sol, rhs_f, ps.p) <= 1e-8:
                    outcome = "anomaly"
                break
        reports.append(
            ProbeReport(
                outcome=outcome,
                growth_factors=factors[-3:],
                predicted_factor=predicted,
                sup_history=sups,
                seed=seed + j,
            )
        )
    return reports
