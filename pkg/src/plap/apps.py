"""Scenario drivers: thresholds, the two worked example problems, pipelines.

example1 is the gradient-amplified sublinear problem
    -div(|grad u|^{p-2} grad u) = lam w(x) u^{q-1} (1 + |grad u|^p),
whose admissibility threshold lam_star comes from minimizing
H(M) = M^{q-p} (1 + mu^p M^p).  example2 is the additive-gradient problem
    -div(|grad u|^{p-2} grad u) = lam f0(x, u) + |grad u|^p,
with c0 u^{q-1} <= f0 <= c1 u^{q-1}; it is solved both directly and
through the substitution w = e^{u/(p-1)} - 1, which removes the gradient
term, and the two solutions are cross-compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .eigen import EigenPair, check_alpha_below_lambda1, principal_eigenpair
from .mesh import ScalarField, field_to_csv, sup_grad_norm
from .plaplace import PLapSolver, TorsionData, solve_torsion
from .report import (
    solution_figure,
    trace_figure,
    write_json,
    write_solution_csv,
    write_trace_csv,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .solve import continuation_q_to_p, frozen_gradient_solve, homogeneity_check
from .subsuper import (
    ProblemSpec,
    SubSuperPair,
    ThresholdError,
    build_pair,
    check_h1,
    check_h2,
    check_h3,
    nonlinearity,
    select_subsolution_eps,
)

__all__ = [
    "ThresholdReport",
    "threshold_report",
    "example1_thresholds",
    "example2_thresholds",
    "Example1Result",
    "Example2Result",
    "example1_driver",
    "example2_driver",
    "run_scenario",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_HYPOTHESIS",
    "EXIT_SOLVER",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_SOLVER = 3


# ---------------------------------------------------------------------------
# thresholds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    alpha: float
    mu: float
    lambda1: float
    beta_max: float | None
    lambda_star: float | None
    m_star: float | None
    lambda_star_box: float | None
    admissible: bool
    reasons: list

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "mu": self.mu,
            "lambda1": self.lambda1,
            "beta_max": self.beta_max,
            "lambda_star": self.lambda_star,
            "M_star": self.m_star,
            "lambda_star_box": self.lambda_star_box,
            "admissible": self.admissible,
            "reasons": list(self.reasons),
        }


def _log_h(p: float, q: float, mu: float, log_m: float) -> float:
    # log of H(M) = M^(q-p) (1 + mu^p M^p), stable for extreme M
    return (q - p) * log_m + np.logaddexp(0.0, p * (math.log(mu) + log_m))


def example1_thresholds(p: float, q: float, alpha: float, mu: float) -> tuple[float, float, float]:
    """Return (lambda_star, M_star, H_min) for the gradient-amplified problem.

    M_star = (p/q - 1)^(1/p) / mu minimizes H; lambda_star = alpha / H(M_star)
    agrees with the closed form (alpha/mu^(p-q)) (p/q-1)^((p-q)/p) (q/p) to
    1e-12 relative, and an independent golden-section search confirms the
    minimizer.  Everything is evaluated in the log domain, which keeps the
    q -> p limit free of 0^0 artifacts (the threshold tends to alpha q/p).
    """
    if not 1.0 < q < p:
        raise ValueError(f"requires 1 < q < p, got q = {q}, p = {p}")
    log_m_star = math.log(p / q - 1.0) / p - math.log(mu)
    h_min = math.exp(_log_h(p, q, mu, log_m_star))
    log_lam_closed = (
        math.log(alpha)
        - (p - q) * math.log(mu)
        + ((p - q) / p) * math.log(p / q - 1.0)
        + math.log(q / p)
    )
    lam_star = math.exp(log_lam_closed)
    cross = alpha / h_min
    if abs(lam_star - cross) > 1e-12 * max(abs(lam_star), abs(cross)):
        raise ArithmeticError(
            f"threshold identity failed: closed form {lam_star} vs alpha/H(M*) {cross}"
        )
    # independent confirmation that M_star minimizes H on [1e-6, 1e6]
    grid = np.linspace(math.log(1e-6), math.log(1e6), 601)
    hv = [_log_h(p, q, mu, g) for g in grid]
    k = int(np.argmin(hv))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda g: _log_h(p, q, mu, g), bracket=(lo, 0.5 * (lo + hi), hi), method="golden")
    if abs(res.x - log_m_star) > 1e-5 * max(1.0, abs(log_m_star)):
        raise ArithmeticError(
            f"golden-section minimizer {math.exp(res.x)} disagrees with M* {math.exp(log_m_star)}"
        )
    return lam_star, math.exp(log_m_star), h_min


def example2_thresholds(c1: float, p: float, q: float, alpha: float, mu: float) -> tuple[float, float, float]:
    """Return (lambda_star, lambda_box, M_box) for the additive-gradient problem.

    lambda_star evaluates the closed form
    (1/c1) ((p-q)/mu^p)^(p-q) (alpha/(p-q+1))^(p-q) as printed; lambda_box
    maximizes (alpha M^(p-1) - (mu M)^p) / (c1 M^(q-1)) directly over the
    box cap M.  The two need not coincide and are reported side by side.
    """
    if not 1.0 < q < p:
        raise ValueError(f"requires 1 < q < p, got q = {q}, p = {p}")
    if c1 <= 0:
        raise ValueError("requires c1 > 0")
    log_lam = (
        -math.log(c1)
        + (p - q) * (math.log(p - q) - p * math.log(mu))
        + (p - q) * (math.log(alpha) - math.log(p - q + 1.0))
    )
    lam_star = math.exp(log_lam)

    m_top = alpha / mu**p  # numerator positive only below this cap

    def neg_bound(log_m: float) -> float:
        m = math.exp(log_m)
        num = alpha * m ** (p - 1.0) - (mu * m) ** p
        if num <= 0:
            return 0.0
        return -num / (c1 * m ** (q - 1.0))

    grid = np.linspace(math.log(m_top) - 30.0, math.log(m_top) - 1e-9, 801)
    vals = [neg_bound(g) for g in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(neg_bound, bracket=(lo, grid[k], hi), method="golden")
    lam_box = -res.fun
    return lam_star, float(lam_box), float(math.exp(res.x))


def threshold_report(ps: ProblemSpec, td: TorsionData, ep: EigenPair) -> ThresholdReport:
    """Admissibility verdict for the scenario's (lam, beta) with every threshold."""
    alpha, mu = td.alpha, td.mu
    reasons: list[str] = []
    beta_max = None
    lam_star = None
    m_star = None
    lam_box = None
    admissible = True
    if ps.form == "two-param":
        beta_max = alpha / mu**ps.b
        critical = abs(ps.a + ps.b - (ps.p - 1.0)) <= 1e-12 * max(1.0, ps.p - 1.0)
        if ps.lam <= 0:
            admissible = False
            reasons.append("lam must be positive")
        if critical and ps.beta >= beta_max:
            admissible = False
            reasons.append(f"beta = {ps.beta:.6g} >= alpha/mu^b = {beta_max:.6g}")
        if not critical and ps.beta < 0:
            admissible = False
            reasons.append("beta must be nonnegative")
    elif ps.form == "example1":
        if ps.q >= ps.p:
            admissible = False
            reasons.append("example1 requires q < p")
        else:
            lam_star, m_star, _ = example1_thresholds(ps.p, ps.q, alpha, mu)
            if not 0 < ps.lam <= lam_star * (1.0 + 1e-12):
                admissible = False
                reasons.append(f"lam = {ps.lam:.6g} outside (0, lambda* = {lam_star:.6g}]")
    elif ps.form == "example2":
        if ps.q >= ps.p:
            admissible = False
            reasons.append("example2 requires q < p")
        else:
            lam_star, lam_box, _ = example2_thresholds(ps.c1, ps.p, ps.q, alpha, mu)
            if ps.lam > lam_star * (1.0 + 1e-12):
                admissible = False
                reasons.append(f"lam = {ps.lam:.6g} above lambda* = {lam_star:.6g}")
    return ThresholdReport(
        alpha=alpha,
        mu=mu,
        lambda1=ep.lambda1,
        beta_max=beta_max,
        lambda_star=lam_star,
        m_star=m_star,
        lambda_star_box=lam_box,
        admissible=admissible,
        reasons=reasons,
    )


# ---------------------------------------------------------------------------
# example drivers
# ---------------------------------------------------------------------------


@dataclass
class Example1Result:
    thresholds: ThresholdReport
    hypotheses: list
    pair: SubSuperPair
    report: object  # SolveReport
    eps_used: float
    eps_nominal: float
    ordering_cap_active: bool
    bracket_low: float
    bracket_high: float
    bracket_pass: bool


def example1_driver(
    sc: Scenario,
    td: TorsionData,
    ep: EigenPair,
    solver: PLapSolver | None = None,
    bracket_slack: float = 1e-3,
) -> Example1Result:
    """Assemble, check, and solve the gradient-amplified sublinear problem.

    Refuses lam above lambda_star (threshold error carries the report).
    The sub-solution scale is the sublinear closed form intersected with
    the ordering condition lambda1 eps^(p-1) <= alpha M*^(p-1); whether
    that cap bites is reported rather than silently resolved.
    """
    ps = sc.problem
    tr = threshold_report(ps, td, ep)
    if not tr.admissible:
        err = ThresholdError("; ".join(tr.reasons), bound=tr.lambda_star or 0.0)
        err.report = tr
        raise err
    m_star = tr.m_star
    f = nonlinearity(ps)
    h1 = check_h1(f, ps.p, m_star, sc.domain, vmax=td.mu * m_star, n_u=sc.check_n_u, n_s=sc.check_n_s)
    h2 = check_h2(f, ep, td.mu, m_star, n_s=sc.check_n_s)
    h3 = check_h3(f, td, m_star, n_u=sc.check_n_u, n_s=sc.check_n_s)
    eps_nominal = math.exp((math.log(ps.lam) - math.log(ep.lambda1)) / (ps.p - ps.q))
    cap = math.exp(
        (math.log(td.alpha) + (ps.p - 1.0) * math.log(m_star) - math.log(ep.lambda1))
        / (ps.p - 1.0)
    )
    eps_used = min(eps_nominal, cap)
    pair = build_pair(ps, td, ep, m_cap=m_star, eps=eps_used)
    if not pair.ordered:
        err = ThresholdError(f"sub/super pair unordered (margin {pair.margin:g})", bound=m_star)
        err.report = tr
        raise err
    rep = frozen_gradient_solve(ps, pair, tol=sc.fp_tol, max_iter=sc.fp_max_iter, solver=solver)
    lo, hi = eps_used, m_star
    bracket_pass = (rep.sup_u >= lo - bracket_slack) and (rep.sup_u <= hi + bracket_slack)
    return Example1Result(
        thresholds=tr,
        hypotheses=[h1, h2, h3],
        pair=pair,
        report=rep,
        eps_used=eps_used,
        eps_nominal=eps_nominal,
        ordering_cap_active=cap < eps_nominal,
        bracket_low=lo,
        bracket_high=hi,
        bracket_pass=bracket_pass,
    )


@dataclass
class Example2Result:
    thresholds: ThresholdReport
    hypotheses: list
    direct_report: object
    transformed_report: object
    mapped: ScalarField | None
    discrepancy: float
    combined_tol: float
    crosscheck_pass: bool


def _transformed_nonlinearity(ps: ProblemSpec):
    """Right-hand side of the substituted problem in w = e^{u/(p-1)} - 1.

    The substitution cancels the |grad u|^p term and leaves
    h(x, w) = lam env(x) ((p-1) log(1+w))^{q-1} (1+w)^{p-1} / (p-1)^{p-1}.
    """
    p, q, lam = ps.p, ps.q, ps.lam
    env = ps.env.values
    c = (p - 1.0) ** (p - 1.0)

    def h(w, s):
        wp = np.maximum(w, 0.0)
        u = (p - 1.0) * np.log1p(wp)
        envb = env.reshape(env.shape + (1,) * max(np.ndim(w) - env.ndim, 0))
        return lam * envb * u ** (q - 1.0) * (1.0 + wp) ** (p - 1.0) / c

    return h


def example2_driver(
    sc: Scenario,
    td: TorsionData,
    ep: EigenPair,
    solver: PLapSolver | None = None,
) -> Example2Result:
    """Solve the additive-gradient problem twice and compare the solutions.

    The direct path runs the abstract machinery on lam f0 + |grad u|^p;
    the second path substitutes w = e^{u/(p-1)} - 1, solves the
    gradient-free problem in w, and maps back u = (p-1) log(1+w).
    """
    ps = sc.problem
    tr = threshold_report(ps, td, ep)
    if not tr.admissible:
        err = ThresholdError("; ".join(tr.reasons), bound=tr.lambda_star or 0.0)
        err.report = tr
        raise err
    dom = sc.domain
    combined_tol = 10.0 * (sc.fp_tol + sc.fp_tol)
    if ps.lam == 0.0:
        zero = ScalarField.zeros(dom)
        rep = frozen_gradient_solve(
            ps,
            SubSuperPair(sub=zero, super=zero, eps=0.0, M=0.0, ordered=True, margin=0.0),
            tol=sc.fp_tol,
            max_iter=4,
            solver=solver,
        )
        return Example2Result(
            thresholds=tr,
            hypotheses=[],
            direct_report=rep,
            transformed_report=rep,
            mapped=zero,
            discrepancy=0.0,
            combined_tol=combined_tol,
            crosscheck_pass=True,
        )

    # direct path
    f = nonlinearity(ps)
    _, _, m_direct = example2_thresholds(ps.c1, ps.p, ps.q, td.alpha, td.mu)
    h1 = check_h1(f, ps.p, m_direct, dom, vmax=td.mu * m_direct, n_u=sc.check_n_u, n_s=sc.check_n_s)
    h2 = check_h2(f, ep, td.mu, m_direct, n_s=sc.check_n_s)
    h3 = check_h3(f, td, m_direct, n_u=sc.check_n_u, n_s=sc.check_n_s)
    if not (h2.ok and h3.ok):
        err = ThresholdError("hypothesis check failed on the direct path", bound=tr.lambda_star or 0.0)
        err.report = tr
        err.hypotheses = [h1, h2, h3]
        raise err
    eps_direct = select_subsolution_eps(
        h2.extras["epsilon0"], m_direct, td.mu, sup_grad_norm(ep.u1)
    )
    pair = build_pair(ps, td, ep, m_cap=m_direct, eps=eps_direct)
    rep_direct = frozen_gradient_solve(ps, pair, tol=sc.fp_tol, max_iter=sc.fp_max_iter, solver=solver)

    # substituted path: gradient-free problem in w
    h_eval = _transformed_nonlinearity(ps)
    ps_w = ProblemSpec(
        p=ps.p, q=ps.q, lam=ps.lam, beta=0.0,
        omega1=ps.omega1, omega2=ps.omega2, form="abstract", f=h_eval,
    )
    alpha, p = td.alpha, ps.p
    grid = np.linspace(math.log(1e-6), math.log(1e4), 401)
    best, best_margin = None, -math.inf
    for g in grid:
        m = math.exp(g)
        bound = alpha * m ** (p - 1.0)
        margin = (bound - float(np.max(h_eval(np.full(dom.shape, m), 0.0)))) / bound
        if margin > best_margin:
            best, best_margin = m, margin
    if best is None or best_margin <= 0:
        err = ThresholdError("no admissible box cap for the substituted problem", bound=0.0)
        err.report = tr
        raise err
    m_w = best
    h2w = check_h2(h_eval, ep, td.mu, m_w, n_s=3)
    if not h2w.ok:
        err = ThresholdError("small-u floor fails on the substituted path", bound=0.0)
        err.report = tr
        raise err
    eps_w = select_subsolution_eps(h2w.extras["epsilon0"], m_w, td.mu, sup_grad_norm(ep.u1))
    pair_w = build_pair(ps_w, td, ep, m_cap=m_w, eps=eps_w)
    rep_w = frozen_gradient_solve(ps_w, pair_w, tol=sc.fp_tol, max_iter=sc.fp_max_iter, solver=solver)
    mapped = ScalarField(dom, (p - 1.0) * np.log1p(np.maximum(rep_w.solution.values, 0.0)), dirichlet=True)

    discrepancy = float(np.max(np.abs(rep_direct.solution.values - mapped.values)))
    ok = (
        rep_direct.converged
        and rep_w.converged
        and discrepancy <= combined_tol
    )
    return Example2Result(
        thresholds=tr,
        hypotheses=[h1, h2, h3, h2w],
        direct_report=rep_direct,
        transformed_report=rep_w,
        mapped=mapped,
        discrepancy=discrepancy,
        combined_tol=combined_tol,
        crosscheck_pass=bool(ok),
    )


# ---------------------------------------------------------------------------
# the full pipeline
# ---------------------------------------------------------------------------


def run_scenario(
    source,
    out_dir="out",
    h: float | None = None,
    tol: float | None = None,
    seed: int | None = None,
    figures: bool | None = None,
) -> int:
    """Execute torsion -> eigen -> thresholds -> pair -> solve (-> continuation),
    write reports, and return the exit code (0 pass, 1 config, 2 hypothesis
    or threshold, 3 solver).
    """
    out = Path(out_dir)
    try:
        if isinstance(source, Scenario):
            sc = source
            if h is not None or tol is not None:
                raise ScenarioError("overrides require a scenario path, not an object")
        else:
            sc = load_scenario(source, h_override=h, tol_override=tol)
    except ScenarioError as e:
        print(f"config error: {e}")
        return EXIT_CONFIG
    if seed is not None:
        sc.seed = seed
    if figures is not None:
        sc.figures = figures

    ps = sc.problem
    dom = sc.domain
    doc: dict = {"scenario": sc.name, "domain": dom.descriptor(), "form": ps.form, "seed": sc.seed}
    artifacts: dict = {}
    report_path = out / f"{sc.name}.report.json"

    def bail(code: int, reason: str) -> int:
        doc["exit_code"] = code
        doc["failure"] = reason
        doc["artifacts"] = artifacts
        write_json(report_path, doc)
        print(f"{sc.name}: FAIL ({reason}) -> exit {code}")
        return code

    solver = PLapSolver(dom, ps.p)
    td = solve_torsion(dom, ps.omega, ps.p, tol=sc.tol, solver=solver)
    doc["torsion"] = td.to_json_dict()
    if not td.converged:
        return bail(EXIT_SOLVER, f"torsion solve did not converge (residual {td.residual:g})")

    eigen_weight = ps.omega1 if ps.form == "two-param" else ps.omega
    ep = principal_eigenpair(dom, eigen_weight, ps.p, tol=sc.eigen_tol, solver=solver, torsion=td)
    doc["eigen"] = ep.to_json_dict()
    if not ep.converged:
        return bail(EXIT_SOLVER, "eigen iteration did not converge")
    out.mkdir(parents=True, exist_ok=True)
    field_to_csv(td.phi, out / f"{sc.name}.torsion.csv")
    field_to_csv(ep.u1, out / f"{sc.name}.eigen.csv")
    artifacts["torsion_csv"] = str(out / f"{sc.name}.torsion.csv")
    artifacts["eigen_csv"] = str(out / f"{sc.name}.eigen.csv")
    if np.array_equal(ps.omega.values, eigen_weight.values):
        gap = check_alpha_below_lambda1(td, ep)
    else:
        ep_max = principal_eigenpair(dom, ps.omega, ps.p, tol=sc.eigen_tol, solver=solver, torsion=td)
        gap = check_alpha_below_lambda1(td, ep_max)
    doc["alpha_lambda1_gap"] = gap.to_json_dict()

    tr = threshold_report(ps, td, ep)
    doc["thresholds"] = tr.to_json_dict()
    if not tr.admissible:
        return bail(EXIT_HYPOTHESIS, "; ".join(tr.reasons))

    try:
        if ps.form == "example1":
            res = example1_driver(sc, td, ep, solver=solver)
            doc["hypotheses"] = [hr.to_json_dict() for hr in res.hypotheses]
            doc["pair"] = res.pair.to_json_dict()
            doc["solve"] = res.report.to_json_dict()
            doc["bracket"] = {
                "low": res.bracket_low,
                "high": res.bracket_high,
                "nominal_low": res.eps_nominal,
                "ordering_cap_active": res.ordering_cap_active,
                "pass": res.bracket_pass,
            }
            if not all(hr.ok for hr in res.hypotheses):
                return bail(EXIT_HYPOTHESIS, "hypothesis certificate failed")
            if not (res.report.converged and res.report.sandwich_pass and res.bracket_pass):
                return bail(EXIT_SOLVER, "solve, sandwich, or sup-norm bracket failed")
            _emit_solution(out, sc, res.report.solution, res.pair, artifacts)
        elif ps.form == "example2":
            res = example2_driver(sc, td, ep, solver=solver)
            doc["hypotheses"] = [hr.to_json_dict() for hr in res.hypotheses]
            doc["solve"] = res.direct_report.to_json_dict()
            doc["crosscheck"] = {
                "discrepancy": res.discrepancy,
                "combined_tol": res.combined_tol,
                "pass": res.crosscheck_pass,
            }
            if not res.crosscheck_pass:
                return bail(EXIT_SOLVER, "cross-validation between the two formulations failed")
            _emit_solution(out, sc, res.direct_report.solution, None, artifacts)
        elif sc.wants_continuation:
            q0 = sc.q0 if sc.q0 is not None else 0.5 * (1.0 + ps.p)
            base = ps.at_q(q0)
            trace = continuation_q_to_p(
                base, td, ep, n_stages=sc.stages, tol=sc.fp_tol, solver=solver
            )
            doc["continuation"] = trace.to_json_dict()
            cotap_lo = trace.lambda_lower - 1e-2
            cotap_hi = trace.lambda_upper + 1e-2
            brackets_ok = all(s.bracket_ok for s in trace.stages) and all(
                cotap_lo <= s.lambda_q <= cotap_hi for s in trace.stages
            )
            if not (trace.complete and brackets_ok):
                return bail(EXIT_SOLVER, "continuation incomplete or multiplier bracket violated")
            if trace.u_beta is not None:
                from dataclasses import replace as _replace

                limit_ps = _replace(ps.at_q(ps.p), lam=trace.lambda_beta)
                r_u, r_ku = homogeneity_check(trace.u_beta, limit_ps, 2.0)
                doc["homogeneity"] = {"residual_u": r_u, "residual_2u": r_ku}
            tr_csv = write_trace_csv(out / f"{sc.name}.trace.csv", trace)
            artifacts["trace_csv"] = str(tr_csv)
            if sc.figures:
                fig = trace_figure(out / f"{sc.name}.trace.png", trace, title=sc.name)
                artifacts["trace_figure"] = str(fig)
            if trace.u_beta is not None:
                _emit_solution(out, sc, trace.u_beta, None, artifacts)
        else:
            pair = build_pair(ps, td, ep)
            doc["pair"] = pair.to_json_dict()
            if not pair.ordered:
                return bail(EXIT_HYPOTHESIS, f"sub/super pair unordered (margin {pair.margin:g})")
            rep = frozen_gradient_solve(ps, pair, tol=sc.fp_tol, max_iter=sc.fp_max_iter, solver=solver)
            doc["solve"] = rep.to_json_dict()
            if not (rep.converged and rep.sandwich_pass):
                return bail(EXIT_SOLVER, "fixed-point solve or sandwich check failed")
            _emit_solution(out, sc, rep.solution, pair, artifacts)
    except ThresholdError as e:
        if getattr(e, "report", None) is not None:
            doc["thresholds"] = e.report.to_json_dict()
        return bail(EXIT_HYPOTHESIS, str(e))

    doc["artifacts"] = artifacts
    doc["exit_code"] = EXIT_OK
    write_json(report_path, doc)
    print(f"{sc.name}: PASS -> {report_path}")
    return EXIT_OK


def _emit_solution(out: Path, sc: Scenario, solution: ScalarField, pair, artifacts: dict) -> None:
    csv_path = write_solution_csv(
        out / f"{sc.name}.solution.csv",
        solution,
        sub=pair.sub if pair is not None else None,
        sup=pair.super if pair is not None else None,
    )
    artifacts["solution_csv"] = str(csv_path)
    if sc.figures:
        fig_path = solution_figure(
            out / f"{sc.name}.solution.png",
            solution,
            sub=pair.sub if pair is not None else None,
            sup=pair.super if pair is not None else None,
            title=sc.name,
        )
        artifacts["solution_figure"] = str(fig_path)
