"""Principal Dirichlet eigenpair of the p-Laplacian with a nonnegative weight.

Inverse power iteration: starting from the normalized torsion profile,
each step solves a torsion-type problem with frozen right-hand side
omega * u^(p-1) and renormalizes to unit sup norm.  The eigenvalue
estimate 1 / sup(w)^(p-1) is exact at fixed points of the iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mesh import Domain, ScalarField, weak_residual
from .plaplace import PLapSolver, TorsionData, solve_torsion

__all__ = [
    "EigenPair",
    "EigenError",
    "principal_eigenpair",
    "check_alpha_below_lambda1",
    "GapReport",
    "scaling_inequality",
]


class EigenError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Principal eigenvalue and positive, sup-normalized eigenfunction."""

    lambda1: float
    u1: ScalarField
    weight: ScalarField
    p: float
    residual: float
    iterations: int
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda1": self.lambda1,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def principal_eigenpair(
    dom: Domain,
    omega: ScalarField,
    p: float,
    tol: float = 1e-10,
    max_iter: int = 400,
    solver: PLapSolver | None = None,
    torsion: TorsionData | None = None,
) -> EigenPair:
    """Compute the smallest Dirichlet eigenvalue of -div(|grad u|^{p-2} grad u)
    = lambda * omega * u^{p-1} together with its positive eigenfunction,
    normalized to sup norm 1.

    Iteration stops once successive eigenvalue estimates differ by less
    than tol * lambda.  Non-convergence is reported, not retried.
    """
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if np.any(omega.values < 0) or np.max(omega.values) <= 0:
        raise ValueError("weight must be nonnegative and not identically zero")
    solver = solver or PLapSolver(dom, p)
    if torsion is None:
        torsion = solve_torsion(dom, omega, p, tol=max(tol, 1e-10), solver=solver)
    u = torsion.phi.values / torsion.sup_phi

    lam = math.nan
    w = None
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        rhs = omega.values * np.maximum(u, 0.0) ** (p - 1.0)
        w, _ = solver.solve(rhs, init=w)
        top = float(np.max(w))
        if top <= 0:
            raise EigenError("inverse iteration collapsed to a nonpositive field")
        lam_new = top ** (1.0 - p)
        u = w / top
        if math.isfinite(lam) and abs(lam_new - lam) < tol * abs(lam_new):
            lam = lam_new
            converged = True
            break
        lam = lam_new

    u1 = ScalarField(dom, u / np.max(np.abs(u)), dirichlet=True)
    rhs_field = ScalarField(dom, lam * omega.values * np.maximum(u1.values, 0.0) ** (p - 1.0))
    residual = weak_residual(u1, rhs_field, p)
    return EigenPair(
        lambda1=lam,
        u1=u1,
        weight=omega,
        p=float(p),
        residual=residual,
        iterations=iterations,
        converged=converged,
    )


@dataclass(frozen=True)
class GapReport:
    alpha: float
    lambda1: float
    gap: float
    ok: bool

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha, "lambda1": self.lambda1, "gap": self.gap, "ok": self.ok}


def check_alpha_below_lambda1(td: TorsionData, ep: EigenPair) -> GapReport:
    """Assert the ordering alpha <= lambda1 and record the strict gap.

    The torsion constant alpha never exceeds the principal eigenvalue for
    the same (or a dominated) weight; a violation raises, since it breaks
    every downstream ordering construction.
    """
    gap = ep.lambda1 - td.alpha
    ok = td.alpha <= ep.lambda1 * (1.0 + 1e-12)
    if not ok:
        raise EigenError(
            f"alpha = {td.alpha} exceeds lambda1 = {ep.lambda1}; "
            "ordering constants are inconsistent"
        )
    return GapReport(alpha=td.alpha, lambda1=ep.lambda1, gap=gap, ok=ok)


def scaling_inequality(alpha: float, lambda1: float, lam: float, p: float, q: float) -> bool:
    """Check lambda1 (lam/lambda1)^E <= alpha (lam/alpha)^E for E = (p-1)/(p-q).

    Evaluated in the log domain for numerical stability.  Requires
    1 < q < p, lam > 0 and 0 < alpha <= lambda1.
    """
    if not q < p:
        raise ValueError(f"requires q < p, got q = {q}, p = {p}")
    if q <= 1:
        raise ValueError(f"requires q > 1, got q = {q}")
    if lam <= 0:
        raise ValueError("lam must be positive")
    if not 0 < alpha <= lambda1 * (1.0 + 1e-12):
        raise ValueError(f"requires 0 < alpha <= lambda1, got alpha = {alpha}, lambda1 = {lambda1}")
    e = (p - 1.0) / (p - q)
    lhs = (1.0 - e) * math.log(lambda1) + e * math.log(lam)
    rhs = (1.0 - e) * math.log(alpha) + e * math.log(lam)
    return lhs <= rhs + 1e-12 * max(abs(lhs), abs(rhs), 1.0)
