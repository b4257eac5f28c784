"""Explicit sub- and super-solution constructions and hypothesis certificates.

Sub-solutions are small multiples of the principal eigenfunction,
super-solutions are multiples of the normalized torsion profile.  The
amplitude of the super-solution is either the closed form
M = (lam / (alpha - beta mu^b))^(1/(p-q)) in the critical-exponent case
a + b = p - 1, or the unique positive root of the amplitude balance
alpha M^(p-1) = lam M^(q-1) + beta mu^b M^(a+b) when a + b < p - 1.

The growth (H1), small-u floor (H2), and box bound (H3) checks are
sampled certificates, not proofs; every report carries its sampling
resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .eigen import EigenPair
from .mesh import (
    Domain,
    ScalarField,
    nodal_gradient_magnitude,
    weak_residual_detail,
)
from .plaplace import TorsionData, compare_fields

__all__ = [
    "ProblemSpecError",
    "ThresholdError",
    "OverflowGuardError",
    "SubsolutionError",
    "ProblemSpec",
    "SubSuperPair",
    "nonlinearity",
    "supersolution_two_param",
    "solve_super_amplitude",
    "subsolution_eps",
    "select_subsolution_eps",
    "build_pair",
    "HypothesisReport",
    "check_h1",
    "check_h2",
    "check_h3",
]

AMPLITUDE_GUARD = 1e12

_FORMS = ("two-param", "example1", "example2", "abstract")


class ProblemSpecError(ValueError):
    pass


class ThresholdError(ValueError):
    """A parameter sits outside its admissible threshold."""

    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


class OverflowGuardError(ThresholdError):
    """The super-solution amplitude exceeds the overflow guard."""


class SubsolutionError(RuntimeError):
    def __init__(self, message: str, worst_index: int, violation: float):
        super().__init__(message)
        self.worst_index = worst_index
        self.violation = violation


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Problem data: exponents, parameters, weights, and the nonlinearity form.

    Forms
    -----
    two-param : lam w1 u^(q-1) + beta w2 u^a |grad u|^b
    example1  : lam w u^(q-1) (1 + |grad u|^p)  with w = max(w1, w2)
    example2  : lam env(x) u^(q-1) + |grad u|^p, c0 <= env <= c1
    abstract  : user evaluator f(u, s) with nodal data baked in; u and s
                broadcast with the grid shape in the leading axes.
    """

    p: float
    q: float
    lam: float
    beta: float
    omega1: ScalarField
    omega2: ScalarField
    a: float | None = None
    b: float | None = None
    form: str = "two-param"
    f: object = None
    env: ScalarField | None = None
    c0: float | None = None
    c1: float | None = None

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ProblemSpecError(f"unknown nonlinearity form {self.form!r}")
        if self.p <= 1:
            raise ProblemSpecError(f"p must exceed 1, got {self.p}")
        if not (1 < self.q <= self.p):
            raise ProblemSpecError(f"need 1 < q <= p, got q = {self.q}, p = {self.p}")
        if self.lam < 0 or self.beta < 0:
            raise ProblemSpecError("lam and beta must be nonnegative")
        if self.form == "two-param":
            if self.a is None or self.b is None:
                raise ProblemSpecError("two-param form requires exponents a and b")
            if self.a <= 0 or self.b <= 0:
                raise ProblemSpecError("a and b must be positive")
            if self.a + self.b > self.p - 1 + 1e-12:
                raise ProblemSpecError(
                    f"a + b = {self.a + self.b} exceeds p - 1 = {self.p - 1}"
                )
        if self.form == "example2":
            if self.env is None:
                raise ProblemSpecError("example2 form requires the envelope field")
            if self.c0 is None or self.c1 is None or not (0 < self.c0 <= self.c1):
                raise ProblemSpecError("example2 form requires 0 < c0 <= c1")
            lo, hi = float(np.min(self.env.values)), float(np.max(self.env.values))
            if lo < self.c0 * (1 - 1e-12) or hi > self.c1 * (1 + 1e-12):
                raise ProblemSpecError(
                    f"envelope range [{lo}, {hi}] escapes [c0, c1] = [{self.c0}, {self.c1}]"
                )
        if self.form == "abstract" and not callable(self.f):
            raise ProblemSpecError("abstract form requires a callable evaluator")

    @property
    def domain(self) -> Domain:
        return self.omega1.domain

    @property
    def omega(self) -> ScalarField:
        """Nodewise maximum of the two weights."""
        return ScalarField(self.domain, np.maximum(self.omega1.values, self.omega2.values))

    def at_q(self, q: float) -> "ProblemSpec":
        return replace(self, q=float(q))


def _match(w: np.ndarray, ref) -> np.ndarray:
    """Append singleton axes so a nodal array broadcasts against samples."""
    extra = max(np.ndim(ref) - w.ndim, 0)
    return w.reshape(w.shape + (1,) * extra)


def nonlinearity(ps: ProblemSpec):
    """Vectorized evaluator f(u, s) for the right-hand side of the problem.

    u is the solution value, s the gradient magnitude; both are clamped
    to u >= 0 (the positive-solution machinery never evaluates below 0).
    """
    p, q = ps.p, ps.q
    if ps.form == "two-param":
        w1, w2 = ps.omega1.values, ps.omega2.values
        a, b, lam, beta = ps.a, ps.b, ps.lam, ps.beta

        def f(u, s):
            up = np.maximum(u, 0.0)
            return lam * _match(w1, u) * up ** (q - 1.0) + beta * _match(w2, u) * up**a * np.abs(s) ** b

        return f
    if ps.form == "example1":
        w = ps.omega.values
        lam = ps.lam

        def f(u, s):
            up = np.maximum(u, 0.0)
            return lam * _match(w, u) * up ** (q - 1.0) * (1.0 + np.abs(s) ** p)

        return f
    if ps.form == "example2":
        env = ps.env.values
        lam = ps.lam

        def f(u, s):
            up = np.maximum(u, 0.0)
            return lam * _match(env, u) * up ** (q - 1.0) + np.abs(s) ** p

        return f
    return ps.f


# ---------------------------------------------------------------------------
# explicit pair construction
# ---------------------------------------------------------------------------


def supersolution_two_param(ps: ProblemSpec, td: TorsionData) -> tuple[ScalarField, float]:
    """Torsion-profile super-solution for the critical case a + b = p - 1.

    Returns U = M phi / sup(phi) with M = (lam/(alpha - beta mu^b))^(1/(p-q))
    and verifies the defining amplitude identity
    alpha M^(p-1) = lam M^(q-1) + beta mu^b M^(a+b) to 1e-12 relative.
    """
    p, q, lam, beta = ps.p, ps.q, ps.lam, ps.beta
    if not q < p:
        raise ProblemSpecError(f"requires q < p, got q = {q}, p = {p}")
    if abs(ps.a + ps.b - (p - 1.0)) > 1e-12 * max(1.0, p - 1.0):
        raise ProblemSpecError(f"requires a + b = p - 1, got a + b = {ps.a + ps.b}")
    if lam <= 0:
        raise ProblemSpecError("requires lam > 0")
    alpha, mu = td.alpha, td.mu
    beta_max = alpha / mu**ps.b
    if beta >= beta_max:
        raise ThresholdError(
            f"beta = {beta} violates beta < alpha/mu^b = {beta_max}", bound=beta_max
        )
    log_m = (math.log(lam) - math.log(alpha - beta * mu**ps.b)) / (p - q)
    if log_m > math.log(AMPLITUDE_GUARD):
        raise OverflowGuardError(
            f"super-solution amplitude exp({log_m:.6g}) exceeds the guard {AMPLITUDE_GUARD:g}",
            bound=AMPLITUDE_GUARD,
        )
    m = math.exp(log_m)
    lhs = alpha * m ** (p - 1.0)
    rhs = lam * m ** (q - 1.0) + beta * mu**ps.b * m ** (ps.a + ps.b)
    if abs(lhs - rhs) > 1e-12 * max(abs(lhs), abs(rhs)):
        raise ArithmeticError(
            f"amplitude identity failed: {lhs} vs {rhs} at M = {m}"
        )
    u = ScalarField(td.phi.domain, (m / td.sup_phi) * td.phi.values, dirichlet=True)
    return u, m


def solve_super_amplitude(ps: ProblemSpec, td: TorsionData, rtol: float = 1e-12) -> float:
    """Unique positive root of alpha M^(p-1) = lam M^(q-1) + beta mu^b M^(a+b).

    Subcritical case a + b < p - 1 with lam, beta > 0.  Bisection on an
    expanding bracket; the residual is driven to rtol * max(alpha M^(p-1), 1)
    and the ordering ingredient alpha M^(p-1) >= lam M^(q-1) is asserted.
    """
    p, q, lam, beta = ps.p, ps.q, ps.lam, ps.beta
    if not q < p:
        raise ProblemSpecError(f"requires q < p, got q = {q}, p = {p}")
    if ps.a + ps.b >= p - 1.0 - 1e-12:
        raise ProblemSpecError(f"requires a + b < p - 1, got a + b = {ps.a + ps.b}")
    if lam <= 0 or beta < 0:
        raise ProblemSpecError("requires lam > 0 and beta >= 0")
    alpha, mub = td.alpha, td.mu**ps.b
    if beta == 0.0:
        return math.exp((math.log(lam) - math.log(alpha)) / (p - q))

    def g(m: float) -> float:
        return alpha * m ** (p - 1.0) - lam * m ** (q - 1.0) - beta * mub * m ** (ps.a + ps.b)

    lo, hi = 1e-12, 1e12
    for _ in range(40):
        if g(lo) < 0:
            break
        lo *= 0.1
    for _ in range(40):
        if g(hi) > 0:
            break
        hi *= 10.0
    glo, ghi = g(lo), g(hi)
    if not (glo < 0 < ghi):
        raise SolverDiagnostics(lo, hi, glo, ghi)
    m = math.sqrt(lo * hi)
    for _ in range(400):
        m = math.sqrt(lo * hi)  # bisect in the log domain
        gm = g(m)
        if abs(gm) <= rtol * max(alpha * m ** (p - 1.0), 1.0):
            break
        if gm < 0:
            lo = m
        else:
            hi = m
        if hi - lo <= 4 * math.ulp(hi):
            break
    if abs(g(m)) > rtol * max(alpha * m ** (p - 1.0), 1.0):
        raise ArithmeticError(f"amplitude root stalled at M = {m}, g(M) = {g(m)}")
    if alpha * m ** (p - 1.0) < lam * m ** (q - 1.0) * (1.0 - 1e-12):
        raise ArithmeticError("root lost the ordering inequality alpha M^(p-1) >= lam M^(q-1)")
    return m


class SolverDiagnostics(RuntimeError):
    def __init__(self, lo, hi, glo, ghi):
        super().__init__(
            f"no sign change for the amplitude balance on [{lo:g}, {hi:g}]: "
            f"g(lo) = {glo:g}, g(hi) = {ghi:g}"
        )


def select_subsolution_eps(eps0: float, m_cap: float, mu: float, sup_grad_u1: float) -> float:
    """Strict-inequality choice of the sub-solution scale in the abstract case.

    Half of min(eps0, M, mu M / sup|grad u1|): the factor 1/2 is an explicit
    tie-break for the strict inequalities the construction needs.
    """
    return 0.5 * min(eps0, m_cap, mu * m_cap / sup_grad_u1)


def subsolution_eps(
    ps: ProblemSpec,
    ep: EigenPair,
    eps: float | None = None,
    tol: float | None = None,
) -> tuple[ScalarField, float]:
    """Scaled-eigenfunction sub-solution eps * u1.

    For the sublinear forms (q < p) the scale is eps = (lam/lambda1)^(1/(p-q));
    the abstract form requires an explicit eps (see select_subsolution_eps).
    The weak sub-solution inequality against the problem nonlinearity is
    verified and a violation beyond tolerance raises, carrying the worst
    test-function index.
    """
    p = ps.p
    if eps is None:
        if ps.form == "abstract":
            raise ProblemSpecError("abstract form requires an explicit eps")
        if not ps.q < p:
            raise ProblemSpecError("the closed-form eps needs q < p")
        if ps.lam <= 0:
            raise ProblemSpecError("requires lam > 0")
        eps = math.exp((math.log(ps.lam) - math.log(ep.lambda1)) / (p - ps.q))
    sub = ScalarField(ep.u1.domain, eps * ep.u1.values, dirichlet=True)
    s = nodal_gradient_magnitude(sub)
    f_vals = nonlinearity(ps)(sub.values, s.values)
    rhs = ScalarField(sub.domain, f_vals)
    violation, worst = weak_residual_detail(sub, rhs, p, mode="sub")
    if tol is None:
        scale = float(np.max(sub.domain.masses * np.abs(f_vals)))
        tol = 10.0 * eps ** (p - 1.0) * ep.residual + 1e-12 * max(scale, 1e-300)
    if violation > tol:
        raise SubsolutionError(
            f"sub-solution inequality violated by {violation:g} (tol {tol:g}) "
            f"at test function {worst}",
            worst_index=worst,
            violation=violation,
        )
    return sub, eps


@dataclass(frozen=True, eq=False)
class SubSuperPair:
    sub: ScalarField
    super: ScalarField
    eps: float
    M: float
    ordered: bool
    margin: float

    def to_json_dict(self) -> dict:
        return {
            "eps": self.eps,
            "M": self.M,
            "ordered": self.ordered,
            "margin": self.margin,
        }


def build_pair(
    ps: ProblemSpec,
    td: TorsionData,
    ep: EigenPair,
    m_cap: float | None = None,
    eps: float | None = None,
) -> SubSuperPair:
    """Construct (eps u1, M phi/sup(phi)) and record their ordering."""
    if m_cap is None:
        if ps.a is None or ps.b is None:
            raise ProblemSpecError(
                f"the {ps.form} form needs an explicit amplitude cap m_cap"
            )
        if abs(ps.a + ps.b - (ps.p - 1.0)) <= 1e-12 * max(1.0, ps.p - 1.0):
            sup_field, m_cap = supersolution_two_param(ps, td)
        else:
            m_cap = solve_super_amplitude(ps, td)
            sup_field = ScalarField(
                td.phi.domain, (m_cap / td.sup_phi) * td.phi.values, dirichlet=True
            )
    else:
        sup_field = ScalarField(
            td.phi.domain, (m_cap / td.sup_phi) * td.phi.values, dirichlet=True
        )
    sub, eps = subsolution_eps(ps, ep, eps=eps)
    rep = compare_fields(sub, sup_field)
    return SubSuperPair(
        sub=sub, super=sup_field, eps=eps, M=m_cap, ordered=rep.ordered, margin=rep.min_gap
    )


# ---------------------------------------------------------------------------
# sampled hypothesis certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    hypothesis: str
    ok: bool
    margin: float
    witness: dict | None
    resolution: dict
    extras: dict

    def to_json_dict(self) -> dict:
        d = {
            "hypothesis": self.hypothesis,
            "pass": self.ok,
            "margin": self.margin,
            "witness": self.witness,
            "resolution": self.resolution,
        }
        d.update(self.extras)
        return d


def _witness(dom: Domain, flat_idx: int, u: float, s: float, extra: dict | None = None) -> dict:
    coords = dom.coords()
    point = [float(c.ravel()[flat_idx]) for c in coords]
    d = {"x": point, "u": float(u), "v": float(s)}
    if extra:
        d.update(extra)
    return d


def check_h1(
    f,
    p: float,
    m_cap: float,
    dom: Domain,
    vmax: float = 1.0,
    doublings: int = 4,
    n_u: int = 17,
    n_s: int = 25,
) -> HypothesisReport:
    """Fit the smallest C with f(x, u, v) <= C (1 + |v|^p) over |u| <= M.

    The fit is repeated while doubling the gradient range; C is flagged
    non-saturating when it keeps growing, which signals supercritical
    gradient growth.
    """
    us = np.linspace(0.0, m_cap, n_u)
    history = []
    for k in range(doublings + 1):
        ss = np.linspace(0.0, vmax * 2.0**k, n_s)
        vals = f(_samples_u(dom, us), _samples_s(dom, ss))
        ratio = vals / (1.0 + _samples_s(dom, ss) ** p)
        history.append(float(np.max(ratio)))
    c_fit = history[-1]
    saturating = history[-1] <= history[-2] * 1.01 + 1e-300
    return HypothesisReport(
        hypothesis="H1",
        ok=bool(saturating),
        margin=float(history[-1] - history[-2]),
        witness=None,
        resolution={"n_u": n_u, "n_s": n_s, "doublings": doublings, "vmax_final": vmax * 2.0**doublings},
        extras={"C": c_fit, "C_history": history, "saturating": bool(saturating)},
    )


def _samples_u(dom: Domain, us: np.ndarray) -> np.ndarray:
    return us.reshape((1,) * len(dom.shape) + (us.size, 1))


def _samples_s(dom: Domain, ss: np.ndarray) -> np.ndarray:
    return ss.reshape((1,) * len(dom.shape) + (1, ss.size))


def check_h2(
    f,
    ep: EigenPair,
    mu: float,
    m_cap: float,
    n_u: int = 81,
    n_s: int = 17,
    trials: int = 41,
) -> HypothesisReport:
    """Largest eps0 from the trial ladder 1, 1/2, ..., 2^-40 such that
    f(x, u, v) >= lambda1 omega(x) u^(p-1) holds at every sample with
    0 <= u <= eps0 and |v| <= mu M.
    """
    dom = ep.u1.domain
    p = ep.p
    w = ep.weight.values
    # geometric u grid covering all trial levels, two samples per octave
    exps = np.arange(n_u) * (40.0 / max(n_u - 1, 1))
    us = 2.0 ** (-exps)
    ss = np.linspace(0.0, mu * m_cap, n_s)
    fu = f(_samples_u(dom, us), _samples_s(dom, ss))
    floor = ep.lambda1 * _match(w, fu) * _samples_u(dom, us) ** (p - 1.0)
    margins = fu - floor
    # min over every axis except the u-sample axis
    axes = tuple(i for i in range(margins.ndim) if i != margins.ndim - 2)
    margin_per_u = margins.min(axis=axes)
    scale_per_u = np.maximum(np.abs(floor).max(axis=axes), 1e-300)
    ok_per_u = margin_per_u >= -1e-12 * scale_per_u
    eps0 = 0.0
    for t in range(trials):
        trial = 2.0**-t
        if np.all(ok_per_u[us <= trial * (1 + 1e-12)]):
            eps0 = trial
            break
    ok = eps0 > 0.0
    witness = None
    if not ok:
        floor_full = np.broadcast_to(floor, margins.shape).reshape(-1)
        k = int(np.argmin(margins.reshape(-1) / np.maximum(np.abs(floor_full), 1e-300)))
        idx = np.unravel_index(k, margins.shape)
        flat_node = int(np.ravel_multi_index(idx[: len(dom.shape)], dom.shape))
        witness = _witness(dom, flat_node, us[idx[-2]], ss[idx[-1]])
    worst = float(margin_per_u[us <= max(eps0, us.min())].min()) if ok else float(margin_per_u.min())
    return HypothesisReport(
        hypothesis="H2",
        ok=bool(ok),
        margin=worst,
        witness=witness,
        resolution={"n_u": int(us.size), "n_s": int(ss.size), "trials": trials, "v_cap": mu * m_cap},
        extras={"epsilon0": eps0},
    )


def check_h3(
    f,
    td: TorsionData,
    m_cap: float,
    n_u: int = 33,
    n_s: int = 33,
) -> HypothesisReport:
    """Verify 0 <= f(x, u, v) <= alpha omega(x) M^(p-1) over the closed box
    with 0 <= u <= M and |v| <= mu M, reporting the worst margin and where
    it occurs.
    """
    dom = td.phi.domain
    p = td.p
    us = np.linspace(0.0, m_cap, n_u)
    ss = np.linspace(0.0, td.mu * m_cap, n_s)
    vals = f(_samples_u(dom, us), _samples_s(dom, ss))
    bound = td.alpha * m_cap ** (p - 1.0) * _match(td.weight.values, vals)
    upper = bound - vals
    lower = np.broadcast_to(vals, upper.shape)
    margin_up = float(upper.min())
    margin_lo = float(lower.min())
    scale = float(np.max(np.abs(bound)))
    ok = margin_up >= -1e-12 * scale and margin_lo >= -1e-12 * scale
    if margin_up <= margin_lo:
        k = int(np.argmin(upper.reshape(-1)))
        shape = upper.shape
    else:
        k = int(np.argmin(lower.reshape(-1)))
        shape = lower.shape
    idx = np.unravel_index(k, shape)
    flat_node = int(np.ravel_multi_index(idx[: len(dom.shape)], dom.shape))
    witness = _witness(
        dom,
        flat_node,
        us[idx[-2]],
        ss[idx[-1]],
        extra={"f": float(np.broadcast_to(vals, shape)[idx]), "bound": float(np.broadcast_to(bound, shape)[idx])},
    )
    return HypothesisReport(
        hypothesis="H3",
        ok=bool(ok),
        margin=min(margin_up, margin_lo),
        witness=witness,
        resolution={"n_u": n_u, "n_s": n_s, "u_cap": m_cap, "v_cap": td.mu * m_cap},
        extras={"margin_upper": margin_up, "margin_lower": margin_lo},
    )
