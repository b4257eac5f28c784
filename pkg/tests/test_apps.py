import math

import numpy as np
import pytest

from plap import Domain, ScalarField, make_weight
from plap.apps import (
    example1_driver,
    example1_thresholds,
    example2_driver,
    example2_thresholds,
    threshold_report,
)
from plap.scenario import Scenario
from plap.subsuper import ProblemSpec, ThresholdError

from conftest import PI2


def example1_spec(w, **kw):
    args = dict(p=2.0, q=1.5, lam=1.0, beta=0.0, omega1=w, omega2=w, form="example1")
    args.update(kw)
    return ProblemSpec(**args)


def example2_spec(dom, lam, envelope=None, c0=1.0, c1=1.0, q=1.5, p=2.0):
    one = make_weight(dom, 1.0)
    env = envelope if envelope is not None else make_weight(dom, 1.0)
    return ProblemSpec(p=p, q=q, lam=lam, beta=0.0, omega1=one, omega2=one,
                       form="example2", env=env, c0=c0, c1=c1)


def make_scenario(dom, ps, **kw):
    args = dict(name="t", domain=dom, problem=ps, tol=1e-11, eigen_tol=1e-12,
                fp_tol=1e-9, fp_max_iter=4000)
    args.update(kw)
    return Scenario(**args)


class TestExample1Thresholds:
    def test_reference_values(self):
        lam_star, m_star, h_min = example1_thresholds(2.0, 1.5, 8.0, 4.0)
        assert m_star == pytest.approx((1.0 / 3.0) ** 0.5 / 4.0, rel=1e-12)
        assert lam_star == pytest.approx(3.0 * 3.0 ** (-0.25), rel=1e-12)
        assert lam_star == pytest.approx(8.0 / h_min, rel=1e-12)

    def test_mu_scaling(self):
        base_lam, base_m, _ = example1_thresholds(2.0, 1.5, 8.0, 4.0)
        c = 3.0
        lam_c, m_c, _ = example1_thresholds(2.0, 1.5, 8.0, c * 4.0)
        assert m_c == pytest.approx(base_m / c, rel=1e-12)
        assert lam_c == pytest.approx(base_lam * c ** (1.5 - 2.0), rel=1e-12)

    def test_q_to_p_limit_tends_to_alpha(self):
        # the closed form degrades gracefully (log-domain evaluation): all
        # power factors tend to 1 and lambda* -> alpha * q/p -> alpha
        for s in (1e-3, 1e-6, 1e-9):
            lam_star, _, _ = example1_thresholds(2.0, 2.0 - s, 8.0, 4.0)
            assert lam_star == pytest.approx(8.0, rel=50 * s + 1e-9)
        with pytest.raises(ValueError):
            example1_thresholds(2.0, 2.0, 8.0, 4.0)

    def test_ordering_cap_never_binds_at_admissible_lambda(self):
        # eps_nominal = (lam/lambda1)^{1/(p-q)} <= M* (alpha/lambda1)^{1/(p-q)}
        # < M* (alpha/lambda1)^{1/(p-1)} = cap whenever lam <= lambda* and
        # alpha < lambda1, so the ordering condition is reported but inert
        rng = np.random.default_rng(29)
        for _ in range(40):
            p = rng.uniform(1.2, 4.0)
            q = rng.uniform(1.05, p - 0.05)
            alpha = 10.0 ** rng.uniform(-1, 1.5)
            lam1 = alpha * rng.uniform(1.01, 3.0)
            mu = 10.0 ** rng.uniform(-1, 1)
            lam_star, m_star, _ = example1_thresholds(p, q, alpha, mu)
            lam = lam_star * rng.uniform(0.05, 1.0)
            eps_nominal = math.exp((math.log(lam) - math.log(lam1)) / (p - q))
            cap = math.exp(
                (math.log(alpha) + (p - 1.0) * math.log(m_star) - math.log(lam1)) / (p - 1.0)
            )
            assert eps_nominal <= cap * (1.0 + 1e-12)

    def test_identity_on_randomized_parameters(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            p = rng.uniform(1.2, 5.0)
            q = rng.uniform(1.02, p - 0.02)
            alpha = 10.0 ** rng.uniform(-2, 2)
            mu = 10.0 ** rng.uniform(-1.5, 1.5)
            lam_star, m_star, h_min = example1_thresholds(p, q, alpha, mu)
            assert lam_star == pytest.approx(alpha / h_min, rel=1e-12)
            # direct H evaluation at M* agrees
            direct = m_star ** (q - p) * (1.0 + (mu * m_star) ** p)
            assert h_min == pytest.approx(direct, rel=1e-10)


class TestExample2Thresholds:
    def test_reference_value(self):
        lam_star, lam_box, m_box = example2_thresholds(1.0, 2.0, 1.5, 8.0, 4.0)
        assert lam_star == pytest.approx((0.5 / 16.0) ** 0.5 * (8.0 / 1.5) ** 0.5, rel=1e-12)
        assert lam_box > lam_star

    def test_c1_scaling(self):
        lam1, _, _ = example2_thresholds(1.0, 2.0, 1.5, 8.0, 4.0)
        lam2, _, _ = example2_thresholds(2.0, 2.0, 1.5, 8.0, 4.0)
        assert lam2 == pytest.approx(lam1 / 2.0, rel=1e-12)

    def test_q_to_p_limit(self):
        lam_star, _, _ = example2_thresholds(2.0, 2.0, 2.0 - 1e-9, 8.0, 4.0)
        assert lam_star == pytest.approx(1.0 / 2.0, rel=1e-6)  # -> 1/c1

    def test_box_bound_matches_closed_form_optimum(self):
        # maximizing (alpha M^{p-1} - (mu M)^p)/(c1 M^{q-1}) has the closed
        # form M = (p-q) alpha / ((p-q+1) mu^p); the numeric search must agree
        rng = np.random.default_rng(23)
        for _ in range(20):
            p = rng.uniform(1.3, 4.0)
            q = rng.uniform(1.05, p - 0.05)
            alpha = 10.0 ** rng.uniform(-1, 1.5)
            mu = 10.0 ** rng.uniform(-1, 1)
            c1 = 10.0 ** rng.uniform(-1, 1)
            _, lam_box, m_box = example2_thresholds(c1, p, q, alpha, mu)
            m_exact = (p - q) * alpha / ((p - q + 1.0) * mu**p)
            lam_exact = (alpha * m_exact ** (p - 1) - (mu * m_exact) ** p) / (c1 * m_exact ** (q - 1))
            assert m_box == pytest.approx(m_exact, rel=1e-5)
            assert lam_box == pytest.approx(lam_exact, rel=1e-9)


class TestThresholdReport:
    def test_two_param_verdicts(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        ok = threshold_report(
            ProblemSpec(p=2.0, q=1.5, lam=1.0, beta=1.0, omega1=w, omega2=w, a=0.5, b=0.5), td, ep
        )
        assert ok.admissible
        assert ok.beta_max == pytest.approx(4.0, rel=1e-6)
        bad = threshold_report(
            ProblemSpec(p=2.0, q=1.5, lam=1.0, beta=8.0, omega1=w, omega2=w, a=0.5, b=0.5), td, ep
        )
        assert not bad.admissible and bad.reasons

    def test_example1_verdicts(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        lam_star = 3.0 * 3.0 ** (-0.25)
        at = threshold_report(example1_spec(w, lam=lam_star), td, ep)
        assert at.admissible  # the boundary value still runs
        above = threshold_report(example1_spec(w, lam=1.01 * lam_star), td, ep)
        assert not above.admissible


class TestExample1Driver:
    def test_reference_run_with_bracket(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        sc = make_scenario(dom, example1_spec(w, lam=1.0))
        res = example1_driver(sc, td, ep, solver=solver)
        assert all(h.ok for h in res.hypotheses)
        assert res.pair.ordered
        assert res.report.converged and res.report.sandwich_pass
        assert res.bracket_pass
        assert res.bracket_low == pytest.approx((1.0 / PI2) ** 2, rel=1e-4)
        assert res.bracket_high == pytest.approx(3.0 ** (-0.5) / 4.0, rel=1e-4)
        assert not res.ordering_cap_active

    def test_boundary_lambda_still_runs(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        lam_star, _, _ = example1_thresholds(2.0, 1.5, td.alpha, td.mu)
        sc = make_scenario(dom, example1_spec(w, lam=lam_star))
        res = example1_driver(sc, td, ep, solver=solver)
        assert res.report.converged and res.bracket_pass

    def test_degenerate_operator_case(self):
        # p = 3: the construction carries over unchanged away from p = 2
        dom = Domain.interval(1.0, 512)
        w = make_weight(dom, 1.0)
        from plap.plaplace import PLapSolver
        from plap.eigen import principal_eigenpair
        from plap import solve_torsion

        solver = PLapSolver(dom, 3.0)
        td = solve_torsion(dom, w, 3.0, tol=1e-11, solver=solver)
        ep = principal_eigenpair(dom, w, 3.0, tol=1e-11, solver=solver, torsion=td)
        lam_star, m_star, _ = example1_thresholds(3.0, 2.0, td.alpha, td.mu)
        assert lam_star == pytest.approx(6.0 * 0.5 ** (1.0 / 3.0) * (2.0 / 3.0), rel=1e-3)
        ps = ProblemSpec(p=3.0, q=2.0, lam=1.0, beta=0.0, omega1=w, omega2=w, form="example1")
        sc = make_scenario(dom, ps)
        res = example1_driver(sc, td, ep, solver=solver)
        assert res.report.converged and res.report.sandwich_pass and res.bracket_pass
        assert all(h.ok for h in res.hypotheses)

    def test_above_threshold_refused_with_report(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        lam_star, _, _ = example1_thresholds(2.0, 1.5, td.alpha, td.mu)
        sc = make_scenario(dom, example1_spec(w, lam=1.01 * lam_star))
        with pytest.raises(ThresholdError) as exc:
            example1_driver(sc, td, ep, solver=solver)
        assert exc.value.report.lambda_star == pytest.approx(lam_star, rel=1e-12)


class TestExample2Driver:
    def test_constant_envelope_crosscheck(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        sc = make_scenario(dom, example2_spec(dom, lam=0.2), fp_tol=1e-6)
        res = example2_driver(sc, td, ep, solver=solver)
        assert res.crosscheck_pass
        assert res.discrepancy <= res.combined_tol
        assert res.direct_report.converged and res.transformed_report.converged

    def test_lambda_zero_trivial(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        sc = make_scenario(dom, example2_spec(dom, lam=0.0), fp_tol=1e-6)
        res = example2_driver(sc, td, ep, solver=solver)
        assert res.discrepancy == 0.0
        assert res.direct_report.sup_u == 0.0

    def test_sine_envelope_between_bounds(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        env = make_weight(dom, lambda x: 1.0 + 0.5 * np.sin(2 * np.pi * x))
        sc = make_scenario(dom, example2_spec(dom, lam=0.2, envelope=env, c0=0.5, c1=1.5), fp_tol=1e-6)
        res = example2_driver(sc, td, ep, solver=solver)
        assert res.crosscheck_pass

    def test_above_threshold_refused(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        lam_star, _, _ = example2_thresholds(1.0, 2.0, 1.5, td.alpha, td.mu)
        sc = make_scenario(dom, example2_spec(dom, lam=1.05 * lam_star), fp_tol=1e-6)
        with pytest.raises(ThresholdError):
            example2_driver(sc, td, ep, solver=solver)
