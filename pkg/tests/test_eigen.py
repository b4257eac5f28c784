import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from plap import Domain, ScalarField, make_weight, solve_torsion, sup_norm
from plap.eigen import (
    EigenError,
    check_alpha_below_lambda1,
    principal_eigenpair,
    scaling_inequality,
)
from plap.plaplace import PLapSolver

from conftest import J0_SQUARED, PI2


def lambda1_interval_closed_form(p):
    pip = 2 * math.pi / (p * math.sin(math.pi / p))
    return (p - 1) * pip**p


def lambda1_interval_shooting(p):
    """Independent oracle: integrate the eigen-ODE from a unit slope and
    rescale the first zero onto (0, 1)."""

    def rhs(x, y):
        u, v = y  # v is the flux |u'|^{p-2} u'
        return [np.sign(v) * np.abs(v) ** (1.0 / (p - 1)), -np.sign(u) * np.abs(u) ** (p - 1)]

    def hit(x, y):
        return y[0]

    hit.terminal, hit.direction = True, -1
    sol = solve_ivp(rhs, [1e-12, 50.0], [0.0, 1.0], events=hit, rtol=1e-11, atol=1e-13)
    return sol.t_events[0][0] ** p


def lambda1_ball_shooting():
    """First Dirichlet eigenvalue of the unit disk by radial shooting."""

    def rhs(r, y):
        u, v = y
        return [v, -v / r - u]

    def hit(r, y):
        return y[0]

    hit.terminal, hit.direction = True, -1
    r0 = 1e-8
    sol = solve_ivp(rhs, [r0, 10.0], [1.0 - r0**2 / 4, -r0 / 2], events=hit, rtol=1e-11, atol=1e-13)
    return sol.t_events[0][0] ** 2


class TestPrincipalEigenpair:
    def test_interval_p2(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        assert ep.converged
        assert ep.lambda1 == pytest.approx(PI2, rel=1e-3)
        assert abs(sup_norm(ep.u1) - 1.0) < 1e-12
        assert np.all(ep.u1.values[1:-1] > 0)
        x = dom.axes[0]
        assert np.max(np.abs(ep.u1.values - np.sin(np.pi * x))) < 1e-4

    def test_interval_p2_matches_discrete_linear_eigenvalue(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        h = dom.h
        discrete = (2.0 - 2.0 * math.cos(math.pi * h)) / h**2
        assert ep.lambda1 == pytest.approx(discrete, rel=1e-10)

    def test_square_p2(self):
        dom = Domain.rectangle((1.0, 1.0), (64, 64))
        ep = principal_eigenpair(dom, make_weight(dom, 1.0), 2.0, tol=1e-12)
        assert ep.lambda1 == pytest.approx(2 * PI2, rel=1e-3)

    def test_nonsquare_rectangle_p2(self):
        # (0,1) x (0,2): lambda1 = pi^2 (1 + 1/4)
        dom = Domain.rectangle((1.0, 2.0), (32, 64))
        ep = principal_eigenpair(dom, make_weight(dom, 1.0), 2.0, tol=1e-12)
        assert ep.lambda1 == pytest.approx(1.25 * PI2, rel=2e-3)

    def test_ball_three_dimensional_p2(self):
        # N = 3: phi = (1 - r^2)/6 gives alpha = 6, mu = 2, and the first
        # eigenfunction sin(pi r)/r gives lambda1 = pi^2 exactly
        dom = Domain.ball(1.0, 3, 512)
        w = make_weight(dom, 1.0)
        td = solve_torsion(dom, w, 2.0, tol=1e-11)
        ep = principal_eigenpair(dom, w, 2.0, tol=1e-12)
        assert td.alpha == pytest.approx(6.0, rel=1e-4)
        assert td.mu == pytest.approx(2.0, rel=1e-4)
        assert ep.lambda1 == pytest.approx(PI2, rel=1e-4)

    def test_ball_p2_vs_shooting(self, oracle_ball):
        dom, w, solver, td, ep = oracle_ball
        shot = lambda1_ball_shooting()
        assert shot == pytest.approx(J0_SQUARED, rel=1e-8)
        assert ep.lambda1 == pytest.approx(shot, rel=1e-5)

    @pytest.mark.parametrize("p", [1.5, 3.0])
    def test_interval_general_p_vs_oracles(self, p):
        dom = Domain.interval(1.0, 512)
        ep = principal_eigenpair(dom, make_weight(dom, 1.0), p, tol=1e-11)
        assert ep.converged
        closed = lambda1_interval_closed_form(p)
        shot = lambda1_interval_shooting(p)
        assert closed == pytest.approx(shot, rel=1e-8)
        assert ep.lambda1 == pytest.approx(closed, rel=1e-4)

    def test_weight_scale_covariance(self, oracle_1d_coarse):
        dom, w, solver, td, ep = oracle_1d_coarse
        c = 3.0
        epc = principal_eigenpair(dom, make_weight(dom, c), 2.0, tol=1e-13)
        assert epc.lambda1 == pytest.approx(ep.lambda1 / c, rel=1e-9)
        assert np.max(np.abs(epc.u1.values - ep.u1.values)) < 1e-8

    def test_eigen_equation_residual(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        assert ep.residual <= 1e-9

    def test_zero_weight_rejected(self):
        dom = Domain.interval(1.0, 32)
        with pytest.raises(ValueError):
            principal_eigenpair(dom, ScalarField.zeros(dom, dirichlet=False), 2.0)

    def test_weight_vanishing_on_subregion(self):
        dom = Domain.interval(1.0, 256)
        w = make_weight(dom, lambda x: np.maximum(0.0, np.sin(2 * np.pi * x)))
        ep = principal_eigenpair(dom, w, 2.0, tol=1e-10)
        assert ep.converged
        assert ep.lambda1 > 0
        assert np.all(ep.u1.values[1:-1] > 0)


class TestAlphaBelowLambda1:
    def test_interval_gap(self, oracle_1d):
        dom, w, solver, td, ep = oracle_1d
        rep = check_alpha_below_lambda1(td, ep)
        assert rep.ok
        assert rep.gap == pytest.approx(PI2 - 8.0, rel=1e-3)

    def test_ball_gap(self, oracle_ball):
        dom, w, solver, td, ep = oracle_ball
        rep = check_alpha_below_lambda1(td, ep)
        assert rep.gap == pytest.approx(J0_SQUARED - 4.0, rel=1e-3)

    def test_gap_scales_inversely_with_weight(self):
        dom = Domain.interval(1.0, 256)
        c = 4.0
        td1 = solve_torsion(dom, make_weight(dom, 1.0), 2.0, tol=1e-12)
        ep1 = principal_eigenpair(dom, make_weight(dom, 1.0), 2.0, tol=1e-13)
        tdc = solve_torsion(dom, make_weight(dom, c), 2.0, tol=1e-12)
        epc = principal_eigenpair(dom, make_weight(dom, c), 2.0, tol=1e-13)
        g1 = check_alpha_below_lambda1(td1, ep1).gap
        gc = check_alpha_below_lambda1(tdc, epc).gap
        assert gc == pytest.approx(g1 / c, rel=1e-8)

    def test_violation_raises(self, oracle_1d):
        from dataclasses import replace

        dom, w, solver, td, ep = oracle_1d
        fake = replace(td, sup_phi=0.2)  # alpha = 5 stays fine; 0.05 would not
        bad = replace(td, sup_phi=0.05)  # alpha = 20 > lambda1
        check_alpha_below_lambda1(fake, ep)
        with pytest.raises(EigenError):
            check_alpha_below_lambda1(bad, ep)


class TestScalingInequality:
    def test_reference_values(self):
        # exponent (p-1)/(p-q) = 2 collapses both sides onto lam^2 / value
        assert scaling_inequality(8.0, PI2, 1.0, 2.0, 1.5)

    def test_equality_case(self):
        assert scaling_inequality(PI2, PI2, 3.0, 2.0, 1.5)

    def test_alpha_above_lambda1_rejected(self):
        with pytest.raises(ValueError):
            scaling_inequality(10.0, PI2, 1.0, 2.0, 1.5)

    def test_q_not_below_p_rejected(self):
        with pytest.raises(ValueError):
            scaling_inequality(8.0, PI2, 1.0, 2.0, 2.0)

    @given(
        p=st.floats(1.05, 6.0),
        t=st.floats(0.01, 0.99),
        ratio=st.floats(0.01, 1.0),
        lam=st.floats(1e-6, 1e6),
        lam1=st.floats(1e-4, 1e4),
    )
    @settings(max_examples=200, deadline=None)
    def test_holds_whenever_alpha_below_lambda1(self, p, t, ratio, lam, lam1):
        q = 1.0 + t * (p - 1.0)
        alpha = ratio * lam1
        assert scaling_inequality(alpha, lam1, lam, p, q)

    def test_agrees_with_direct_evaluation_at_moderate_scale(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = rng.uniform(1.2, 4.0)
            q = rng.uniform(1.05, p - 0.05)
            lam1 = rng.uniform(0.5, 20.0)
            alpha = lam1 * rng.uniform(0.05, 1.0)
            lam = rng.uniform(0.1, 10.0)
            e = (p - 1) / (p - q)
            if e * abs(math.log(lam / lam1)) > 200:
                continue
            lhs = lam1 * (lam / lam1) ** e
            rhs = alpha * (lam / alpha) ** e
            direct = lhs <= rhs * (1 + 1e-9)
            assert scaling_inequality(alpha, lam1, lam, p, q) == direct
