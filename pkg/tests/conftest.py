import numpy as np
import pytest

from plap import Domain, make_weight, solve_torsion
from plap.eigen import principal_eigenpair
from plap.plaplace import PLapSolver

PI2 = np.pi**2
J0_SQUARED = 5.783185962946785  # first zero of the order-0 Bessel function, squared


@pytest.fixture(scope="session")
def oracle_1d():
    """Unit interval, omega = 1, p = 2 at h = 2^-10: the analytic workhorse."""
    dom = Domain.interval(1.0, 1024)
    w = make_weight(dom, 1.0)
    solver = PLapSolver(dom, 2.0)
    td = solve_torsion(dom, w, 2.0, tol=1e-11, solver=solver)
    ep = principal_eigenpair(dom, w, 2.0, tol=1e-13, solver=solver, torsion=td)
    return dom, w, solver, td, ep


@pytest.fixture(scope="session")
def oracle_1d_coarse():
    """Same problem at h = 2^-8 for iteration-heavy tests."""
    dom = Domain.interval(1.0, 256)
    w = make_weight(dom, 1.0)
    solver = PLapSolver(dom, 2.0)
    td = solve_torsion(dom, w, 2.0, tol=1e-12, solver=solver)
    ep = principal_eigenpair(dom, w, 2.0, tol=1e-13, solver=solver, torsion=td)
    return dom, w, solver, td, ep


@pytest.fixture(scope="session")
def oracle_ball():
    """Unit ball (N = 2), omega = 1, p = 2."""
    dom = Domain.ball(1.0, 2, 1024)
    w = make_weight(dom, 1.0)
    solver = PLapSolver(dom, 2.0)
    td = solve_torsion(dom, w, 2.0, tol=1e-11, solver=solver)
    ep = principal_eigenpair(dom, w, 2.0, tol=1e-12, solver=solver, torsion=td)
    return dom, w, solver, td, ep
