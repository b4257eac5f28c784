"""Desk-scale toolkit for gradient-dependent p-Laplacian Dirichlet problems.

Builds and verifies the explicit objects behind positive-solution
certificates: torsion profiles and their normalization constants, the
principal eigenpair, ordered sub/super-solution pairs, sandwiched
fixed-point solutions, the homogeneous-limit continuation, and parameter
admissibility thresholds, with report and figure emission via the CLI.
"""

from .mesh import (
    Domain,
    MeshError,
    ScalarField,
    field_from_csv,
    field_from_json,
    field_to_csv,
    field_to_json,
    grad_magnitude,
    make_weight,
    nodal_gradient_magnitude,
    sup_grad_norm,
    sup_norm,
    weak_residual,
)
from .plaplace import (
    OrderingReport,
    PLapSolver,
    SolveInfo,
    TorsionData,
    apply_plap,
    compare_fields,
    solve_torsion,
)
from .eigen import (
    EigenPair,
    check_alpha_below_lambda1,
    principal_eigenpair,
    scaling_inequality,
)
from .subsuper import (
    HypothesisReport,
    ProblemSpec,
    SubSuperPair,
    build_pair,
    check_h1,
    check_h2,
    check_h3,
    nonlinearity,
    select_subsolution_eps,
    solve_super_amplitude,
    subsolution_eps,
    supersolution_two_param,
)
from .solve import (
    ContinuationTrace,
    SolveReport,
    continuation_q_to_p,
    frozen_gradient_solve,
    homogeneity_check,
    nonexistence_probe,
)
from .apps import (
    ThresholdReport,
    example1_driver,
    example1_thresholds,
    example2_driver,
    example2_thresholds,
    run_scenario,
    threshold_report,
)
from .expressions import Expression, parse_expression
from .scenario import Scenario, ScenarioError, load_scenario

__version__ = "0.1.0"
