"""Continuous Galerkin time stepping for semi-explicit DAEs."""
from .baselines import ButcherTableau, RadauSolution, radau_integrate, radau_step, radau_tableau
from .benchmarks import (HeatConfig, PendulumConfig, circuit_exact, make_circuit, make_heat,
                         make_pendulum, pendulum_energy)
from .dae_model import SemiExplicitDae, check_consistency, continuous_residual
from .errors import (CgDaeError, EvaluationError, IntegrationError, NoConvergence,
                     SingularNewtonMatrix)
from .polybasis import (CgTableau, LagrangeGrid, assemble_tableau, custom_grid, dbar_inertia,
                        eval_state_basis, eval_test_basis, lebesgue_constants, make_grid)
from .stepper import (NewtonSettings, Trajectory, assemble_newton_matrix, constraint_violation,
                      eval_state, integrate, multiplier_action, multiplier_dual_error,
                      newton_solve)
from .study import ConvergenceRow, ConvergenceTable, StudyConfig, estimate_orders, run_study, write_csv

__version__ = "0.1.0"

__all__ = [
    'ButcherTableau',
    'RadauSolution',
    'radau_integrate',
    'radau_step',
    'radau_tableau',
    'HeatConfig',
    'PendulumConfig',
    'circuit_exact',
    'make_circuit',
    'make_heat',
    'make_pendulum',
    'pendulum_energy',
    'SemiExplicitDae',
    'check_consistency',
    'continuous_residual',
    'CgDaeError',
    'EvaluationError',
    'IntegrationError',
    'NoConvergence',
    'SingularNewtonMatrix',
    'CgTableau',
    'LagrangeGrid',
    'assemble_tableau',
    'custom_grid',
    'dbar_inertia',
    'eval_state_basis',
    'eval_test_basis',
    'lebesgue_constants',
    'make_grid',
    'NewtonSettings',
    'Trajectory',
    'assemble_newton_matrix',
    'constraint_violation',
    'eval_state',
    'integrate',
    'multiplier_action',
    'multiplier_dual_error',
    'newton_solve',
    'ConvergenceRow',
    'ConvergenceTable',
    'StudyConfig',
    'estimate_orders',
    'run_study',
    'write_csv',
]
