"""Discrete restricted fractional Laplacians on intervals and radial balls, with
solvers for the linear, sublinear, superlinear, critical and singular problems
built on them."""
from .constants import FracConstants, FracParams, constants, critical_exponent
from .errors import AssemblyError, ConvergenceError, DomainError
from .grids import GridSpec, Interval, RadialBall, make_grid
from .operators import (DiscreteOperator, apply, assemble, assemble_interval, assemble_radial,
                        cached_assemble, hardy_quotient, local_operator, seminorm_sq,
                        sobolev_quotient)
from .linear import (EigenPair, HardyEstimate, auxiliary, hardy_constant, principal_eigenpair,
                     solve_linear, torsion, weak_residual)
from .sublinear import (ContrastReport, IterationTrace, local_contrast, sublinear_solve,
                        subsolution_scale, weighted_l1)
from .superlinear import (CriticalReport, GroundState, apriori_sweep, critical_SR,
                          ground_state, scaling_check)
from .singular import (FSpec, SingularRun, power_seminorm_diag, singular_solve,
                       weighted_power_diag)
from .analysis import ExponentFit, fit_boundary_exponent, make_report, richardson

__version__ = "0.1.0"
