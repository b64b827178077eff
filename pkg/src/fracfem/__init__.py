"""Galerkin finite elements for 1-D diffusion with a spatial derivative of
fractional order between 1 and 2.

The pieces, bottom up:

* :mod:`fracfem.kernels` -- exact fractional calculus on powers and hats
* :mod:`fracfem.assembly` -- Toeplitz stiffness, mass matrices, projections
* :mod:`fracfem.solvers` -- dense LU and Toeplitz-matvec GMRES backends
* :mod:`fracfem.stepping` -- backward Euler / Crank-Nicolson / damped variant
* :mod:`fracfem.diagnostics` -- sector, numerical range, smoothing checks
* :mod:`fracfem.experiments` -- convergence-study harness
* :mod:`fracfem.cli` -- the ``fracfem`` command

The quadrature oracle in :mod:`fracfem.quadrature` certifies every closed
form; it is test machinery, not a production path.
"""

from .assembly import (MassMatrix, ToeplitzOperator, assemble_mass,
                       assemble_stiffness, assemble_weighted_mass,
                       l2_projection, load_vector, ritz_projection,
                       symmetric_part)
from .diagnostics import (ConstantsReport, SectorReport, SmoothingReport,
                          estimate_constants, numerical_range_sample,
                          sector_check, smoothing_check)
from .experiments import (ConvergenceReport, ErrorNorms, ExperimentConfig,
                          ReportRow, compute_errors, run_smalltime_study,
                          run_spatial_study, run_temporal_study)
from .initial_data import (InitialData, StepPotential, nodal, quarter_power,
                           smooth_quadratic, step_half)
from .kernels import (FracOrder, PiecewisePowerFunction, TruncatedPowerTerm,
                      rl_deriv_power, rl_halfderiv_hat, rl_integral_power,
                      rl_lowderiv_hat)
from .mesh import UniformMesh, interpolant, pl_evaluate, prolong
from .reporting import emit_csv, emit_markdown, parse_csv, write_report
from .solvers import (Factorization, SolverError, SystemOperator, factor_dense,
                      make_solver, solve_iterative, toeplitz_matvec)
from .stepping import (SchemeSpec, Trajectory, run_scheme, smoothing_constant,
                       stability_fn, stability_fn_pow)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
