"""Front speeds of G-equation cell problems in cellular and shear flows."""

from .cellular import (CellProblemSpec, DiagnosticsReport, EffectiveHResult,
                       auto_grid_n, diagnostics, solve_inviscid_reference,
                       solve_steady_iteration, solve_time_marching)
from .errors import (CFLViolation, ConfigError, DegenerateProfile,
                     DiffusionTooSmall, GcellError, InsufficientData,
                     InvalidModelParams, MissingColumn, NonConvergence,
                     PartialFailure, SingularProblem)
from .flows import (FlowField, band_mask, cellular_flow, eval_cellular,
                    quarter_cells, shear_flow, shear_profile, stream_values)
from .grid import (PeriodicGrid, RegionMask, ScalarField1D, ScalarField2D,
                   central_gradient, godunov_grad_mag, grid_1d, grid_2d,
                   integrate, laplacian, upwind_advect)
from .shear import (ShearResult, ShearSpec, asymptotic_slope,
                    d_sweep_quadratic_law, jkm_limit_check, solve_shear)
from .transport import (TransportResult, beta_lambda_ratio, lp_gradient_norm,
                        offcore_decay, solve_T)

__version__ = "0.1.0"
