"""Source-domain localization for 2D volume potentials.

Observed boundary potentials are approximated by single-layer potentials
on candidate window boundaries; scanning the window and fitting
nonnegative layer densities localizes the sources.
"""
from .assembly import assemble_matrix, log_kernel
from .errors import (DomainError, NonConvergenceError, PotlocError,
                     SingularityError, ValidationError)
from .forward import (NoiseSpec, ObservationSet, SourceDisk,
                      disk_potential_exterior, paper_disks, perturb,
                      synthesize_observations, volume_quadrature_oracle)
from .geometry import (DiscretizedContour, EllipseSpec, Point2, RectangleSpec,
                       Segment, ellipse_observation_points,
                       rectangle_boundary_segments)
from .linalg import least_squares, matvec, tikhonov_solve
from .nndd import (SweepConfig, SweepRecord, SweepReport, evaluate_window,
                   layer_mass, mass_sweep_argmax, sweep, sweep_grid)
from .solvers import (AlphaChoice, NnlsOptions, Solver, SolveResult,
                      choose_alpha_discrepancy, count_sign_changes,
                      kkt_violation, solve_lsq, solve_nnls, solve_tikhonov)

__version__ = "0.1.0"
