"""Numerical solution of a one-dimensional nonlinear free-boundary problem.

The pipeline maps the physical problem to a heat-equation frame, solves a
system of weakly singular Volterra equations for boundary densities, and
inverts back to ``u(x, t)`` and the front ``s(t)``.  An explicit
front-fixing finite-difference solver serves as an independent check.
"""

from ._accel import backend, set_backend
from .config import RunConfig, parse_config
from .constants import ConstantsLedger, compute_constants
from .errors import (
    BlowUpError,
    ConfigError,
    ConstraintViolationError,
    DegenerateGeometryError,
    FreeBoundError,
    HorizonExceededError,
    InsufficientDataError,
    InvalidInputError,
    InvalidProfileError,
    InversionSingularityError,
    NoConvergenceError,
    OutOfDomainError,
    PartialResultError,
    UnsupportedOperationError,
)
from .kernels import KernelQuery, eval_image_kernel, eval_K
from .oracle import ComparisonReport, FrontFixGrid, compare, solve_frontfix
from .physical import PhysicalSolution, ResidualReport, invert_chain, invert_solution, invert_state, residual_report
from .problem import (
    FluxSpec,
    InitialProfile,
    PhysicalProblem,
    TransformedProblem,
    build_stretch_map,
    build_transformed_problem,
    validate_problem,
)
from .quadrature import TimeGrid, integrate_singular_history, integrate_space
from .volterra import (
    DensityState,
    HorizonWarning,
    apply_psi,
    extend_solution,
    free_boundaries,
    inner_solve,
    outer_solve,
    phi_update,
    reconstruct_w,
)
from .cli import run_pipeline

__version__ = "0.1.0"
