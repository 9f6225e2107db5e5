from .config import SolverConfig
from .lagrangian import Convergence, LagrangianPoint, point_from_kernel, solve_lagrangian
from .blahut_arimoto import ReferenceSolution, blahut_arimoto_reference
from .curve import (
    Inversion,
    RDCurve,
    default_lambda_grid,
    invert_to_distortion,
    lambda_star,
    rate_at_distortion,
    solve_at_distortion,
    sweep_lambda,
)
