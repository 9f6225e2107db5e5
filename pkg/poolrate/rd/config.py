from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration caps of the rate-distortion solver.

    Parameters
    ----------
    tol_outer : float
        The outer loop stops when the Lagrangian decreases by less than this.
    tol_inner : float
        Frank-Wolfe gap at which a per-pool subproblem counts as solved.
    max_outer : int
        Outer iteration cap.
    max_inner : int
        Frank-Wolfe step cap per subproblem and outer iteration.
    line_search_tol : float
        Absolute tolerance of the exact line search.
    bisection_rel_tol : float
        Distortion tolerance of the multiplier bisection, relative to
        d_max - d_min.
    """

    tol_outer: float = 1e-10
    tol_inner: float = 1e-9
    max_outer: int = 10000
    max_inner: int = 5000
    line_search_tol: float = 1e-12
    bisection_rel_tol: float = 1e-6

    def to_dict(self) -> dict:
        return asdict(self)
