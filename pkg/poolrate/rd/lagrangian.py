# Lagrangian form of the active-learning rate-distortion problem:
#     min_S  I(U;H) + lam * E[d(W;H)]
# over selection kernels S with S(t|u) > 0 only for t in T(u). Alternates
# between the hypothesis marginal q (closed form) and the per-pool selection
# weights (away-step Frank-Wolfe). The objective is non-increasing across
# outer iterations.

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import rel_entr

from poolrate.exceptions import ConvergenceError, DomainError
from poolrate.instance import SelectionProblem, zero_rate_selection
from poolrate.prob import FiniteDist, JointTable, StochKernel, mutual_information
from poolrate.rd.config import SolverConfig
from poolrate.rd.frank_wolfe import solve_row
from poolrate.terminal_enhancer import tcols

INCREASE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Convergence:
    outer_iterations: int
    last_decrease: float
    max_inner_gap: float


@dataclass(frozen=True, eq=False)
class LagrangianPoint:
    """Solution of the Lagrangian problem at one multiplier.

    Attributes
    ----------
    lam : float
        Lagrange multiplier.
    rate : float
        I(U;H) in nats, recomputed exactly from the final kernel.
    avg_distortion : float
        E[d(W;H)].
    selection_kernel : `StochKernel`
        S(t|u), pools by datasets of the problem.
    h_given_u : :class:`numpy.ndarray`
        Induced P(h|u).
    h_marginal : `FiniteDist`
    convergence : `Convergence`
    """

    lam: float
    rate: float
    avg_distortion: float
    selection_kernel: StochKernel
    h_given_u: np.ndarray
    h_marginal: FiniteDist
    convergence: Convergence

    @property
    def objective(self) -> float:
        return self.rate + self.lam * self.avg_distortion

    def to_row(self) -> dict:
        return {
            "lambda": self.lam,
            "distortion": self.avg_distortion,
            "rate_nats": self.rate,
            "rate_bits": self.rate / np.log(2.0),
        }

    def diagnostics_row(self) -> dict:
        return {
            "lambda": self.lam,
            "distortion": self.avg_distortion,
            "objective": self.objective,
            "outer_iterations": self.convergence.outer_iterations,
        }


def point_from_kernel(
    problem: SelectionProblem,
    kernel: np.ndarray,
    lam: float,
    convergence: Optional[Convergence] = None,
) -> LagrangianPoint:
    """Evaluates rate and distortion of an arbitrary selection kernel.

    Parameters
    ----------
    problem : `SelectionProblem`
    kernel : :class:`numpy.ndarray`
        Dense S(t|u) of shape ``(n_pools, n_datasets)``.
    lam : float
        Multiplier recorded with the point.
    """
    kernel = np.asarray(kernel, dtype=float)
    h_given_u = kernel @ problem.algorithm.rows
    p_u = problem.p_u
    table = JointTable(("U", "H"), p_u[:, None] * h_given_u)
    rate = mutual_information(table, "U", "H")
    distortion = float(np.sum(p_u * np.sum(h_given_u * problem.posterior_distortion, axis=1)))
    return LagrangianPoint(
        lam=float(lam),
        rate=rate,
        avg_distortion=distortion,
        selection_kernel=StochKernel(kernel, problem.pool_space.pools, problem.datasets),
        h_given_u=h_given_u,
        h_marginal=FiniteDist(p_u @ h_given_u, problem.instance.h_alphabet),
        convergence=convergence or Convergence(0, 0.0, 0.0),
    )


@dataclass(frozen=True, eq=False)
class _PoolAtoms:
    """Feasible datasets of one pool grouped by identical algorithm rows.
    Each group is represented by its first member in canonical order.
    """

    atoms: np.ndarray
    costs: np.ndarray
    representative: np.ndarray
    weight: np.ndarray
    inverse: np.ndarray


def _pool_atoms(problem: SelectionProblem) -> List[_PoolAtoms]:
    grouped = []
    for i, columns in enumerate(problem.feasible):
        rows = problem.algorithm.rows[columns]
        _, first, inverse = np.unique(rows, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(order.size)
        atoms = rows[first[order]]
        grouped.append(
            _PoolAtoms(
                atoms=atoms,
                costs=atoms @ problem.posterior_distortion[i],
                representative=columns[first[order]],
                weight=np.bincount(rank[inverse], minlength=order.size).astype(float),
                inverse=rank[inverse],
            )
        )
    return grouped


def _initial_weights(groups: List[_PoolAtoms], init: Optional[np.ndarray], problem) -> List[np.ndarray]:
    weights = []
    for i, group in enumerate(groups):
        uniform = group.weight / group.weight.sum()
        if init is None:
            weights.append(uniform)
            continue
        warm = np.bincount(
            group.inverse, weights=init[i, problem.feasible[i]], minlength=group.atoms.shape[0]
        )
        if warm.sum() <= 0:
            weights.append(uniform)
            continue
        # stay in the relative interior so that no hypothesis leaves the support
        weights.append(0.999 * warm / warm.sum() + 0.001 * uniform)
    return weights


def _lagrangian(p_u, rows_p, costs) -> Tuple[float, np.ndarray]:
    q = p_u @ rows_p
    rate = float(np.sum(p_u[:, None] * rel_entr(rows_p, q[None, :])))
    return rate + costs, q


def solve_lagrangian(
    problem: SelectionProblem,
    lam: float,
    config: Optional[SolverConfig] = None,
    init: Optional[np.ndarray] = None,
    verbose: bool = False,
) -> LagrangianPoint:
    """Minimises I(U;H) + lam E[d(W;H)] over feasible selection kernels.

    At ``lam = 0`` the least-distortion zero-rate selection is returned when
    one exists; otherwise the solver runs with ``lam = 0`` and returns the
    minimum-information selection (the rate floor).

    Parameters
    ----------
    problem : `SelectionProblem`
        Problem built by :func:`poolrate.instance.build_selection_problem`.
    lam : float
        Non-negative multiplier.
    config : `SolverConfig`, optional
        Tolerances and caps.
    init : :class:`numpy.ndarray`, optional
        Warm start kernel of shape ``(n_pools, n_datasets)``.
    verbose : bool
        Print progress.

    Returns
    -------
    `LagrangianPoint`

    Raises
    ------
    DomainError
        If ``lam`` is negative or not finite.
    ConvergenceError
        If the objective increases or the iteration cap is reached.
    """
    if not np.isfinite(lam) or lam < 0:
        raise DomainError(f"lambda must be a finite non-negative number, got {lam}")
    config = config or SolverConfig()
    if lam == 0:
        zero = zero_rate_selection(problem)
        if zero is not None:
            return point_from_kernel(problem, zero.kernel, 0.0)

    p_u = problem.p_u
    groups = _pool_atoms(problem)
    weights = _initial_weights(groups, init, problem)
    rows_p = np.vstack([s @ g.atoms for s, g in zip(weights, groups)])
    costs = lam * sum(p * (s @ g.costs) for p, s, g in zip(p_u, weights, groups))
    objective, q = _lagrangian(p_u, rows_p, costs)

    decrease, max_gap = np.inf, np.inf
    for iteration in range(1, config.max_outer + 1):
        gaps = []
        for i, group in enumerate(groups):
            weights[i], gap = solve_row(
                group.atoms,
                group.costs,
                q,
                lam,
                weights[i],
                config.tol_inner,
                config.max_inner,
                config.line_search_tol,
            )
            gaps.append(gap)
        rows_p = np.vstack([s @ g.atoms for s, g in zip(weights, groups)])
        costs = lam * sum(p * (s @ g.costs) for p, s, g in zip(p_u, weights, groups))
        updated, q = _lagrangian(p_u, rows_p, costs)
        decrease, max_gap = objective - updated, max(gaps)
        if decrease < -INCREASE_TOLERANCE * max(1.0, abs(objective)):
            raise ConvergenceError(
                f"lambda={lam:g}: Lagrangian increased at iteration {iteration}", decrease
            )
        objective = updated
        if verbose and iteration % 100 == 0:
            print(
                tcols.OKCYAN + f"lambda={lam:g} " + tcols.ENDC
                + f"iteration {iteration}: objective {objective:.12f}"
            )
        if decrease < config.tol_outer:
            break
    else:
        raise ConvergenceError(
            f"lambda={lam:g}: no convergence after {config.max_outer} iterations", decrease
        )

    kernel = np.zeros((problem.n_pools, problem.n_datasets))
    for i, (s, group) in enumerate(zip(weights, groups)):
        kernel[i, group.representative] = s
    return point_from_kernel(
        problem, kernel, lam, Convergence(iteration, float(decrease), float(max_gap))
    )
