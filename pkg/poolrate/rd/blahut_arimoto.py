# Log-domain Blahut-Arimoto iteration over selection kernels with per-pool
# feasibility masks. Exact for instances whose algorithm is a bijection from
# datasets to hypotheses, where it serves as an independent reference for
# solve_lagrangian.

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from poolrate.exceptions import ConvergenceError
from poolrate.instance import SelectionProblem


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    lam: float
    rate: float
    avg_distortion: float
    kernel: np.ndarray
    iterations: int


def blahut_arimoto_reference(
    problem: SelectionProblem,
    lam: float,
    tol: float = 1e-14,
    max_iter: int = 200000,
) -> ReferenceSolution:
    """Alternating minimisation of I(U;T) + lam E[c(U,T)] over S(t|u).

    Parameters
    ----------
    problem : `SelectionProblem`
        Problem whose algorithm rows are distinct point masses.
    lam : float
        Lagrange multiplier.
    tol : float
        Stop when the Lagrangian improves by less than this.
    max_iter : int
        Iteration cap.
    """
    mask = problem.feasibility_mask()
    cost = np.full(mask.shape, np.inf)
    for i, columns in enumerate(problem.feasible):
        cost[i, columns] = problem.costs(i)
    p_u = problem.p_u
    log_p_u = np.log(p_u)

    log_s = np.where(mask, 0.0, -np.inf)
    log_s -= logsumexp(log_s, axis=1, keepdims=True)
    previous = np.inf
    for iteration in range(1, max_iter + 1):
        log_q = logsumexp(log_p_u[:, None] + log_s, axis=0)
        log_s = np.where(mask, log_q[None, :] - lam * np.where(mask, cost, 0.0), -np.inf)
        log_s -= logsumexp(log_s, axis=1, keepdims=True)

        s = np.exp(log_s)
        log_q = logsumexp(log_p_u[:, None] + log_s, axis=0)
        ratio = np.where(mask, log_s - log_q[None, :], 0.0)
        rate = float(p_u @ np.sum(s * ratio, axis=1))
        distortion = float(p_u @ np.sum(np.where(mask, s * cost, 0.0), axis=1))
        objective = rate + lam * distortion
        if previous - objective < tol:
            return ReferenceSolution(float(lam), max(rate, 0.0), distortion, s, iteration)
        previous = objective
    raise ConvergenceError(
        f"reference iteration at lambda={lam:g} did not converge", previous - objective
    )
