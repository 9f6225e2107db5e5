# Away-step Frank-Wolfe on the simplex of selection weights of one pool.
#
# The subproblem for pool u, with the hypothesis marginal q held fixed, is
#     min_s  D(s A || q) + lam * <s, c>
# over probability vectors s on the distinct algorithm rows A (atoms) of the
# pool's feasible datasets.

from typing import Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import rel_entr


def row_objective(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(rel_entr(p, q)))


def _gradient(s: np.ndarray, atoms: np.ndarray, costs: np.ndarray, q: np.ndarray, lam: float):
    p = s @ atoms
    log_ratio = np.full(p.shape, -np.inf)
    positive = p > 0
    log_ratio[positive] = np.log(p[positive] / q[positive])
    # hypotheses an atom never outputs do not contribute
    weighted = np.multiply(atoms, log_ratio + 1.0, out=np.zeros_like(atoms), where=atoms > 0)
    return weighted.sum(axis=1) + lam * costs, p


def _line_search(p, delta, q, cost_change, gamma_max, xatol):
    def phi(gamma):
        return row_objective(np.clip(p + gamma * delta, 0.0, None), q) + gamma * cost_change

    result = minimize_scalar(
        phi, bounds=(0.0, gamma_max), method="bounded", options={"xatol": xatol}
    )
    gamma = float(min(result.x, gamma_max))
    if gamma_max - gamma <= xatol and phi(gamma_max) <= phi(gamma):
        gamma = gamma_max
    if phi(gamma) >= phi(0.0):
        return 0.0
    return gamma


def solve_row(
    atoms: np.ndarray,
    costs: np.ndarray,
    q: np.ndarray,
    lam: float,
    s0: np.ndarray,
    tol: float,
    max_iter: int,
    xatol: float = 1e-12,
) -> Tuple[np.ndarray, float]:
    """Runs away-step Frank-Wolfe from ``s0``.

    Parameters
    ----------
    atoms : :class:`numpy.ndarray`
        Distinct algorithm rows, shape ``(J, |H|)``.
    costs : :class:`numpy.ndarray`
        Expected posterior distortion of each atom.
    q : :class:`numpy.ndarray`
        Current hypothesis marginal, positive wherever an atom puts mass.
    lam : float
        Lagrange multiplier.
    s0 : :class:`numpy.ndarray`
        Starting weights.
    tol : float
        Frank-Wolfe gap at which to stop.
    max_iter : int
        Step cap.

    Returns
    -------
    Tuple
        :class:`numpy.ndarray`
            Final weights.
        float
            Final Frank-Wolfe gap.
    """
    s = np.array(s0, dtype=float)
    if s.size == 1:
        return np.ones(1), 0.0
    gap = np.inf
    for _ in range(max_iter):
        grad, p = _gradient(s, atoms, costs, q, lam)
        support = np.flatnonzero(s > 0)
        current = float(s[support] @ grad[support])
        v = int(np.argmin(grad))
        gap = current - grad[v]
        if gap <= tol:
            break
        a = int(support[np.argmax(grad[support])])
        away = not (gap >= grad[a] - current or s[a] >= 1.0)
        if not away:
            direction = -s.copy()
            direction[v] += 1.0
            gamma_max = 1.0
        else:
            direction = s.copy()
            direction[a] -= 1.0
            gamma_max = s[a] / (1.0 - s[a])
        gamma = _line_search(
            p, direction @ atoms, q, lam * float(costs @ direction), gamma_max, xatol
        )
        if gamma == 0.0:
            break
        s = np.clip(s + gamma * direction, 0.0, None)
        if away and gamma == gamma_max:
            s[a] = 0.0
        s /= s.sum()
    return s, float(gap)
