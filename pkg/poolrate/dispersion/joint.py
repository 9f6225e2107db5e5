# Joint law of (W, U, T, H) induced by a selection kernel, stored sparsely as
# the list of its positive-probability atoms.

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from poolrate.exceptions import BudgetError, ValidationError
from poolrate.instance import PoolSpace, ProblemInstance, SelectionProblem, distortion_matrix
from poolrate.prob import JointTable, StochKernel
from poolrate.util import enumeration_budget

MASS_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class InducedJoint:
    """Atoms of P_W P(u|w) S(t|u) P^A(h|t).

    Attributes
    ----------
    w, u, t, h : :class:`numpy.ndarray`
        Integer coordinates of each atom.
    prob : :class:`numpy.ndarray`
        Atom probabilities, all positive.
    distortion : :class:`numpy.ndarray`
        d(w;h), shape ``(|W|, |H|)``.
    h_given_u : :class:`numpy.ndarray`
        P(h|u) induced by the kernel.
    h_given_t : :class:`numpy.ndarray`
        The algorithm rows P^A(h|t).
    shape : tuple
        Alphabet sizes ``(|W|, |U|, |T|, |H|)``.
    """

    w: np.ndarray
    u: np.ndarray
    t: np.ndarray
    h: np.ndarray
    prob: np.ndarray
    distortion: np.ndarray
    h_given_u: np.ndarray
    h_given_t: np.ndarray
    shape: tuple

    @property
    def n_atoms(self) -> int:
        return int(self.prob.size)

    @cached_property
    def h_marginal(self) -> np.ndarray:
        return np.bincount(self.h, weights=self.prob, minlength=self.shape[3])

    @cached_property
    def atom_distortion(self) -> np.ndarray:
        return self.distortion[self.w, self.h]

    @property
    def avg_distortion(self) -> float:
        return float(self.prob @ self.atom_distortion)

    @cached_property
    def iota_uh(self) -> np.ndarray:
        """Information density log P(h|u) / P(h) at every atom."""
        return np.log(self.h_given_u[self.u, self.h] / self.h_marginal[self.h])

    def table(self, budget: Optional[int] = None) -> JointTable:
        """Dense joint table over the axes ``W, U, T, H``."""
        budget = enumeration_budget() if budget is None else budget
        size = int(np.prod(self.shape))
        if size > budget:
            raise BudgetError("dense induced joint", size, budget)
        mass = np.zeros(self.shape)
        np.add.at(mass, (self.w, self.u, self.t, self.h), self.prob)
        return JointTable(("W", "U", "T", "H"), mass)


def induced_joint(
    inst: ProblemInstance,
    pool_space: PoolSpace,
    selection_kernel: StochKernel,
    algo_kernel: StochKernel,
) -> InducedJoint:
    """Builds the joint of (W, U, T, H) from its four factors.

    Parameters
    ----------
    inst : `ProblemInstance`
    pool_space : `PoolSpace`
    selection_kernel : `StochKernel`
        S(t|u), one row per pool of ``pool_space``.
    algo_kernel : `StochKernel`
        P^A(h|t), one row per column of ``selection_kernel``.

    Raises
    ------
    ValidationError
        If the kernels do not fit together or the mass is not one.
    """
    selection = np.asarray(selection_kernel.rows)
    algorithm = np.asarray(algo_kernel.rows)
    if selection.shape[0] != pool_space.size or selection.shape[1] != algorithm.shape[0]:
        raise ValidationError("selection and algorithm kernels do not match", "induced_joint")
    p_wu = inst.p_w.weights[:, None] * pool_space.p_u_given_w.rows
    u_idx, t_idx = np.nonzero(selection)
    mass = (
        p_wu[:, u_idx][:, :, None]
        * selection[u_idx, t_idx][None, :, None]
        * algorithm[t_idx][None, :, :]
    )
    w, k, h = np.nonzero(mass)
    prob = mass[w, k, h]
    if abs(prob.sum() - 1.0) > MASS_TOLERANCE:
        raise ValidationError(
            f"induced joint has mass {prob.sum():.12g}", "induced_joint"
        )
    h_given_u = selection @ algorithm
    return InducedJoint(
        w=w,
        u=u_idx[k],
        t=t_idx[k],
        h=h,
        prob=prob / prob.sum(),
        distortion=distortion_matrix(inst),
        h_given_u=h_given_u,
        h_given_t=algorithm,
        shape=(len(inst.w_alphabet), pool_space.size, algorithm.shape[0], algorithm.shape[1]),
    )


def joint_for_kernel(problem: SelectionProblem, kernel) -> InducedJoint:
    """Induced joint of a dense kernel or `StochKernel` on a selection problem."""
    if not isinstance(kernel, StochKernel):
        kernel = StochKernel(np.asarray(kernel, dtype=float))
    return induced_joint(problem.instance, problem.pool_space, kernel, problem.algorithm)
