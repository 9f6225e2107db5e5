# The selection problem: pool space, dataset universe, feasibility and costs
# bundled once per instance, plus the distortion range it admits.

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from poolrate.exceptions import ConvergenceError
from poolrate.instance.algorithms import build_algorithm_kernel
from poolrate.instance.pools import (
    CanonicalDataset,
    PoolSpace,
    enumerate_pool_space,
    feasible_selections,
    posterior_distortion_matrix,
)
from poolrate.instance.problem import ProblemInstance, distortion_matrix, validate_instance
from poolrate.prob import StochKernel


@dataclass(frozen=True)
class DistortionBounds:
    """Distortion range of the selection problem.

    ``d_max`` is the least distortion of a zero-rate selection, i.e. one
    whose hypothesis law does not depend on the pool, and is ``None`` when
    the feasible sets admit no such selection. ``d_max_unrestricted`` is
    min_h E d(W;h).
    """

    d_min: float
    d_max: Optional[float]
    d_max_unrestricted: float

    @property
    def zero_rate_reachable(self) -> bool:
        return self.d_max is not None


@dataclass(frozen=True, eq=False)
class ZeroRateSelection:
    kernel: np.ndarray
    h_marginal: np.ndarray
    distortion: float


@dataclass(frozen=True, eq=False)
class SelectionProblem:
    """Everything the solvers need about one instance.

    Attributes
    ----------
    instance : `ProblemInstance`
    pool_space : `PoolSpace`
    datasets : tuple of `CanonicalDataset`
        Every dataset feasible for some pool, in canonical order.
    feasible : tuple of :class:`numpy.ndarray`
        For each pool the sorted indices into ``datasets`` of T(u).
    multiplicity : tuple of :class:`numpy.ndarray`
        Number of index subsets producing each feasible dataset.
    algorithm : `StochKernel`
        P^A(h|t) over ``datasets``.
    distortion : :class:`numpy.ndarray`
        d(w;h), shape ``(|W|, |H|)``.
    posterior_distortion : :class:`numpy.ndarray`
        E[d(W;h)|U=u], shape ``(|U|, |H|)``.
    """

    instance: ProblemInstance
    pool_space: PoolSpace
    datasets: Tuple[CanonicalDataset, ...]
    feasible: Tuple[np.ndarray, ...]
    multiplicity: Tuple[np.ndarray, ...]
    algorithm: StochKernel
    distortion: np.ndarray
    posterior_distortion: np.ndarray

    @property
    def n_pools(self) -> int:
        return self.pool_space.size

    @property
    def n_datasets(self) -> int:
        return len(self.datasets)

    @property
    def n_hypotheses(self) -> int:
        return self.distortion.shape[1]

    @property
    def p_u(self) -> np.ndarray:
        return self.pool_space.p_u.weights

    def costs(self, i: int) -> np.ndarray:
        """Expected posterior distortion c(u,t) of each feasible dataset of
        pool ``i``.
        """
        return self.algorithm.rows[self.feasible[i]] @ self.posterior_distortion[i]

    def feasibility_mask(self) -> np.ndarray:
        mask = np.zeros((self.n_pools, self.n_datasets), dtype=bool)
        for i, columns in enumerate(self.feasible):
            mask[i, columns] = True
        return mask

    def uniform_subset_kernel(self) -> np.ndarray:
        """Selection kernel drawing an index subset uniformly at random."""
        kernel = np.zeros((self.n_pools, self.n_datasets))
        for i, (columns, counts) in enumerate(zip(self.feasible, self.multiplicity)):
            kernel[i, columns] = counts / counts.sum()
        return kernel

    @cached_property
    def bounds(self) -> DistortionBounds:
        return compute_d_bounds(self)


def build_selection_problem(
    inst: ProblemInstance, budget: Optional[int] = None, validate: bool = True
) -> SelectionProblem:
    """Enumerates pools and their feasible datasets and evaluates the
    algorithm on the resulting dataset universe.

    Parameters
    ----------
    inst : `ProblemInstance`
        Instance to solve.
    budget : int, optional
        Enumeration budget for pools and for the selections of each pool.
    validate : bool
        Run :func:`validate_instance` first.

    Returns
    -------
    `SelectionProblem`
    """
    if validate:
        validate_instance(inst)
    pool_space = enumerate_pool_space(inst, budget)
    per_pool = [feasible_selections(inst, pool, budget=budget) for pool in pool_space.pools]

    universe = sorted(
        {t for selection in per_pool for t in selection.datasets},
        key=CanonicalDataset.sort_key,
    )
    position: Dict[CanonicalDataset, int] = {t: i for i, t in enumerate(universe)}
    feasible, multiplicity = [], []
    for selection in per_pool:
        columns = np.array([position[t] for t in selection.datasets], dtype=int)
        order = np.argsort(columns)
        feasible.append(columns[order])
        multiplicity.append(np.array(selection.multiplicity, dtype=float)[order])

    return SelectionProblem(
        instance=inst,
        pool_space=pool_space,
        datasets=tuple(universe),
        feasible=tuple(feasible),
        multiplicity=tuple(multiplicity),
        algorithm=build_algorithm_kernel(inst, universe),
        distortion=distortion_matrix(inst),
        posterior_distortion=posterior_distortion_matrix(inst, pool_space),
    )


def zero_rate_selection(problem: SelectionProblem) -> Optional[ZeroRateSelection]:
    """Least-distortion selection whose hypothesis law is the same for every
    pool.

    Solves the linear program over per-pool mixtures s_u of feasible datasets
    and a common hypothesis law q with s_u P^A = q for every u, minimising
    sum_h q(h) E d(W;h).

    Returns
    -------
    `ZeroRateSelection` or None
        None when no such selection exists.
    """
    n_h = problem.n_hypotheses
    sizes = [columns.size for columns in problem.feasible]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n_vars = offsets[-1] + n_h

    rows, cols, vals = [], [], []
    constraint = 0
    for i, columns in enumerate(problem.feasible):
        block = np.arange(offsets[i], offsets[i + 1])
        rows.extend([constraint] * block.size)
        cols.extend(block)
        vals.extend([1.0] * block.size)
        constraint += 1
        atoms = problem.algorithm.rows[columns]
        for h in range(n_h):
            nonzero = np.flatnonzero(atoms[:, h])
            rows.extend([constraint] * (nonzero.size + 1))
            cols.extend(list(block[nonzero]) + [offsets[-1] + h])
            vals.extend(list(atoms[nonzero, h]) + [-1.0])
            constraint += 1
    a_eq = sparse.csr_matrix((vals, (rows, cols)), shape=(constraint, n_vars))
    b_eq = np.zeros(constraint)
    b_eq[:: n_h + 1] = 1.0

    average = problem.p_u @ problem.posterior_distortion
    objective = np.concatenate([np.zeros(offsets[-1]), average])
    result = linprog(objective, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if result.status == 2:
        return None
    if result.status != 0:
        raise ConvergenceError(f"zero-rate linear program failed: {result.message}")

    kernel = np.zeros((problem.n_pools, problem.n_datasets))
    for i, columns in enumerate(problem.feasible):
        weights = np.clip(result.x[offsets[i] : offsets[i + 1]], 0.0, None)
        kernel[i, columns] = weights / weights.sum()
    q = np.clip(result.x[offsets[-1] :], 0.0, None)
    return ZeroRateSelection(kernel, q / q.sum(), float(q @ average / q.sum()))


def compute_d_bounds(problem: SelectionProblem) -> DistortionBounds:
    """Distortion range [d_min, d_max] of the selection problem.

    d_min = sum_u P(u) min_{t in T(u)} c(u,t) is attained by the greedy
    selection; d_max is the distortion of the best zero-rate selection.
    """
    d_min = float(
        sum(p * problem.costs(i).min() for i, p in enumerate(problem.p_u))
    )
    zero = zero_rate_selection(problem)
    unrestricted = float((problem.p_u @ problem.posterior_distortion).min())
    d_max = None if zero is None else max(zero.distortion, d_min)
    return DistortionBounds(d_min, d_max, unrestricted)
