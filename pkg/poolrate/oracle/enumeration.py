# Exhaustive oracles: exact excess-distortion probabilities of selection
# strategies and the least probability over all deterministic selection maps.

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from poolrate.exceptions import BudgetError, ValidationError
from poolrate.instance import ProblemInstance, SelectionProblem, build_selection_problem
from poolrate.prob import StochKernel
from poolrate.util import enumeration_budget, selection_budget

EXCESS_TOLERANCE = 1e-12
CHUNK = 100000


@dataclass(frozen=True)
class SelectionMap:
    """Deterministic selection: for every pool of a problem, in pool order,
    the index of the chosen dataset in ``problem.datasets``.
    """

    assignment: Tuple[int, ...]

    def kernel(self, problem: SelectionProblem) -> np.ndarray:
        kernel = np.zeros((problem.n_pools, problem.n_datasets))
        kernel[np.arange(problem.n_pools), list(self.assignment)] = 1.0
        return kernel

    def as_dict(self, problem: SelectionProblem) -> dict:
        return {
            pool: problem.datasets[t] for pool, t in zip(problem.pool_space.pools, self.assignment)
        }

    @classmethod
    def from_id(cls, problem: SelectionProblem, map_id: int) -> "SelectionMap":
        """Map number ``map_id`` in row-major order over the pools' feasible
        datasets.
        """
        sizes = [columns.size for columns in problem.feasible]
        digits = np.unravel_index(int(map_id), sizes)
        return cls(tuple(int(columns[i]) for columns, i in zip(problem.feasible, digits)))


@dataclass(frozen=True)
class ExcessResult:
    eps: float
    avg_distortion: float


def excess_matrix(problem: SelectionProblem, d: float) -> np.ndarray:
    """P[d(W;H) > d | U=u, T=t] for every pool and dataset."""
    exceeds = (problem.distortion > d + EXCESS_TOLERANCE).astype(float)
    posterior = problem.pool_space.p_w_given_u.rows @ exceeds
    return posterior @ problem.algorithm.rows.T


def _letter_law(problem: SelectionProblem, kernel: np.ndarray) -> np.ndarray:
    """Joint law of (w, h) for one letter under a per-letter kernel."""
    p_wu = problem.instance.p_w.weights[:, None] * problem.pool_space.p_u_given_w.rows
    return p_wu @ (kernel @ problem.algorithm.rows)


def exact_excess_probability(
    problem: SelectionProblem,
    selection: Union[SelectionMap, StochKernel, np.ndarray, Dict],
    d: float,
    k: int = 1,
    budget: Optional[int] = None,
) -> ExcessResult:
    """Exact P[d(W^k; H^k) > d] and E[d(W^k; H^k)] of a selection strategy.

    Parameters
    ----------
    problem : `SelectionProblem`
    selection
        A `SelectionMap`, a `StochKernel` or dense kernel (applied letter by
        letter), or for ``k > 1`` a dictionary from tuples of k pool indices
        to tuples of k dataset indices (a joint map over the block).
    d : float
        Distortion threshold; ties count as success.
    k : int
        Number of pools in the block.
    budget : int, optional
        Largest number of outcomes to enumerate.
    """
    budget = enumeration_budget() if budget is None else budget
    table = problem.distortion
    if isinstance(selection, dict) and k > 1:
        return _joint_map_excess(problem, selection, d, k, budget)
    if isinstance(selection, SelectionMap):
        kernel = selection.kernel(problem)
    elif isinstance(selection, StochKernel):
        kernel = np.asarray(selection.rows)
    else:
        kernel = np.asarray(selection, dtype=float)

    law = _letter_law(problem, kernel)
    if k == 1:
        return ExcessResult(
            float(np.sum(law * (table > d + EXCESS_TOLERANCE))), float(np.sum(law * table))
        )
    outcomes = np.flatnonzero(law.ravel() > 0)
    required = outcomes.size**k
    if required > budget:
        raise BudgetError("block outcome enumeration", required, budget)
    values, probs = table.ravel()[outcomes], law.ravel()[outcomes]
    total = np.zeros(1)
    mass = np.ones(1)
    for _ in range(k):
        total = (total[:, None] + values[None, :]).ravel()
        mass = (mass[:, None] * probs[None, :]).ravel()
    block = total / k
    return ExcessResult(
        float(mass @ (block > d + EXCESS_TOLERANCE)), float(mass @ block)
    )


def _joint_map_excess(problem, selection: dict, d: float, k: int, budget: int) -> ExcessResult:
    p_wu = problem.instance.p_w.weights[:, None] * problem.pool_space.p_u_given_w.rows
    letters = np.argwhere(p_wu > 0)
    n_h = problem.n_hypotheses
    required = letters.shape[0] ** k * n_h**k
    if required > budget:
        raise BudgetError("joint map enumeration", required, budget)
    algorithm = problem.algorithm.rows
    eps = average = 0.0
    for block in itertools.product(range(letters.shape[0]), repeat=k):
        ws = [letters[i][0] for i in block]
        us = tuple(int(letters[i][1]) for i in block)
        if us not in selection:
            raise ValidationError(f"joint map has no entry for pools {us}", "selection")
        ts = selection[us]
        weight = float(np.prod([p_wu[letters[i][0], letters[i][1]] for i in block]))
        for hs in itertools.product(range(n_h), repeat=k):
            p = weight * float(np.prod([algorithm[t, h] for t, h in zip(ts, hs)]))
            if p == 0:
                continue
            value = float(np.mean([problem.distortion[w, h] for w, h in zip(ws, hs)]))
            average += p * value
            eps += p * (value > d + EXCESS_TOLERANCE)
    return ExcessResult(eps, average)


@dataclass(frozen=True)
class EnumerationRecord:
    n: int
    d: float
    min_excess_prob: float
    argmin_map: int
    min_avg_distortion: float
    n_maps: int


@dataclass(frozen=True)
class EnumerationReport:
    """Least excess-distortion probability over deterministic maps for each
    label budget n and threshold d, and the least n meeting each (d, eps).
    """

    k: int
    records: Tuple[EnumerationRecord, ...]
    n_star: Dict[Tuple[float, float], Optional[int]] = field(default_factory=dict)

    def min_excess(self, n: int, d: float) -> float:
        for record in self.records:
            if record.n == n and record.d == d:
                return record.min_excess_prob
        raise KeyError((n, d))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([record.__dict__ for record in self.records])

    def n_star_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [{"d": d, "eps": eps, "n_star": n} for (d, eps), n in sorted(self.n_star.items())]
        )


def _map_count(problem: SelectionProblem) -> int:
    count = 1
    for columns in problem.feasible:
        count *= int(columns.size)
    return count


def map_values(problem: SelectionProblem, per_pool: Sequence[np.ndarray], budget: Optional[int] = None):
    """Yields (first map id, values) chunks of sum_u P(u) v_u(map(u)) over
    every deterministic map, where ``per_pool[u]`` lists v_u over the feasible
    datasets of pool u.
    """
    budget = selection_budget() if budget is None else budget
    sizes = [columns.size for columns in problem.feasible]
    count = _map_count(problem)
    if count > budget:
        raise BudgetError("deterministic selection maps", count, budget)
    weighted = [p * np.asarray(v) for p, v in zip(problem.p_u, per_pool)]
    for start in range(0, count, CHUNK):
        ids = np.arange(start, min(start + CHUNK, count))
        digits = np.unravel_index(ids, sizes)
        values = np.zeros(ids.size)
        for u, digit in enumerate(digits):
            values += weighted[u][digit]
        yield start, values


def min_over_maps(problem: SelectionProblem, per_pool, budget=None) -> Tuple[float, int]:
    best, best_id = np.inf, -1
    for start, values in map_values(problem, per_pool, budget):
        i = int(np.argmin(values))
        if values[i] < best:
            best, best_id = float(values[i]), start + i
    return best, best_id


def _excess_per_pool(problem: SelectionProblem, d: float) -> List[np.ndarray]:
    excess = excess_matrix(problem, d)
    return [excess[i, columns] for i, columns in enumerate(problem.feasible)]


def _block_records(problem: SelectionProblem, n: int, d_values, k: int, budget: int):
    """Exhaustive search over maps from blocks of k pools to k datasets."""
    blocks = list(itertools.product(range(problem.n_pools), repeat=k))
    options = [list(itertools.product(*(problem.feasible[u] for u in block))) for block in blocks]
    count = 1
    for choices in options:
        count *= len(choices)
    if count > budget:
        raise BudgetError(f"selection maps over blocks of {k} pools", count, budget)
    best = {d: (np.inf, -1) for d in d_values}
    min_avg = np.inf
    for map_id, assignment in enumerate(itertools.product(*options)):
        selection = dict(zip(blocks, assignment))
        for d in d_values:
            result = _joint_map_excess(problem, selection, d, k, enumeration_budget())
            if result.eps < best[d][0]:
                best[d] = (result.eps, map_id)
            min_avg = min(min_avg, result.avg_distortion)
    return [EnumerationRecord(int(n), float(d), best[d][0], best[d][1], min_avg, count) for d in d_values]


def enumerate_selections(
    inst: ProblemInstance,
    n_values: Sequence[int],
    d_values: Sequence[float],
    eps_values: Sequence[float] = (),
    k: int = 1,
    budget: Optional[int] = None,
) -> EnumerationReport:
    """Least excess-distortion probability over all deterministic selection
    maps selecting exactly n of the m samples of each pool.

    Parameters
    ----------
    inst : `ProblemInstance`
    n_values : sequence of int
        Label budgets per pool.
    d_values : sequence of float
        Distortion thresholds.
    eps_values : sequence of float
        Target probabilities for the least sufficient n.
    k : int
        Block length. For k > 1 every map from blocks of k pools to k
        datasets is enumerated, which only fits tiny budgets.
    budget : int, optional
        Largest number of maps; see :func:`poolrate.util.selection_budget`.

    Raises
    ------
    BudgetError
        If the number of maps exceeds the budget.
    """
    budget = selection_budget() if budget is None else budget
    records = []
    for n in n_values:
        problem = build_selection_problem(inst.with_updates(n=int(n), selection_mode="fixed-n"))
        if k > 1:
            records.extend(_block_records(problem, n, d_values, k, budget))
            continue
        cost = [problem.costs(i) for i in range(problem.n_pools)]
        min_avg, _ = min_over_maps(problem, cost, budget)
        for d in d_values:
            best, best_id = min_over_maps(problem, _excess_per_pool(problem, d), budget)
            records.append(
                EnumerationRecord(int(n), float(d), best, best_id, min_avg, _map_count(problem))
            )
    n_star = {}
    for d in d_values:
        for eps in eps_values:
            feasible = [r.n for r in records if r.d == d and r.min_excess_prob <= eps + EXCESS_TOLERANCE]
            n_star[(float(d), float(eps))] = min(feasible) if feasible else None
    return EnumerationReport(int(k), tuple(records), n_star)


@dataclass(frozen=True)
class DominanceRecord:
    n: int
    n_maps: int
    min_excess_prob: float
    bound: float
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def converse_dominance(
    inst: ProblemInstance,
    bound_for_n,
    n_values: Sequence[int],
    d: float,
    budget: Optional[int] = None,
) -> List[DominanceRecord]:
    """Compares every deterministic map's exact excess-distortion probability
    with a lower bound.

    Parameters
    ----------
    inst : `ProblemInstance`
    bound_for_n : callable
        Returns the lower bound for a label budget n.
    n_values : sequence of int
    d : float
    """
    records = []
    for n in n_values:
        problem = build_selection_problem(inst.with_updates(n=int(n), selection_mode="fixed-n"))
        bound = float(bound_for_n(int(n)))
        violations, best = 0, np.inf
        for _, values in map_values(problem, _excess_per_pool(problem, d), budget):
            violations += int(np.sum(values < bound - EXCESS_TOLERANCE))
            best = min(best, float(values.min()))
        records.append(DominanceRecord(int(n), _map_count(problem), best, bound, violations))
    return records


@dataclass(frozen=True)
class RandomKernelCheck:
    min_random: float
    min_deterministic: float

    @property
    def holds(self) -> bool:
        return self.min_random >= self.min_deterministic - EXCESS_TOLERANCE


def random_kernel_check(
    problem: SelectionProblem, d: float, trials: int = 200, seed: int = 12345
) -> RandomKernelCheck:
    """Draws random stochastic selection kernels and checks that none beats
    the best deterministic map.
    """
    rng = np.random.default_rng(seed)
    per_pool = _excess_per_pool(problem, d)
    best_deterministic = float(sum(p * v.min() for p, v in zip(problem.p_u, per_pool)))
    best_random = np.inf
    for _ in range(trials):
        value = sum(
            p * float(rng.dirichlet(np.ones(v.size)) @ v) for p, v in zip(problem.p_u, per_pool)
        )
        best_random = min(best_random, value)
    return RandomKernelCheck(float(best_random), best_deterministic)
