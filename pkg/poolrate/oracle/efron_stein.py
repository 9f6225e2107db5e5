import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from poolrate.exceptions import BudgetError
from poolrate.instance import (
    AlgorithmSpec,
    CanonicalDataset,
    ProblemInstance,
    build_algorithm_kernel,
    distortion_matrix,
)
from poolrate.util import enumeration_budget

TOLERANCE = 1e-12


@dataclass(frozen=True)
class EfronSteinRecord:
    w: object
    variance: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.variance <= self.bound + TOLERANCE


@dataclass(frozen=True)
class EfronSteinReport:
    k: int
    records: Tuple[EfronSteinRecord, ...]

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.records)


def efron_stein_check(
    inst: ProblemInstance,
    k: int,
    algorithm: Optional[AlgorithmSpec] = None,
    budget: Optional[int] = None,
) -> EfronSteinReport:
    """Checks Var(f(T)) <= 1/2 sum_i E (f(T) - f(T^(i)))^2 for
    f(T) = E[d(w;H) | T] with T = (Z_1..Z_k) i.i.d. from P*(x,y|w), for every
    w, where T^(i) replaces Z_i by an independent copy.

    Parameters
    ----------
    inst : `ProblemInstance`
    k : int
        Number of samples.
    algorithm : `AlgorithmSpec`, optional
        Replaces the instance's algorithm.
    budget : int, optional
        Largest number of ordered sample tuples.
    """
    if algorithm is not None:
        inst = inst.with_updates(algorithm=algorithm)
    budget = enumeration_budget() if budget is None else budget
    n_s = inst.n_samples
    required = n_s**k
    if required > budget:
        raise BudgetError("ordered sample tuples", required, budget)

    tuples = np.array(list(itertools.product(range(n_s), repeat=k)), dtype=int).reshape(-1, k)
    datasets, position = [], {}
    rows = np.empty(tuples.shape[0], dtype=int)
    for i, sequence in enumerate(tuples):
        dataset = CanonicalDataset(tuple(inst.sample_pair(s) for s in sequence))
        if dataset not in position:
            position[dataset] = len(datasets)
            datasets.append(dataset)
        rows[i] = position[dataset]
    algorithm_rows = build_algorithm_kernel(inst, datasets).rows
    table = distortion_matrix(inst)
    place = n_s ** np.arange(k - 1, -1, -1)
    index = np.arange(tuples.shape[0])

    records = []
    for w_pos, w in enumerate(inst.w_alphabet):
        if inst.p_w.weights[w_pos] == 0:
            continue
        letter = inst.sample_mass[w_pos]
        prob = np.prod(letter[tuples], axis=1)
        f = algorithm_rows[rows] @ table[w_pos]
        mean = prob @ f
        variance = float(prob @ (f - mean) ** 2)
        bound = 0.0
        for i in range(k):
            # index of the tuple with coordinate i replaced by z
            base = index - tuples[:, i] * place[i]
            replaced = f[base[:, None] + np.arange(n_s)[None, :] * place[i]]
            bound += float(prob @ (((f[:, None] - replaced) ** 2) @ letter))
        records.append(EfronSteinRecord(w, variance, 0.5 * bound))
    return EfronSteinReport(int(k), tuple(records))
