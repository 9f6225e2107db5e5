import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from poolrate.exceptions import BudgetError
from poolrate.instance import CanonicalDataset, ProblemInstance, build_algorithm_kernel
from poolrate.prob import JointTable, conditional_mutual_information, mutual_information
from poolrate.util import enumeration_budget


@dataclass(frozen=True)
class IIDCounterpartReport:
    """Information-theoretic quantities of learning from k i.i.d. samples,
    W^k -> T -> H, next to the active-learning rate and information-density
    variance they are compared with.
    """

    k: int
    I_TH: float
    var_iota_TH: float
    markov_residual: float
    n_datasets: int
    active_rate: Optional[float] = None
    active_var_iota: Optional[float] = None


def iid_counterpart_report(
    inst: ProblemInstance,
    k: int,
    active_rate: Optional[float] = None,
    active_var_iota: Optional[float] = None,
    budget: Optional[int] = None,
) -> IIDCounterpartReport:
    """Computes I(T;H) and Var(iota_{T;H}) when the algorithm sees all of k
    i.i.d. samples drawn letter by letter from P_W P*(x,y|w).

    Parameters
    ----------
    inst : `ProblemInstance`
    k : int
        Number of samples.
    active_rate, active_var_iota : float, optional
        Active-learning values recorded alongside for comparison.
    budget : int, optional
        Largest number of (w^k, sample^k) atoms to enumerate.

    Returns
    -------
    `IIDCounterpartReport`
        ``markov_residual`` is I(W;H|T), zero for W -> T -> H.
    """
    budget = enumeration_budget() if budget is None else budget
    n_w, n_s = len(inst.w_alphabet), inst.n_samples
    required = (n_w * n_s) ** k
    if required > budget:
        raise BudgetError("i.i.d. counterpart enumeration", required, budget)

    mass = inst.p_w.weights[:, None] * inst.sample_mass
    letters = list(itertools.product(range(n_w), range(n_s)))
    sequences = list(itertools.product(range(len(letters)), repeat=k))
    datasets, position, atoms = [], {}, []
    for sequence in sequences:
        ws = tuple(letters[i][0] for i in sequence)
        dataset = CanonicalDataset(tuple(inst.sample_pair(letters[i][1]) for i in sequence))
        if dataset not in position:
            position[dataset] = len(datasets)
            datasets.append(dataset)
        prob = float(np.prod([mass[letters[i]] for i in sequence]))
        atoms.append((ws, position[dataset], prob))

    w_blocks = sorted({ws for ws, _, _ in atoms})
    w_position = {ws: i for i, ws in enumerate(w_blocks)}
    table = np.zeros((len(w_blocks), len(datasets)))
    for ws, t, prob in atoms:
        table[w_position[ws], t] += prob
    algorithm = build_algorithm_kernel(inst, datasets).rows
    joint = JointTable(("W", "T", "H"), table[:, :, None] * algorithm[None, :, :])

    p_th = joint.marginal("T", "H").mass
    product = np.outer(p_th.sum(axis=1), p_th.sum(axis=0))
    support = p_th > 0
    iota = np.log(p_th[support] / product[support])
    i_th = float(p_th[support] @ iota)
    return IIDCounterpartReport(
        k=int(k),
        I_TH=mutual_information(joint, "T", "H"),
        var_iota_TH=float(p_th[support] @ (iota - i_th) ** 2),
        markov_residual=conditional_mutual_information(joint, "W", "H", "T"),
        n_datasets=len(datasets),
        active_rate=active_rate,
        active_var_iota=active_var_iota,
    )
