# Learning algorithms as kernels from canonical datasets to hypotheses.

from typing import Sequence

import numpy as np
from scipy.special import softmax

from poolrate.exceptions import CoverageError, ValidationError
from poolrate.instance.pools import CanonicalDataset
from poolrate.instance.problem import ProblemInstance
from poolrate.prob import StochKernel, normalise_weights

TIE_TOLERANCE = 1e-12


def empirical_risk(inst: ProblemInstance, dataset: CanonicalDataset) -> np.ndarray:
    """Summed empirical risk of every hypothesis on a dataset.

    The loss table is used when all hypotheses are deterministic and the
    negative log-likelihood otherwise; the latter is infinite for a
    hypothesis giving zero probability to an observed label. Sums rank
    hypotheses like the means do.

    Returns
    -------
    :class:`numpy.ndarray`
        One risk per hypothesis, in ``h_alphabet`` order.
    """
    tables = inst.hypothesis_tables
    risk = np.zeros(len(inst.h_alphabet))
    if not dataset.samples:
        return risk
    x = np.array([s[0] for s in dataset.samples])
    y = np.array([s[1] for s in dataset.samples])
    if all(h.deterministic for h in inst.hypotheses):
        loss = inst.loss.matrix(len(inst.y_alphabet))
        # expected loss of each prediction row against the observed label
        risk = np.einsum("hsz,sz->h", tables[:, x, :], loss[y, :])
    else:
        with np.errstate(divide="ignore"):
            risk = -np.log(tables[:, x, y]).sum(axis=1)
    return risk


def _erm_row(risk: np.ndarray) -> np.ndarray:
    best = risk.min()
    ties = risk <= best + TIE_TOLERANCE
    return ties / ties.sum()


def _gibbs_row(risk: np.ndarray, beta: float) -> np.ndarray:
    if beta == 0 or np.all(np.isinf(risk)):
        return np.full(risk.size, 1.0 / risk.size)
    return softmax(-beta * risk)


def build_algorithm_kernel(
    inst: ProblemInstance, datasets: Sequence[CanonicalDataset]
) -> StochKernel:
    """The algorithm P^A(h|t) evaluated on the given datasets.

    Parameters
    ----------
    inst : `ProblemInstance`
        Instance holding the algorithm description.
    datasets : sequence of `CanonicalDataset`
        Rows of the kernel.

    Returns
    -------
    `StochKernel`
        One row per dataset over ``inst.h_alphabet``.

    Raises
    ------
    CoverageError
        If an explicit table has no row for one of the datasets.
    """
    algorithm = inst.algorithm
    rows = []
    for dataset in datasets:
        if algorithm.kind == "explicit":
            table = algorithm.explicit_table or {}
            if dataset.samples not in table:
                raise CoverageError(
                    f"explicit algorithm has no row for dataset {dataset}"
                )
            rows.append(
                normalise_weights(table[dataset.samples], "algorithm", str(dataset))
            )
        elif algorithm.kind == "erm":
            rows.append(_erm_row(empirical_risk(inst, dataset)))
        elif algorithm.kind == "gibbs":
            beta = algorithm.beta if algorithm.beta is not None else 1.0
            if beta < 0:
                raise ValidationError("gibbs needs beta >= 0", "algorithm", "beta")
            rows.append(_gibbs_row(empirical_risk(inst, dataset), beta))
        else:
            raise ValidationError(f"unknown kind {algorithm.kind!r}", "algorithm")
    rows = np.array(rows).reshape(len(datasets), len(inst.h_alphabet))
    return StochKernel(rows, tuple(datasets), inst.h_alphabet)
