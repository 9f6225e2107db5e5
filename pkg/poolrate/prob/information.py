# Information measures on finite distributions, in nats. The 0 log 0 = 0
# convention is inherited from scipy.special.rel_entr and entr.

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr, rel_entr

from poolrate.exceptions import AlphabetError, AxisError, SupportError
from poolrate.prob.distributions import FiniteDist, JointTable, StochKernel


def kl_divergence(p: FiniteDist, q: FiniteDist) -> float:
    """Kullback-Leibler divergence D(p||q) in nats.

    Returns ``inf`` when p puts mass where q does not.

    Raises
    ------
    AlphabetError
        If the two distributions live on different alphabets.
    """
    if p.size != q.size:
        raise AlphabetError(f"alphabet sizes differ: {p.size} vs {q.size}")
    if p.labels is not None and q.labels is not None and p.labels != q.labels:
        raise AlphabetError("distributions are labelled with different alphabets")
    return float(np.sum(rel_entr(p.weights, q.weights)))


def entropy(p: FiniteDist) -> float:
    return float(np.sum(entr(p.weights)))


def mutual_information(joint: JointTable, axis_a: str, axis_b: str) -> float:
    """Mutual information I(A;B) in nats; other axes are marginalised first."""
    if axis_a == axis_b:
        raise AxisError("mutual information needs two distinct axes")
    p_ab = joint.marginal(axis_a, axis_b).mass
    product = np.outer(p_ab.sum(axis=1), p_ab.sum(axis=0))
    return max(0.0, float(np.sum(rel_entr(p_ab, product))))


def conditional_mutual_information(
    joint: JointTable, axis_a: str, axis_b: str, given_axis: str
) -> float:
    """Conditional mutual information I(A;B|C) = sum_c p(c) I(A;B|C=c) in nats."""
    if len({axis_a, axis_b, given_axis}) != 3:
        raise AxisError("conditional mutual information needs three distinct axes")
    p_abc = joint.marginal(axis_a, axis_b, given_axis).mass
    p_ac = p_abc.sum(axis=1)
    p_bc = p_abc.sum(axis=0)
    p_c = p_abc.sum(axis=(0, 1))
    numerator = p_ac[:, None, :] * p_bc[None, :, :]
    # p(a,c) p(b,c) / p(c), zero where c carries no mass
    reference = np.divide(
        numerator,
        np.broadcast_to(p_c, numerator.shape),
        out=np.zeros_like(numerator),
        where=np.broadcast_to(p_c > 0, numerator.shape),
    )
    return max(0.0, float(np.sum(rel_entr(p_abc, reference))))


def information_density(
    joint: JointTable, axis_a: str, axis_b: str, atom: Tuple
) -> float:
    """Information density log p(a,b) / (p(a) p(b)) at one atom.

    Parameters
    ----------
    joint : `JointTable`
        Joint distribution containing both axes.
    axis_a, axis_b : str
        Axis names.
    atom : tuple
        Pair of symbols ``(a, b)`` from the two axis alphabets.

    Raises
    ------
    SupportError
        If p(a,b) = 0.
    """
    pair = joint.marginal(axis_a, axis_b)
    try:
        i = pair.alphabets[0].index(atom[0])
        j = pair.alphabets[1].index(atom[1])
    except ValueError:
        raise AlphabetError(f"atom {atom!r} is not in the alphabets") from None
    p_ab = pair.mass[i, j]
    if p_ab <= 0:
        raise SupportError(f"atom {atom!r} has zero probability")
    return float(np.log(p_ab / (pair.mass[i].sum() * pair.mass[:, j].sum())))


def information_density_table(joint: JointTable, axis_a: str, axis_b: str) -> np.ndarray:
    """Information densities of every atom of the (A,B) marginal; NaN off the
    support.
    """
    p_ab = joint.marginal(axis_a, axis_b).mass
    product = np.outer(p_ab.sum(axis=1), p_ab.sum(axis=0))
    table = np.full(p_ab.shape, np.nan)
    support = p_ab > 0
    table[support] = np.log(p_ab[support] / product[support])
    return table


def posterior_kernel(
    likelihood: StochKernel, prior: FiniteDist, columns: Optional[Sequence[int]] = None
) -> StochKernel:
    """Bayes inversion of a kernel W -> U into U -> W.

    Parameters
    ----------
    likelihood : `StochKernel`
        Kernel P(u|w).
    prior : `FiniteDist`
        Law of the kernel input.
    columns : sequence of int, optional
        Outputs u to invert. By default every u with P(u) > 0.

    Returns
    -------
    `StochKernel`
        Rows P(w|u) for the retained u.

    Raises
    ------
    SupportError
        If a requested column has zero probability.
    """
    if prior.size != likelihood.n_in:
        raise AlphabetError("prior and likelihood input alphabets differ")
    joint = prior.weights[:, None] * likelihood.rows
    p_u = joint.sum(axis=0)
    if columns is None:
        columns = np.flatnonzero(p_u > 0)
    else:
        columns = np.asarray(columns, dtype=int)
        empty = columns[p_u[columns] <= 0]
        if empty.size:
            raise SupportError(f"output {int(empty[0])} has zero probability")
    labels = likelihood.output_alphabet()
    return StochKernel(
        (joint[:, columns] / p_u[columns]).T,
        tuple(labels[i] for i in columns),
        prior.alphabet() if prior.labels is not None else likelihood.row_labels,
    )
