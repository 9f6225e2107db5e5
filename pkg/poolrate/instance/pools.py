# Pools, canonical datasets and feasible selections.
#
# A pool u is an ordered tuple of m samples (x_pos, y_pos). Pools are
# enumerated lexicographically over the sample index x_pos * |Y| + y_pos and
# pools with P(u) = 0 are dropped.

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from poolrate.exceptions import BudgetError, SupportError, ValidationError
from poolrate.instance.problem import ProblemInstance, distortion_matrix
from poolrate.prob import FiniteDist, StochKernel, posterior_kernel
from poolrate.util import enumeration_budget

Sample = Tuple[int, int]
Pool = Tuple[Sample, ...]


@dataclass(frozen=True, order=True)
class CanonicalDataset:
    """Multiset of labelled samples, stored sorted so that two selections with
    the same content compare equal.
    """

    samples: Tuple[Sample, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted((int(x), int(y)) for x, y in self.samples))
        object.__setattr__(self, "samples", ordered)

    @property
    def size(self) -> int:
        return len(self.samples)

    def sort_key(self) -> tuple:
        return (self.size, self.samples)

    def symbols(self, inst: ProblemInstance) -> Tuple[tuple, ...]:
        return tuple((inst.x_alphabet[x], inst.y_alphabet[y]) for x, y in self.samples)

    def __str__(self) -> str:
        if not self.samples:
            return "{}"
        return ";".join(f"({x},{y})" for x, y in self.samples)


@dataclass(frozen=True, eq=False)
class PoolSpace:
    """Every pool of positive probability together with P(u|w), P(u) and the
    posterior P(w|u).
    """

    pools: Tuple[Pool, ...]
    p_u_given_w: StochKernel
    p_u: FiniteDist
    p_w_given_u: StochKernel

    @property
    def size(self) -> int:
        return len(self.pools)

    @cached_property
    def _lookup(self) -> Dict[Pool, int]:
        return {pool: i for i, pool in enumerate(self.pools)}

    def index_of(self, pool: Sequence) -> int:
        key = tuple((int(x), int(y)) for x, y in pool)
        try:
            return self._lookup[key]
        except KeyError:
            raise SupportError(f"pool {key} has zero probability") from None


def enumerate_pool_space(inst: ProblemInstance, budget: Optional[int] = None) -> PoolSpace:
    """Enumerates the pool space of an instance.

    Parameters
    ----------
    inst : `ProblemInstance`
        Instance with pool size ``inst.m``.
    budget : int, optional
        Largest number of pools to enumerate; see
        :func:`poolrate.util.enumeration_budget`.

    Returns
    -------
    `PoolSpace`

    Raises
    ------
    BudgetError
        If (|X||Y|)^m exceeds the budget.
    """
    budget = enumeration_budget() if budget is None else budget
    n_samples = inst.n_samples
    required = n_samples ** inst.m
    if required > budget:
        raise BudgetError("pool enumeration", required, budget)

    index = np.array(list(itertools.product(range(n_samples), repeat=inst.m)), dtype=int)
    mass = inst.sample_mass
    pool_mass = np.prod(mass[:, index], axis=2)
    keep = np.flatnonzero(inst.p_w.weights @ pool_mass > 0)
    pools = tuple(
        tuple(inst.sample_pair(s) for s in row) for row in index[keep]
    )
    rows = pool_mass[:, keep]
    # sub-distributions with zero prior may lose mass to dropped pools
    totals = rows.sum(axis=1, keepdims=True)
    rows = np.where(totals > 0, rows / np.where(totals > 0, totals, 1.0), 1.0 / keep.size)
    p_u_given_w = StochKernel(rows, inst.w_alphabet, pools)
    p_u = FiniteDist(inst.p_w.weights @ p_u_given_w.rows, pools)
    p_w_given_u = posterior_kernel(p_u_given_w, FiniteDist(inst.p_w.weights, inst.w_alphabet))
    return PoolSpace(pools, p_u_given_w, p_u, p_w_given_u)


def posterior_distortion(inst: ProblemInstance, pool_space: PoolSpace, u, h) -> float:
    """Posterior distortion E[d(W;h) | U=u]."""
    i = pool_space.index_of(u)
    table = distortion_matrix(inst)
    return float(pool_space.p_w_given_u.rows[i] @ table[:, inst.h_index(h)])


def posterior_distortion_matrix(inst: ProblemInstance, pool_space: PoolSpace) -> np.ndarray:
    """All posterior distortions as an array of shape ``(|U|, |H|)``."""
    return pool_space.p_w_given_u.rows @ distortion_matrix(inst)


@dataclass(frozen=True)
class SelectionSet:
    """Feasible selections of one pool.

    ``subsets`` holds every index subset allowed by the selection mode,
    ``datasets`` the distinct canonical datasets they produce in canonical
    order and ``multiplicity`` how many index subsets map onto each one.
    """

    subsets: Tuple[Tuple[int, ...], ...]
    datasets: Tuple[CanonicalDataset, ...]
    multiplicity: Tuple[int, ...]


def _subset_count(size: int, inst: ProblemInstance, n: Optional[int]) -> int:
    if inst.selection_mode == "any-subset":
        return 2**size
    return int(comb(size, n, exact=True))


def feasible_selections(
    inst: ProblemInstance,
    pool: Sequence,
    n: Optional[int] = None,
    budget: Optional[int] = None,
) -> SelectionSet:
    """Feasible selections T(u) of a pool.

    Parameters
    ----------
    inst : `ProblemInstance`
        Instance fixing the selection mode.
    pool : sequence
        A pool of ``(x_pos, y_pos)`` samples. A block of k pools is passed as
        their concatenation.
    n : int, optional
        Number of labels in ``fixed-n`` mode; defaults to ``inst.n``.
    budget : int, optional
        Largest number of index subsets to enumerate.

    Raises
    ------
    ValidationError
        If ``fixed-n`` mode has no n or n exceeds the pool size.
    BudgetError
        If the number of index subsets exceeds the budget.
    """
    samples = tuple((int(x), int(y)) for x, y in pool)
    size = len(samples)
    if inst.selection_mode == "fixed-n":
        n = inst.n if n is None else n
        if n is None:
            raise ValidationError("fixed-n selection needs n", "n")
        if not 0 <= n <= size:
            raise ValidationError(f"cannot select {n} of {size} samples", "n")
        sizes = [n]
    else:
        sizes = range(size + 1)

    budget = enumeration_budget() if budget is None else budget
    required = _subset_count(size, inst, n)
    if required > budget:
        raise BudgetError("selection enumeration", required, budget)

    subsets = tuple(
        itertools.chain.from_iterable(itertools.combinations(range(size), k) for k in sizes)
    )
    counts: Dict[CanonicalDataset, int] = {}
    for subset in subsets:
        dataset = CanonicalDataset(tuple(samples[i] for i in subset))
        counts[dataset] = counts.get(dataset, 0) + 1
    datasets = tuple(sorted(counts, key=CanonicalDataset.sort_key))
    return SelectionSet(subsets, datasets, tuple(counts[t] for t in datasets))


def selection_counts(inst: ProblemInstance, n: int, k: int = 1) -> dict:
    """Number of index subsets versus number of nb-bit descriptions for a
    block of k pools.

    Returns
    -------
    dict
        ``index_subsets`` (C(km, n)), ``descriptions`` (2^(b n)) and their
        base-2 logarithms.
    """
    subsets = int(comb(k * inst.m, n, exact=True))
    log2_descriptions = inst.bits_per_sample * n
    return {
        "index_subsets": subsets,
        "log2_index_subsets": float(np.log2(subsets)) if subsets > 0 else float("-inf"),
        "descriptions": float(2.0**log2_descriptions),
        "log2_descriptions": float(log2_descriptions),
    }
