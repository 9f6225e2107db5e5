# Finite distributions, row-stochastic kernels and named joint tables.
# Every object is immutable after construction: the arrays are copied and
# flagged read-only.

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from poolrate.exceptions import AlphabetError, AxisError, SupportError, ValidationError

SUM_TOLERANCE = 1e-12
RENORMALISE_TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


def normalise_weights(weights, field: str = "weights", index=None) -> np.ndarray:
    """Checks a probability vector and removes floating point noise from its sum.

    Parameters
    ----------
    weights : array_like
        Candidate probabilities.
    field : str
        Field name reported in errors.
    index : optional
        Row or key reported in errors.

    Returns
    -------
    :class:`numpy.ndarray`
        The weights, renormalised when their sum deviates from one by less than
        1e-9.

    Raises
    ------
    ValidationError
        Negative, non-finite entries, or a sum further than 1e-9 from one.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise ValidationError("expected a non-empty vector of probabilities", field, index)
    if not np.all(np.isfinite(weights)):
        raise ValidationError("probabilities must be finite", field, index)
    if np.any(weights < 0):
        raise ValidationError("probabilities must be non-negative", field, index)
    total = weights.sum()
    if abs(total - 1.0) > RENORMALISE_TOLERANCE:
        raise ValidationError(f"probabilities sum to {total:.12g}, not 1", field, index)
    if total != 1.0:
        weights = weights / total
    return weights


@dataclass(frozen=True, eq=False)
class FiniteDist:
    """Probability distribution over a finite alphabet.

    Parameters
    ----------
    weights : :class:`numpy.ndarray`
        Probabilities, non-negative and summing to one.
    labels : tuple, optional
        Symbol names, one per weight.
    """

    weights: np.ndarray
    labels: Optional[Tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(normalise_weights(self.weights)))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.weights.size:
                raise AlphabetError(
                    f"{len(labels)} labels given for {self.weights.size} weights"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def alphabet(self) -> tuple:
        return self.labels if self.labels is not None else tuple(range(self.size))

    def index(self, symbol) -> int:
        try:
            return self.alphabet().index(symbol)
        except ValueError:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet") from None

    def prob(self, symbol) -> float:
        return float(self.weights[self.index(symbol)])

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)


@dataclass(frozen=True, eq=False)
class StochKernel:
    """Markov kernel between finite alphabets stored as a row-stochastic matrix.

    Parameters
    ----------
    rows : :class:`numpy.ndarray`
        Matrix of shape ``(n_in, n_out)``, each row a probability vector.
    row_labels : tuple, optional
        Input symbols.
    col_labels : tuple, optional
        Output symbols.
    """

    rows: np.ndarray
    row_labels: Optional[Tuple] = None
    col_labels: Optional[Tuple] = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValidationError("a kernel needs a two dimensional matrix", "rows")
        rows = np.vstack(
            [normalise_weights(row, "rows", i) for i, row in enumerate(rows)]
        ) if rows.shape[0] > 0 else rows
        object.__setattr__(self, "rows", _frozen(rows))
        for name, size in (("row_labels", rows.shape[0]), ("col_labels", rows.shape[1])):
            labels = getattr(self, name)
            if labels is None:
                continue
            labels = tuple(labels)
            if len(labels) != size:
                raise AlphabetError(f"{name}: {len(labels)} labels for {size} entries")
            object.__setattr__(self, name, labels)

    @property
    def n_in(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n_out(self) -> int:
        return int(self.rows.shape[1])

    def row(self, i: int) -> FiniteDist:
        return FiniteDist(self.rows[i], self.col_labels)

    def input_alphabet(self) -> tuple:
        return self.row_labels if self.row_labels is not None else tuple(range(self.n_in))

    def output_alphabet(self) -> tuple:
        return self.col_labels if self.col_labels is not None else tuple(range(self.n_out))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint distribution over named finite axes.

    Parameters
    ----------
    axes : tuple of str
        Axis names, one per dimension of ``mass``.
    mass : :class:`numpy.ndarray`
        Probability array.
    alphabets : tuple of tuple, optional
        Symbol names along each axis. Positions are used when omitted.
    """

    axes: Tuple[str, ...]
    mass: np.ndarray
    alphabets: Optional[Tuple[tuple, ...]] = None

    def __post_init__(self):
        axes = tuple(self.axes)
        mass = np.asarray(self.mass, dtype=float)
        if len(set(axes)) != len(axes):
            raise AxisError(f"axis names must be distinct, got {axes}")
        if mass.ndim != len(axes):
            raise AxisError(f"{len(axes)} axis names for a {mass.ndim}-dimensional table")
        flat = normalise_weights(mass.ravel(), "mass")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "mass", _frozen(flat.reshape(mass.shape)))
        if self.alphabets is None:
            alphabets = tuple(tuple(range(size)) for size in mass.shape)
        else:
            alphabets = tuple(tuple(labels) for labels in self.alphabets)
            if [len(a) for a in alphabets] != list(mass.shape):
                raise AlphabetError("alphabet sizes do not match the table shape")
        object.__setattr__(self, "alphabets", alphabets)

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise AxisError(f"unknown axis {name!r}; axes are {self.axes}") from None

    def alphabet(self, name: str) -> tuple:
        return self.alphabets[self.axis_index(name)]

    def marginal(self, *names: str) -> "JointTable":
        """Marginal table over ``names``, in the given order."""
        if len(set(names)) != len(names):
            raise AxisError(f"repeated axis in {names}")
        keep = [self.axis_index(name) for name in names]
        drop = tuple(i for i in range(len(self.axes)) if i not in keep)
        mass = self.mass.sum(axis=drop) if drop else self.mass
        # after summing, the kept axes are in increasing original order
        order = sorted(keep)
        mass = np.transpose(mass, [order.index(i) for i in keep])
        return JointTable(
            tuple(names), mass, tuple(self.alphabets[i] for i in keep)
        )

    def conditional(self, target: str, given: str) -> StochKernel:
        """Kernel P(target | given) restricted to the support of ``given``."""
        pair = self.marginal(given, target).mass
        p_given = pair.sum(axis=1)
        support = np.flatnonzero(p_given > 0)
        if support.size == 0:
            raise SupportError(f"axis {given!r} has no mass")
        labels = self.alphabet(given)
        return StochKernel(
            pair[support] / p_given[support, None],
            tuple(labels[i] for i in support),
            self.alphabet(target),
        )


def joint_from_kernels(
    prior: FiniteDist, kernels: Sequence[StochKernel], axes: Sequence[str]
) -> JointTable:
    """Joint law of a Markov chain A0 -> A1 -> ... built from a prior on the
    first axis and one kernel per transition.

    Parameters
    ----------
    prior : `FiniteDist`
        Law of the first axis.
    kernels : sequence of `StochKernel`
        Kernel ``i`` maps axis ``i`` to axis ``i+1``.
    axes : sequence of str
        Names of all ``len(kernels) + 1`` axes.

    Returns
    -------
    `JointTable`
        The chain's joint distribution.
    """
    if len(axes) != len(kernels) + 1:
        raise AxisError("need one axis name per kernel plus one for the prior")
    mass = np.asarray(prior.weights)
    alphabets = [prior.alphabet()]
    for kernel in kernels:
        if kernel.n_in != mass.shape[-1]:
            raise AlphabetError(
                f"kernel with {kernel.n_in} inputs follows an axis of size {mass.shape[-1]}"
            )
        shape = (1,) * (mass.ndim - 1) + kernel.rows.shape
        mass = mass[..., None] * kernel.rows.reshape(shape)
        alphabets.append(kernel.output_alphabet())
    return JointTable(tuple(axes), mass, tuple(alphabets))
