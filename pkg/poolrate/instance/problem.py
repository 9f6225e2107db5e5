# Problem instances of pool-based active learning: alphabets, the true
# distributions, the hypothesis set, the learning algorithm and the
# distortion between a sub-distribution w and a hypothesis h.

import dataclasses
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import rel_entr

from poolrate.exceptions import AlphabetError, AssumptionError, ValidationError
from poolrate.prob import FiniteDist, StochKernel

DISTORTION_MODES = ("expected-loss", "kl")
SELECTION_MODES = ("fixed-n", "any-subset")
ALGORITHM_KINDS = ("explicit", "erm", "gibbs")
LOSS_KINDS = ("zero-one", "table")


@dataclass(frozen=True, eq=False)
class LossSpec:
    """Loss l(y, y') between a true label and a predicted label.

    Parameters
    ----------
    kind : str
        ``"zero-one"`` or ``"table"``.
    table : :class:`numpy.ndarray`, optional
        Matrix of shape ``(|Y|, |Y|)`` indexed by (true, predicted) when
        ``kind="table"``.
    """

    kind: str = "zero-one"
    table: Optional[np.ndarray] = None

    def matrix(self, n_labels: int) -> np.ndarray:
        if self.kind == "zero-one":
            return 1.0 - np.eye(n_labels)
        table = np.asarray(self.table, dtype=float)
        if table.shape != (n_labels, n_labels):
            raise ValidationError(
                f"loss table must have shape ({n_labels}, {n_labels})", "loss"
            )
        return table


@dataclass(frozen=True, eq=False)
class HypothesisSpec:
    """A hypothesis given either as a conditional table P^h(y|x) or as a
    deterministic map, the latter encoded as the predicted y-symbol for every
    x in alphabet order.
    """

    table: Optional[StochKernel] = None
    map: Optional[Tuple] = None

    def __post_init__(self):
        if (self.table is None) == (self.map is None):
            raise ValidationError("give exactly one of `table` or `map`", "hypotheses")
        if self.map is not None:
            object.__setattr__(self, "map", tuple(self.map))

    @property
    def deterministic(self) -> bool:
        if self.map is not None:
            return True
        return bool(np.all((self.table.rows == 0) | (self.table.rows == 1)))

    def conditional(self, x_alphabet: Sequence, y_alphabet: Sequence) -> np.ndarray:
        """The hypothesis as a ``(|X|, |Y|)`` row-stochastic matrix."""
        if self.table is not None:
            return np.asarray(self.table.rows)
        rows = np.zeros((len(x_alphabet), len(y_alphabet)))
        for i, y in enumerate(self.map):
            rows[i, list(y_alphabet).index(y)] = 1.0
        return rows


@dataclass(frozen=True, eq=False)
class AlgorithmSpec:
    """The learning algorithm A: datasets -> hypotheses.

    Parameters
    ----------
    kind : str
        ``"erm"`` (empirical risk minimiser with uniform tie-break),
        ``"gibbs"`` (Gibbs posterior with inverse temperature ``beta``) or
        ``"explicit"`` (a table given row by row).
    explicit_table : dict, optional
        Maps the sorted sample tuple of a canonical dataset, as
        ``((x_pos, y_pos), ...)``, to hypothesis probabilities.
    beta : float, optional
        Gibbs inverse temperature.
    """

    kind: str = "erm"
    explicit_table: Optional[Dict[Tuple, np.ndarray]] = None
    beta: Optional[float] = None


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A finite pool-based active learning problem.

    Symbols are kept as given; every array is indexed by alphabet position.
    ``b`` defaults to log2(|X||Y|) bits per sample when omitted.
    """

    x_alphabet: Tuple
    y_alphabet: Tuple
    w_alphabet: Tuple
    h_alphabet: Tuple
    p_w: FiniteDist
    p_x_given_w: StochKernel
    p_y_given_x: StochKernel
    hypotheses: Tuple[HypothesisSpec, ...]
    algorithm: AlgorithmSpec = field(default_factory=AlgorithmSpec)
    loss: LossSpec = field(default_factory=LossSpec)
    distortion_mode: str = "expected-loss"
    m: int = 1
    b: Optional[float] = None
    n: Optional[int] = None
    selection_mode: str = "fixed-n"

    def __post_init__(self):
        for name in ("x_alphabet", "y_alphabet", "w_alphabet", "h_alphabet", "hypotheses"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ("x_alphabet", "y_alphabet", "w_alphabet", "h_alphabet"):
            symbols = getattr(self, name)
            if len(symbols) == 0:
                raise ValidationError("alphabet is empty", name)
            if len(set(symbols)) != len(symbols):
                raise ValidationError("alphabet symbols must be distinct", name)
        shapes = {
            "p_w": (self.p_w.size,),
            "p_x_given_w": self.p_x_given_w.rows.shape,
            "p_y_given_x": self.p_y_given_x.rows.shape,
        }
        expected = {
            "p_w": (len(self.w_alphabet),),
            "p_x_given_w": (len(self.w_alphabet), len(self.x_alphabet)),
            "p_y_given_x": (len(self.x_alphabet), len(self.y_alphabet)),
        }
        for name, shape in shapes.items():
            if tuple(shape) != expected[name]:
                raise AlphabetError(f"{name} has shape {tuple(shape)}, expected {expected[name]}")
        if len(self.hypotheses) != len(self.h_alphabet):
            raise ValidationError(
                f"{len(self.hypotheses)} hypotheses for {len(self.h_alphabet)} symbols",
                "hypotheses",
            )

    def with_updates(self, **changes) -> "ProblemInstance":
        return dataclasses.replace(self, **changes)

    @property
    def bits_per_sample(self) -> float:
        if self.b is not None:
            return float(self.b)
        return math.log2(len(self.x_alphabet) * len(self.y_alphabet))

    @property
    def n_samples(self) -> int:
        """Size of the single-sample alphabet X x Y."""
        return len(self.x_alphabet) * len(self.y_alphabet)

    def sample_pair(self, s: int) -> Tuple[int, int]:
        return divmod(int(s), len(self.y_alphabet))

    @cached_property
    def hypothesis_tables(self) -> np.ndarray:
        """Array of shape ``(|H|, |X|, |Y|)`` holding every P^h(y|x)."""
        return np.stack(
            [h.conditional(self.x_alphabet, self.y_alphabet) for h in self.hypotheses]
        )

    @cached_property
    def sample_mass(self) -> np.ndarray:
        """P*(x, y | w) as an array of shape ``(|W|, |X||Y|)``; sample index
        ``x_pos * |Y| + y_pos``.
        """
        joint = self.p_x_given_w.rows[:, :, None] * self.p_y_given_x.rows[None, :, :]
        return joint.reshape(len(self.w_alphabet), -1)

    def w_index(self, w) -> int:
        return _position(self.w_alphabet, w, "w_alphabet")

    def h_index(self, h) -> int:
        return _position(self.h_alphabet, h, "h_alphabet")


def _position(alphabet: tuple, symbol, name: str) -> int:
    try:
        return alphabet.index(symbol)
    except ValueError:
        raise AlphabetError(f"{symbol!r} is not in {name}") from None


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    issues: Tuple[Tuple[str, object, str], ...]
    pool_cardinality: int
    d_min_preview: Optional[float]
    d_max_preview: Optional[float]

    def rows(self) -> List[Tuple[str, str]]:
        rows = [
            ("valid", str(self.valid)),
            ("pool cardinality per w", str(self.pool_cardinality)),
            ("d_min preview", f"{self.d_min_preview}"),
            ("d_max preview", f"{self.d_max_preview}"),
        ]
        for field_name, index, message in self.issues:
            location = field_name if index is None else f"{field_name}[{index}]"
            rows.append((location, message))
        return rows


def _kl_distortion(inst: ProblemInstance) -> np.ndarray:
    truth = np.asarray(inst.p_y_given_x.rows)
    # per (h, x) divergence D(P*(.|x) || P^h(.|x))
    per_x = rel_entr(truth[None, :, :], inst.hypothesis_tables).sum(axis=2)
    p_x = np.asarray(inst.p_x_given_w.rows)
    # letters only zero-mass sub-distributions reach do not contribute
    p_x = np.where(inst.p_w.weights @ p_x > 0, p_x, 0.0)[:, None, :]
    weighted = np.multiply(
        p_x, per_x[None, :, :], out=np.zeros(p_x.shape[:1] + per_x.shape), where=p_x > 0
    )
    return weighted.sum(axis=2)


def _expected_loss_distortion(inst: ProblemInstance) -> np.ndarray:
    loss = inst.loss.matrix(len(inst.y_alphabet))
    per_x = np.einsum("xy,yz,hxz->xh", inst.p_y_given_x.rows, loss, inst.hypothesis_tables)
    return np.asarray(inst.p_x_given_w.rows) @ per_x


def distortion_matrix(inst: ProblemInstance, check: bool = True) -> np.ndarray:
    """All distortions d(w;h) as a ``(|W|, |H|)`` array.

    Raises
    ------
    AssumptionError
        If ``check`` and some distortion is infinite.
    """
    if inst.distortion_mode == "kl":
        table = _kl_distortion(inst)
    else:
        table = _expected_loss_distortion(inst)
    if check and not np.all(np.isfinite(table)):
        w, h = np.argwhere(~np.isfinite(table))[0]
        raise AssumptionError(
            f"d({inst.w_alphabet[w]!r}; {inst.h_alphabet[h]!r}) is infinite",
            "hypotheses",
            int(h),
        )
    return table


def distortion(inst: ProblemInstance, w, h) -> float:
    """Distortion d(w;h) of hypothesis ``h`` on sub-distribution ``w``.

    In ``kl`` mode this is E_x D(P*(.|x) || P^h(.|x)) under P*(x|w), in
    ``expected-loss`` mode the expected loss of ``h`` under P*(x, y|w).
    """
    value = distortion_matrix(inst, check=False)[inst.w_index(w), inst.h_index(h)]
    if not np.isfinite(value):
        raise AssumptionError(f"d({w!r}; {h!r}) is infinite", "hypotheses", inst.h_index(h))
    return float(value)


def block_distortion(inst: ProblemInstance, w_tuple: Sequence, h_tuple: Sequence) -> float:
    if len(w_tuple) != len(h_tuple) or len(w_tuple) == 0:
        raise ValidationError(
            f"block of {len(w_tuple)} sub-distributions and {len(h_tuple)} hypotheses"
        )
    table = distortion_matrix(inst)
    values = [table[inst.w_index(w), inst.h_index(h)] for w, h in zip(w_tuple, h_tuple)]
    return float(np.mean(values))


def validate_instance(inst: ProblemInstance, raise_on_error: bool = True) -> ValidationReport:
    """Checks the invariants of an instance that construction alone does not
    enforce.

    Parameters
    ----------
    inst : `ProblemInstance`
        Instance to check.
    raise_on_error : bool, optional
        Raise the first issue as a `ValidationError` (an `AssumptionError` for
        infinite distortions) instead of returning it in the report.

    Returns
    -------
    `ValidationReport`
        Collected issues, the pool cardinality (|X||Y|)^m per w and a preview
        of the distortion range.
    """
    issues = []
    if inst.m < 1:
        issues.append(("m", None, f"pool size must be at least 1, got {inst.m}"))
    if inst.n is not None and not 1 <= inst.n <= inst.m:
        issues.append(("n", None, f"need 1 <= n <= m, got n={inst.n}, m={inst.m}"))
    if inst.selection_mode not in SELECTION_MODES:
        issues.append(("selection_mode", None, f"unknown mode {inst.selection_mode!r}"))
    elif inst.selection_mode == "fixed-n" and inst.n is None:
        issues.append(("n", None, "fixed-n selection needs n"))
    if inst.distortion_mode not in DISTORTION_MODES:
        issues.append(("distortion_mode", None, f"unknown mode {inst.distortion_mode!r}"))
    if inst.b is not None and not inst.b > 0:
        issues.append(("b", None, f"bits per sample must be positive, got {inst.b}"))
    if inst.loss.kind not in LOSS_KINDS:
        issues.append(("loss", None, f"unknown loss {inst.loss.kind!r}"))

    algorithm = inst.algorithm
    if algorithm.kind not in ALGORITHM_KINDS:
        issues.append(("algorithm", None, f"unknown kind {algorithm.kind!r}"))
    elif algorithm.kind == "gibbs" and (algorithm.beta is None or not algorithm.beta > 0):
        issues.append(("algorithm", "beta", "gibbs needs beta > 0"))
    elif algorithm.kind == "explicit" and not algorithm.explicit_table:
        issues.append(("algorithm", "explicit_table", "explicit algorithm without a table"))

    for i, hypothesis in enumerate(inst.hypotheses):
        if hypothesis.map is not None:
            if len(hypothesis.map) != len(inst.x_alphabet):
                issues.append(("hypotheses", i, "deterministic map is not total over X"))
            elif any(y not in inst.y_alphabet for y in hypothesis.map):
                issues.append(("hypotheses", i, "map predicts a symbol outside Y"))
        elif hypothesis.table.rows.shape != (len(inst.x_alphabet), len(inst.y_alphabet)):
            issues.append(("hypotheses", i, "conditional table has the wrong shape"))

    assumption_issues = []
    if inst.distortion_mode == "kl" and not issues:
        reachable = np.flatnonzero(inst.p_w.weights @ np.asarray(inst.p_x_given_w.rows) > 0)
        truth = np.asarray(inst.p_y_given_x.rows) > 0
        for i, table in enumerate(inst.hypothesis_tables):
            uncovered = truth[reachable] & ~(table[reachable] > 0)
            if np.any(uncovered):
                x = inst.x_alphabet[reachable[np.argwhere(uncovered)[0][0]]]
                assumption_issues.append(
                    ("hypotheses", i, f"assumption (I) violated: infinite divergence at x={x!r}")
                )

    d_min_preview = d_max_preview = None
    if not issues and not assumption_issues:
        table = distortion_matrix(inst, check=False)
        weights = inst.p_w.weights
        d_min_preview = float(weights @ table.min(axis=1))
        d_max_preview = float((weights @ table).min())

    all_issues = tuple(issues + assumption_issues)
    report = ValidationReport(
        valid=not all_issues,
        issues=all_issues,
        pool_cardinality=inst.n_samples ** max(inst.m, 0),
        d_min_preview=d_min_preview,
        d_max_preview=d_max_preview,
    )
    if raise_on_error and all_issues:
        field_name, index, message = all_issues[0]
        error = AssumptionError if not issues else ValidationError
        raise error(message, field_name, index, list(all_issues))
    return report
