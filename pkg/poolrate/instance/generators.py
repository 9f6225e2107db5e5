# Ready-made instances: the binary benchmark, its asymmetric and i.i.d.
# variants, an instance whose algorithm is a bijection from single-sample
# datasets to hypotheses, and random small instances.

import itertools
from typing import Optional

import numpy as np

from poolrate.instance.problem import AlgorithmSpec, HypothesisSpec, ProblemInstance
from poolrate.prob import FiniteDist, StochKernel


def _binary_instance(p_y_given_x, hypotheses: dict, **options) -> ProblemInstance:
    return ProblemInstance(
        x_alphabet=(0, 1),
        y_alphabet=(0, 1),
        w_alphabet=(0, 1),
        h_alphabet=tuple(hypotheses),
        p_w=FiniteDist(np.array([0.5, 0.5]), (0, 1)),
        p_x_given_w=StochKernel(np.eye(2), (0, 1), (0, 1)),
        p_y_given_x=StochKernel(np.asarray(p_y_given_x, dtype=float), (0, 1), (0, 1)),
        hypotheses=tuple(HypothesisSpec(map=m) for m in hypotheses.values()),
        **options,
    )


def t1_instance(n: Optional[int] = 1, selection_mode: str = "fixed-n", m: int = 2) -> ProblemInstance:
    """Binary benchmark: W uniform, X = W, labels agree with X with
    probability 0.8, hypotheses identity and flip, ERM with zero-one loss,
    pools of two samples and 2 bits per sample.
    """
    return _binary_instance(
        [[0.8, 0.2], [0.2, 0.8]],
        {"h_id": (0, 1), "h_flip": (1, 0)},
        algorithm=AlgorithmSpec("erm"),
        m=m,
        b=2.0,
        n=n if selection_mode == "fixed-n" else None,
        selection_mode=selection_mode,
    )


def t1_asymmetric_instance(selection_mode: str = "any-subset", n: Optional[int] = None) -> ProblemInstance:
    """Asymmetric benchmark: label agreement 0.6 at x=0 and 0.9 at x=1, the
    two constant hypotheses added to identity and flip.
    """
    return _binary_instance(
        [[0.6, 0.4], [0.1, 0.9]],
        {"h_id": (0, 1), "h_flip": (1, 0), "h_zero": (0, 0), "h_one": (1, 1)},
        algorithm=AlgorithmSpec("erm"),
        m=2,
        b=2.0,
        n=n,
        selection_mode=selection_mode,
    )


def t1_iid_instance(selection_mode: str = "any-subset", n: Optional[int] = None) -> ProblemInstance:
    """The benchmark with pools of a single sample (i.i.d. sampling)."""
    if selection_mode == "fixed-n" and n is None:
        n = 1
    return t1_instance(n=n, selection_mode=selection_mode, m=1)


def identity_algorithm_instance() -> ProblemInstance:
    """Instance where the algorithm maps each single-sample dataset to its own
    hypothesis, so that P(h|u) is a selection kernel up to relabelling.

    The hypothesis learned from (x, y) predicts y at x with probability 0.9
    and guesses uniformly at the other input.
    """
    samples = list(itertools.product((0, 1), (0, 1)))
    names = tuple(f"h_{x}{y}" for x, y in samples)
    hypotheses = []
    for x, y in samples:
        table = np.full((2, 2), 0.5)
        table[x] = [0.1, 0.1]
        table[x, y] = 0.9
        hypotheses.append(HypothesisSpec(table=StochKernel(table, (0, 1), (0, 1))))
    explicit = {((x, y),): np.eye(len(samples))[i] for i, (x, y) in enumerate(samples)}
    return ProblemInstance(
        x_alphabet=(0, 1),
        y_alphabet=(0, 1),
        w_alphabet=(0, 1),
        h_alphabet=names,
        p_w=FiniteDist(np.array([0.5, 0.5]), (0, 1)),
        p_x_given_w=StochKernel(np.array([[0.7, 0.3], [0.3, 0.7]]), (0, 1), (0, 1)),
        p_y_given_x=StochKernel(np.array([[0.8, 0.2], [0.3, 0.7]]), (0, 1), (0, 1)),
        hypotheses=tuple(hypotheses),
        algorithm=AlgorithmSpec("explicit", explicit_table=explicit),
        m=2,
        b=2.0,
        n=1,
        selection_mode="fixed-n",
    )


def random_instance(seed: int, n_w: Optional[int] = None, m: Optional[int] = None) -> ProblemInstance:
    """Small random binary instance.

    Sub-distributions and label noise are Dirichlet draws, hypotheses are
    distinct deterministic maps and the algorithm is ERM or a Gibbs posterior.
    """
    rng = np.random.default_rng(seed)
    n_w = int(rng.integers(2, 4)) if n_w is None else n_w
    m = int(rng.integers(1, 3)) if m is None else m
    maps = list(itertools.product((0, 1), repeat=2))
    n_h = int(rng.integers(2, 5))
    chosen = rng.choice(len(maps), size=n_h, replace=False)
    if rng.random() < 0.5:
        algorithm = AlgorithmSpec("erm")
    else:
        algorithm = AlgorithmSpec("gibbs", beta=float(rng.uniform(0.5, 3.0)))
    any_subset = rng.random() < 0.5
    w_alphabet = tuple(range(n_w))
    return ProblemInstance(
        x_alphabet=(0, 1),
        y_alphabet=(0, 1),
        w_alphabet=w_alphabet,
        h_alphabet=tuple(f"h{''.join(map(str, maps[i]))}" for i in chosen),
        p_w=FiniteDist(rng.dirichlet(np.ones(n_w)), w_alphabet),
        p_x_given_w=StochKernel(rng.dirichlet(np.ones(2), size=n_w), w_alphabet, (0, 1)),
        p_y_given_x=StochKernel(rng.dirichlet(np.ones(2), size=2), (0, 1), (0, 1)),
        hypotheses=tuple(HypothesisSpec(map=maps[i]) for i in chosen),
        algorithm=algorithm,
        m=m,
        b=2.0,
        n=None if any_subset else 1,
        selection_mode="any-subset" if any_subset else "fixed-n",
    )
