# Monte-Carlo simulation of block selection strategies. Trial i draws from
# default_rng([seed, i]), so results do not depend on how trials are split
# across workers.

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import norm

from poolrate.exceptions import DependencyError, DomainError, ValidationError
from poolrate.instance import ProblemInstance, SelectionProblem, build_selection_problem
from poolrate.oracle.enumeration import EXCESS_TOLERANCE
from poolrate.util import config_hash

STRATEGIES = ("greedy-min-d", "random", "label-all", "per-letter-S*")


def wilson_interval(successes: int, trials: int, alpha: float = 0.05) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    z = norm.ppf(1 - alpha / 2)
    p = successes / trials
    denominator = 1 + z**2 / trials
    centre = (p + z**2 / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


def greedy_kernel(problem: SelectionProblem) -> np.ndarray:
    """Per pool, the first feasible dataset of least expected distortion."""
    kernel = np.zeros((problem.n_pools, problem.n_datasets))
    for i, columns in enumerate(problem.feasible):
        kernel[i, columns[int(np.argmin(problem.costs(i)))]] = 1.0
    return kernel


def strategy_kernel(
    inst: ProblemInstance,
    strategy: str,
    n_per_letter: Optional[int] = None,
    problem: Optional[SelectionProblem] = None,
    point=None,
    budget: Optional[int] = None,
) -> Tuple[SelectionProblem, np.ndarray]:
    """Selection problem and per-letter kernel of a named strategy.

    ``greedy-min-d`` and ``random`` select ``n_per_letter`` samples per pool,
    ``label-all`` selects all m, and ``per-letter-S*`` reuses the kernel of a
    solved `LagrangianPoint` on ``problem``.
    """
    if strategy == "per-letter-S*":
        if point is None or problem is None:
            raise DependencyError("per-letter-S* needs a solved selection kernel")
        return problem, np.asarray(point.selection_kernel.rows)
    if strategy == "label-all":
        n_per_letter = inst.m
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}", "strategy")
    if n_per_letter is None:
        raise ValidationError(f"strategy {strategy!r} needs a label budget per pool", "n")
    problem = build_selection_problem(
        inst.with_updates(n=int(n_per_letter), selection_mode="fixed-n"), budget
    )
    if strategy == "greedy-min-d":
        return problem, greedy_kernel(problem)
    return problem, problem.uniform_subset_kernel()


@dataclass(frozen=True, eq=False)
class _Tables:
    cum_w: np.ndarray
    cum_u: np.ndarray
    cum_t: np.ndarray
    cum_h: np.ndarray
    distortion: np.ndarray
    sizes: np.ndarray


def _draw(cumulative: np.ndarray, r: np.ndarray) -> np.ndarray:
    index = (cumulative < r[:, None]).sum(axis=1)
    return np.minimum(index, cumulative.shape[1] - 1)


def _run_trials(tables: _Tables, trial_ids: np.ndarray, seed: int, k: int):
    blocks = np.empty(trial_ids.size)
    labels = np.empty(trial_ids.size, dtype=int)
    for j, trial in enumerate(trial_ids):
        rng = np.random.default_rng([seed, int(trial)])
        r = rng.random((4, k))
        w = np.minimum(np.searchsorted(tables.cum_w, r[0], side="right"), tables.cum_w.size - 1)
        u = _draw(tables.cum_u[w], r[1])
        t = _draw(tables.cum_t[u], r[2])
        h = _draw(tables.cum_h[t], r[3])
        blocks[j] = tables.distortion[w, h].mean()
        labels[j] = tables.sizes[t].sum()
    return blocks, labels


@dataclass(frozen=True, eq=False)
class SimReport:
    """Outcome of a block simulation.

    ``rate_bits`` is b times the mean number of labels per pool; the
    interval is the 95% Wilson interval of the excess probability.
    """

    strategy: str
    k: int
    trials: int
    seed: int
    d: float
    excess_count: int
    excess_prob: float
    wilson_low: float
    wilson_high: float
    mean_distortion: float
    mean_labels: float
    max_labels: int
    rate_bits: float
    config_hash: str
    block_distortions: np.ndarray = field(repr=False)

    @property
    def rate_nats(self) -> float:
        return self.rate_bits * math.log(2.0)

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.block_distortions, q))

    def to_row(self) -> dict:
        return {
            "strategy": self.strategy,
            "k": self.k,
            "trials": self.trials,
            "seed": self.seed,
            "d": self.d,
            "excess_count": self.excess_count,
            "excess_prob": self.excess_prob,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
            "mean_distortion": self.mean_distortion,
            "mean_labels": self.mean_labels,
            "max_labels": self.max_labels,
            "rate_bits": self.rate_bits,
            "config_hash": self.config_hash,
        }


def simulate_block(
    inst: ProblemInstance,
    strategy: str,
    k: int,
    trials: int,
    seed: int,
    d: float,
    n_per_letter: Optional[int] = None,
    n_total: Optional[int] = None,
    problem: Optional[SelectionProblem] = None,
    point=None,
    n_jobs: int = 1,
    chunk_size: int = 1000,
    budget: Optional[int] = None,
) -> SimReport:
    """Simulates ``trials`` blocks of k pools under a selection strategy.

    Parameters
    ----------
    inst : `ProblemInstance`
    strategy : str
        One of ``greedy-min-d``, ``random``, ``label-all``, ``per-letter-S*``.
    k : int
        Pools per block.
    trials : int
        Number of blocks.
    seed : int
        Base seed.
    d : float
        Distortion threshold; a block exceeds it when its average distortion
        is strictly larger.
    n_per_letter, n_total : int, optional
        Label budget per pool, or in total over the block (divisible by k).
    problem, point : optional
        Selection problem and solved point for ``per-letter-S*``.
    n_jobs : int
        Parallel workers for joblib.
    """
    if k < 1 or trials < 1:
        raise DomainError(f"need k >= 1 and trials >= 1, got k={k}, trials={trials}")
    if n_total is not None and n_per_letter is None:
        if n_total % k:
            raise ValidationError(f"total budget {n_total} is not a multiple of k={k}", "n")
        n_per_letter = n_total // k
    problem, kernel = strategy_kernel(inst, strategy, n_per_letter, problem, point, budget)

    tables = _Tables(
        cum_w=np.cumsum(inst.p_w.weights),
        cum_u=np.cumsum(problem.pool_space.p_u_given_w.rows, axis=1),
        cum_t=np.cumsum(kernel, axis=1),
        cum_h=np.cumsum(problem.algorithm.rows, axis=1),
        distortion=problem.distortion,
        sizes=np.array([t.size for t in problem.datasets]),
    )
    chunks = [
        np.arange(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)
    ]
    results = Parallel(n_jobs=n_jobs)(delayed(_run_trials)(tables, ids, seed, k) for ids in chunks)
    blocks = np.concatenate([r[0] for r in results])
    labels = np.concatenate([r[1] for r in results])

    excess = int(np.sum(blocks > d + EXCESS_TOLERANCE))
    low, high = wilson_interval(excess, trials)
    mean_labels = float(labels.mean()) / k
    settings = {
        "strategy": strategy,
        "k": k,
        "trials": trials,
        "seed": seed,
        "d": d,
        "n_per_letter": n_per_letter,
    }
    return SimReport(
        strategy=strategy,
        k=int(k),
        trials=int(trials),
        seed=int(seed),
        d=float(d),
        excess_count=excess,
        excess_prob=excess / trials,
        wilson_low=low,
        wilson_high=high,
        mean_distortion=float(blocks.mean()),
        mean_labels=mean_labels,
        max_labels=int(labels.max()),
        rate_bits=inst.bits_per_sample * mean_labels,
        config_hash=config_hash(settings),
        block_distortions=blocks,
    )


def reports_to_frame(reports) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports])
