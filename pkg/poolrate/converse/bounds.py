# Finite-length converse bounds for active learning: the excess-distortion
# probability bound built from the tail of the tilted information, and its
# Gaussian approximations as label-rate and distortion lower bounds.

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from poolrate.converse.gaussian import q_inverse
from poolrate.dispersion import DispersionReport, TiltedTable
from poolrate.exceptions import DomainError, RangeError
from poolrate.rd import RDCurve, invert_to_distortion, rate_at_distortion

LN2 = math.log(2.0)
GAMMA_NUDGE = 1e-12
D_MISMATCH = 1e-6
CONVERSE_COLUMNS = [
    "theorem", "variant", "k", "m", "n", "d", "eps", "R_nats", "V", "lambda_star", "bound_value", "flags",
]


@dataclass(frozen=True)
class EpsilonBound:
    """Lower bound on the probability that the block distortion exceeds d
    when n labels of b bits each are selected.
    """

    n: int
    b: float
    bn_nats: float
    eps_lower: float
    gamma_star: float
    raw_value: float

    @property
    def vacuous(self) -> bool:
        return self.raw_value <= 0

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "bn_nats": self.bn_nats,
            "eps_lower": self.eps_lower,
            "gamma_star": self.gamma_star,
            "vacuous": self.vacuous,
        }


def tail_probability(tilted: TiltedTable, threshold) -> np.ndarray:
    """P[j >= threshold] for one or several thresholds."""
    order = np.argsort(tilted.values)
    values = tilted.values[order]
    tail = np.concatenate([np.cumsum(tilted.prob[order][::-1])[::-1], [0.0]])
    return tail[np.searchsorted(values, np.asarray(threshold, dtype=float), side="left")]


def epsilon_objective(tilted: TiltedTable, bn_nats: float, gamma) -> np.ndarray:
    """P[j >= bn + gamma] - exp(-gamma)."""
    gamma = np.asarray(gamma, dtype=float)
    return tail_probability(tilted, bn_nats + gamma) - np.exp(-gamma)


def theorem1_epsilon_bound(tilted: TiltedTable, n: int, b: float) -> EpsilonBound:
    """Excess-distortion lower bound sup_{gamma >= 0} P[j >= bn + gamma] - e^{-gamma}.

    The supremum over a step function minus a decreasing exponential is
    attained at gamma = 0 or just below a jump, so only the atoms of j are
    tried (each also nudged down by 1e-12).

    Parameters
    ----------
    tilted : `TiltedTable`
        Tilted information at the distortion of interest.
    n : int
        Number of labels.
    b : float
        Bits per label.

    Returns
    -------
    `EpsilonBound`
        The bound clamped to [0, 1]; ``vacuous`` when it is not positive.
    """
    if n < 0:
        raise DomainError(f"number of labels must be non-negative, got {n}")
    bn = n * b * LN2
    jumps = np.unique(tilted.values) - bn
    candidates = np.unique(np.clip(np.concatenate([[0.0], jumps, jumps - GAMMA_NUDGE]), 0.0, None))
    objective = epsilon_objective(tilted, bn, candidates)
    best = int(np.argmax(objective))
    raw = float(objective[best])
    return EpsilonBound(int(n), float(b), bn, min(max(raw, 0.0), 1.0), float(candidates[best]), raw)


def theorem1_curve(tilted: TiltedTable, n_values: Sequence[int], b: float) -> List[EpsilonBound]:
    return [theorem1_epsilon_bound(tilted, int(n), b) for n in n_values]


@dataclass(frozen=True)
class ConverseReport:
    """One evaluated lower bound.

    ``bound_value`` is the excess probability lower bound (label bound), the
    label rate lower bound in nats per pool (rate bound) or the distortion
    lower bound (distortion bound). ``n`` is the number of labels the row
    refers to: the given budget for the excess probability bound, otherwise
    the least number of b-bit labels for k pools implied by the rate, or
    None when b is unknown.
    """

    theorem: str
    variant: str
    k: int
    m: int
    n: Optional[int]
    d: float
    eps: Optional[float]
    R_nats: float
    V: float
    lambda_star: float
    bound_value: float
    bound_without_o_term: float
    flags: Tuple[str, ...] = ()
    intermediates: Dict[str, float] = field(default_factory=dict)

    def to_row(self) -> dict:
        row = {column: getattr(self, column) for column in CONVERSE_COLUMNS[:-1]}
        row["flags"] = "|".join(self.flags)
        row["bound_without_o_term"] = self.bound_without_o_term
        return row


def _pool_size(curve: RDCurve, m: Optional[int]) -> int:
    m = curve.m if m is None else m
    if m is None:
        raise DomainError("pool size m is unknown for this curve; pass m")
    return int(m)


def theorem1_report(
    curve: RDCurve, report: DispersionReport, bound: EpsilonBound, m: Optional[int] = None
) -> ConverseReport:
    """Excess probability bound of one label budget as a converse row."""
    return ConverseReport(
        theorem="1",
        variant="exact",
        k=1,
        m=_pool_size(curve, m),
        n=bound.n,
        d=report.d,
        eps=None,
        R_nats=rate_at_distortion(curve, report.d),
        V=report.V,
        lambda_star=report.lambda_star,
        bound_value=bound.eps_lower,
        bound_without_o_term=bound.raw_value,
        flags=("vacuous",) if bound.vacuous else (),
        intermediates={"bn_nats": bound.bn_nats, "gamma_star": bound.gamma_star},
    )


def _check_common(k: int, eps: float):
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")


def label_bound(rate_nats: float, k: int, b: float) -> int:
    """Least number of b-bit labels compatible with a rate lower bound."""
    labels = k * rate_nats / (b * LN2)
    return max(0, math.ceil(labels - 1e-9))


def theorem2_rate_bound(
    curve: RDCurve,
    report: DispersionReport,
    k: int,
    d: float,
    eps: float,
    variant: str = "asymptotic",
    b: Optional[float] = None,
    m: Optional[int] = None,
) -> ConverseReport:
    """Second-order lower bound on the label rate nb/k in nats per pool.

    ``asymptotic``: R(d) + sqrt(V/k) Q^{-1}(eps) - log(k) / (2k).
    ``explicit``: with gamma = log(k)/2 and eps_k = eps + e^{-gamma} + B/sqrt(k),
    (k R(d) + sqrt(k V) Q^{-1}(eps_k) - gamma) / k. When eps_k >= 1 the
    asymptotic value is returned with the flag ``explicit-infeasible``. With
    V = 0 the explicit value is R(d) - log(1/(1-eps)) / k.
    ``m`` defaults to the pool size recorded on the curve.

    Raises
    ------
    DomainError
        For eps outside (0, 1) or k < 1.
    RangeError
        For d outside (d_min, d_max).
    """
    _check_common(k, eps)
    if variant not in ("asymptotic", "explicit"):
        raise DomainError(f"unknown variant {variant!r}")
    if not curve.d_min < d < curve.d_max:
        raise RangeError(f"d must lie strictly inside ({curve.d_min:.9f}, {curve.d_max:.9f})")
    rate = rate_at_distortion(curve, d)
    V = report.V
    flags = []
    intermediates = {"gamma": 0.5 * math.log(k)}
    if abs(report.d - d) > D_MISMATCH * (curve.d_max - curve.d_min):
        flags.append("dispersion-d-mismatch")

    q_eps = q_inverse(eps)
    asymptotic = rate + math.sqrt(V / k) * q_eps
    value, without_o = asymptotic - math.log(k) / (2 * k), asymptotic
    intermediates["Q_inv"] = q_eps

    if variant == "explicit":
        if report.zero_dispersion:
            flags.append("zero-dispersion")
            gamma = math.log(1.0 / (1.0 - eps))
            intermediates["gamma"] = gamma
            value, without_o = rate - gamma / k, rate
        else:
            gamma = 0.5 * math.log(k)
            eps_k = eps + math.exp(-gamma) + report.berry_esseen_B / math.sqrt(k)
            intermediates.update(eps_k=eps_k, B=report.berry_esseen_B)
            if eps_k >= 1.0:
                flags.append("explicit-infeasible")
                variant = "asymptotic"
            else:
                q_k = q_inverse(eps_k)
                intermediates["Q_inv_eps_k"] = q_k
                without_o = rate + math.sqrt(V / k) * q_k
                value = (k * rate + math.sqrt(k * V) * q_k - gamma) / k
    elif report.zero_dispersion:
        flags.append("zero-dispersion")

    return ConverseReport(
        theorem="2",
        variant=variant,
        k=int(k),
        m=_pool_size(curve, m),
        n=None if b is None else label_bound(value, k, b),
        d=float(d),
        eps=float(eps),
        R_nats=rate,
        V=V,
        lambda_star=report.lambda_star,
        bound_value=value,
        bound_without_o_term=without_o,
        flags=tuple(flags),
        intermediates=intermediates,
    )


def theorem3_distortion_bound(
    curve: RDCurve,
    report: DispersionReport,
    k: int,
    rate: float,
    eps: float,
    include_statement_term: bool = False,
    m: Optional[int] = None,
    b: Optional[float] = None,
) -> ConverseReport:
    """Second-order lower bound on the distortion at label rate ``rate``:

        D(R) + sqrt(D'(R)^2 V / k) Q^{-1}(eps) - |D'(R)| log(k) / (2k),

    with V the dispersion at D(R). ``include_statement_term`` adds D'(R)
    once more; the flag ``statement-term`` records it.
    ``m`` defaults to the pool size recorded on the curve; with ``b`` the row
    also carries the number of labels that rate amounts to for k pools.

    Raises
    ------
    RangeError
        For R outside (rate_floor, max_rate) or on a flat envelope segment.
    """
    _check_common(k, eps)
    if not curve.rate_floor < rate < curve.max_rate:
        raise RangeError(
            f"rate must lie strictly inside ({curve.rate_floor:.9f}, {curve.max_rate:.9f}) nats"
        )
    inversion = invert_to_distortion(curve, rate)
    D, D_prime = inversion.distortion, inversion.derivative
    flags = []
    if inversion.kink:
        flags.append("kink")
    if abs(report.d - D) > D_MISMATCH * (curve.d_max - curve.d_min):
        flags.append("dispersion-d-mismatch")
    script_v = D_prime**2 * report.V
    c = abs(D_prime) / 2.0
    q_eps = q_inverse(eps)
    without_o = D + math.sqrt(script_v / k) * q_eps
    value = without_o - c * math.log(k) / k
    if include_statement_term:
        value += D_prime
        flags.append("statement-term")
    return ConverseReport(
        theorem="3",
        variant="asymptotic",
        k=int(k),
        m=_pool_size(curve, m),
        n=None if b is None else label_bound(rate, k, b),
        d=D,
        eps=float(eps),
        R_nats=float(rate),
        V=report.V,
        lambda_star=report.lambda_star,
        bound_value=value,
        bound_without_o_term=without_o,
        flags=tuple(flags),
        intermediates={"D": D, "D_prime": D_prime, "V_cal": script_v, "c": c, "Q_inv": q_eps},
    )


def reports_to_frame(reports: Sequence[ConverseReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports])
