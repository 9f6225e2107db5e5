# Exact variance decomposition of the tilted information by the law of total
# variance along W -> (W,U) -> (W,U,T) -> (W,U,T,H), the mutual information
# identities of the Markov chain U -> T -> H, and the split of the
# information density through T.

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import pandas as pd

from poolrate.dispersion.joint import InducedJoint
from poolrate.dispersion.tilted import TiltedTable
from poolrate.exceptions import DecompositionError
from poolrate.prob import (
    JointTable,
    conditional_mutual_information,
    mutual_information,
)

ZERO_DISPERSION = 1e-15
TERM_TOLERANCE = 1e-9


def _conditional_mean(values: np.ndarray, prob: np.ndarray, *keys: np.ndarray) -> np.ndarray:
    """E[values | keys] evaluated at every atom."""
    if not keys:
        return np.full(values.shape, prob @ values)
    stacked = np.stack(keys, axis=1)
    _, group = np.unique(stacked, axis=0, return_inverse=True)
    group = np.asarray(group).ravel()
    mass = np.bincount(group, weights=prob)
    total = np.bincount(group, weights=prob * values)
    return (total / mass)[group]


def _moment(prob: np.ndarray, a: np.ndarray, b: Optional[np.ndarray] = None) -> float:
    return float(prob @ (a * (a if b is None else b)))


@dataclass(frozen=True)
class DispersionReport:
    """Variance of the tilted information and its decomposition.

    ``V_in`` splits into the pool, selection and algorithm parts of the
    information density and of the distortion plus a covariance term;
    ``V_bet`` into three terms under the same information density and into
    three more under iota_{W;H}. Residuals are reconstructions minus totals.
    """

    d: float
    lambda_star: float
    R_check: float
    mean_identity_residual: float
    V: float
    V_in: float
    V_bet: float
    V_in_U_iota: float
    V_in_S_iota: float
    V_in_A_iota: float
    V_in_U_d: float
    V_in_S_d: float
    V_in_A_d: float
    V_in_cov: float
    V_bet_iota: float
    V_bet_d: float
    V_bet_cov: float
    V_bet_iota_wh: float
    V_bet_cov_wh: float
    V_bet_wh_discrepancy: float
    total_residual: float
    in_residual: float
    bet_residual: float
    third_abs_moment: float
    berry_esseen_B: Optional[float]
    zero_dispersion: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([self.to_dict()])


def dispersion_report(joint: InducedJoint, tilted: TiltedTable) -> DispersionReport:
    """Computes the dispersion V = Var(j) and every term of its
    decomposition by exact enumeration over the atoms of ``joint``.

    Raises
    ------
    DecompositionError
        If V vanishes while a reconstruction of it does not.
    """
    p = joint.prob
    lam = tilted.lambda_star
    j = tilted.atom_values
    iota = joint.iota_uh
    dist = joint.atom_distortion
    w, u, t = joint.w, joint.u, joint.t

    mean_j = float(p @ j)
    V = _moment(p, j - mean_j)
    j_w = _conditional_mean(j, p, w)
    V_in = _moment(p, j - j_w)
    V_bet = _moment(p, j_w - mean_j)

    ladders = {}
    for name, f in (("iota", iota), ("d", dist)):
        f_w = _conditional_mean(f, p, w)
        f_wu = _conditional_mean(f, p, w, u)
        f_wut = _conditional_mean(f, p, w, u, t)
        ladders[name] = {
            "U": _moment(p, f_wu - f_w),
            "S": _moment(p, f_wut - f_wu),
            "A": _moment(p, f - f_wut),
            "centred": f - f_w,
            "between": f_w - p @ f,
        }
    li, ld = ladders["iota"], ladders["d"]
    V_in_cov = _moment(p, li["centred"], ld["centred"])
    in_reconstruction = (
        li["U"] + li["S"] + li["A"] + lam**2 * (ld["U"] + ld["S"] + ld["A"]) + 2 * lam * V_in_cov
    )

    V_bet_iota = _moment(p, li["between"])
    V_bet_d = _moment(p, ld["between"])
    V_bet_cov = _moment(p, li["between"], ld["between"])
    bet_reconstruction = V_bet_iota + lam**2 * V_bet_d + 2 * lam * V_bet_cov

    # iota_{W;H}(w;h) = log P(h|w) / P(h); its conditional mean given w is
    # the divergence of P(.|w) from P_H
    p_wh = np.zeros((joint.shape[0], joint.shape[3]))
    np.add.at(p_wh, (w, joint.h), p)
    p_w = p_wh.sum(axis=1)
    iota_wh = np.log(p_wh[w, joint.h] / p_w[w] / joint.h_marginal[joint.h])
    between_wh = _conditional_mean(iota_wh, p, w) - p @ iota_wh
    V_bet_iota_wh = _moment(p, between_wh)
    V_bet_cov_wh = _moment(p, between_wh, ld["between"])
    wh_reconstruction = V_bet_iota_wh + lam**2 * V_bet_d + 2 * lam * V_bet_cov_wh

    rate = mutual_information(JointTable(("U", "H"), _pair_mass(joint)), "U", "H")
    third = float(p @ np.abs(j - mean_j) ** 3)
    residuals = (
        V_in + V_bet - V,
        in_reconstruction - V_in,
        bet_reconstruction - V_bet,
    )
    zero_dispersion = bool(V <= ZERO_DISPERSION)
    if zero_dispersion and max(abs(x) for x in residuals) > TERM_TOLERANCE:
        raise DecompositionError(
            f"dispersion vanishes but a decomposition residual is {max(abs(x) for x in residuals):.3e}"
        )

    return DispersionReport(
        d=tilted.d,
        lambda_star=lam,
        R_check=mean_j,
        mean_identity_residual=mean_j - (rate + lam * (p @ dist - tilted.d)),
        V=V,
        V_in=V_in,
        V_bet=V_bet,
        V_in_U_iota=li["U"],
        V_in_S_iota=li["S"],
        V_in_A_iota=li["A"],
        V_in_U_d=ld["U"],
        V_in_S_d=ld["S"],
        V_in_A_d=ld["A"],
        V_in_cov=V_in_cov,
        V_bet_iota=V_bet_iota,
        V_bet_d=V_bet_d,
        V_bet_cov=V_bet_cov,
        V_bet_iota_wh=V_bet_iota_wh,
        V_bet_cov_wh=V_bet_cov_wh,
        V_bet_wh_discrepancy=V_bet - wh_reconstruction,
        total_residual=V_in + V_bet - V,
        in_residual=in_reconstruction - V_in,
        bet_residual=bet_reconstruction - V_bet,
        third_abs_moment=third,
        berry_esseen_B=None if zero_dispersion else 6.0 * third / V**1.5,
        zero_dispersion=zero_dispersion,
    )


def _pair_mass(joint: InducedJoint) -> np.ndarray:
    mass = np.zeros((joint.shape[1], joint.shape[3]))
    np.add.at(mass, (joint.u, joint.h), joint.prob)
    return mass


@dataclass(frozen=True)
class MIIdentityReport:
    I_UH: float
    I_UT: float
    I_UT_given_H: float
    I_TH: float
    I_TH_given_U: float
    pool_side_residual: float
    algorithm_side_residual: float


def mi_identity_check(joint) -> MIIdentityReport:
    """Checks I(U;H) = I(U;T) - I(U;T|H) = I(T;H) - I(T;H|U).

    Parameters
    ----------
    joint : `InducedJoint` or `JointTable`
        A table needs axes named ``U``, ``T`` and ``H``.
    """
    table = joint.table() if isinstance(joint, InducedJoint) else joint
    i_uh = mutual_information(table, "U", "H")
    i_ut = mutual_information(table, "U", "T")
    i_ut_h = conditional_mutual_information(table, "U", "T", "H")
    i_th = mutual_information(table, "T", "H")
    i_th_u = conditional_mutual_information(table, "T", "H", "U")
    return MIIdentityReport(
        I_UH=i_uh,
        I_UT=i_ut,
        I_UT_given_H=i_ut_h,
        I_TH=i_th,
        I_TH_given_U=i_th_u,
        pool_side_residual=(i_ut - i_ut_h) - i_uh,
        algorithm_side_residual=(i_th - i_th_u) - i_uh,
    )


@dataclass(frozen=True)
class IotaSplitReport:
    max_residual: float
    var_iota_uh: float
    var_iota_th: float
    var_delta: float
    cov_th_delta: float
    variance_residual: float


def iota_split_check(joint: InducedJoint) -> IotaSplitReport:
    """Checks iota_{U;H}(u;h) = iota_{T;H}(t;h) + Delta(u,t,h) atom by atom,
    with Delta = log P(h|u) / P^A(h|t), and the matching variance identity.
    """
    p = joint.prob
    p_h = joint.h_marginal[joint.h]
    algorithm = joint.h_given_t[joint.t, joint.h]
    iota_th = np.log(algorithm / p_h)
    delta = np.log(joint.h_given_u[joint.u, joint.h] / algorithm)
    iota_uh = joint.iota_uh

    def centred(x):
        return x - p @ x

    var_uh = _moment(p, centred(iota_uh))
    var_th = _moment(p, centred(iota_th))
    var_delta = _moment(p, centred(delta))
    cov = _moment(p, centred(iota_th), centred(delta))
    return IotaSplitReport(
        max_residual=float(np.max(np.abs(iota_uh - (iota_th + delta)))),
        var_iota_uh=var_uh,
        var_iota_th=var_th,
        var_delta=var_delta,
        cov_th_delta=cov,
        variance_residual=var_th + var_delta + 2 * cov - var_uh,
    )
