from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import pandas as pd

from poolrate.dispersion.joint import InducedJoint
from poolrate.exceptions import RangeError
from poolrate.rd import RDCurve, lambda_star as envelope_slope


@dataclass(frozen=True, eq=False)
class TiltedTable:
    """Tilted information j(w,u,h) = iota_{U;H}(u;h) + lambda* (d(w;h) - d)
    on the support of the induced joint.

    ``atom_values`` follows the atoms of ``joint``; ``keys``, ``values`` and
    ``prob`` hold the distinct (w, u, h) triples and their probabilities.
    """

    d: float
    lambda_star: float
    joint: InducedJoint
    atom_values: np.ndarray

    @cached_property
    def _grouped(self):
        stacked = np.stack([self.joint.w, self.joint.u, self.joint.h], axis=1)
        keys, inverse = np.unique(stacked, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).ravel()
        prob = np.bincount(inverse, weights=self.joint.prob, minlength=keys.shape[0])
        values = np.zeros(keys.shape[0])
        values[inverse] = self.atom_values
        return keys, values, prob

    @property
    def keys(self) -> np.ndarray:
        return self._grouped[0]

    @property
    def values(self) -> np.ndarray:
        return self._grouped[1]

    @property
    def prob(self) -> np.ndarray:
        return self._grouped[2]

    @property
    def mean(self) -> float:
        return float(self.joint.prob @ self.atom_values)

    def to_frame(self) -> pd.DataFrame:
        keys, values, prob = self._grouped
        return pd.DataFrame(
            {"w": keys[:, 0], "u": keys[:, 1], "h": keys[:, 2], "probability": prob, "j_tilde": values}
        )


def tilted_information(
    joint: InducedJoint,
    curve: Optional[RDCurve],
    d: float,
    lambda_star: Optional[float] = None,
) -> TiltedTable:
    """Tilted information of a solved kernel.

    Parameters
    ----------
    joint : `InducedJoint`
        Joint induced by the kernel solving the problem at distortion ``d``.
    curve : `RDCurve`, optional
        Curve whose slope at the achieved distortion gives lambda*. May be
        None when ``lambda_star`` is passed.
    d : float
        Distortion level.
    lambda_star : float, optional
        Multiplier override.

    Raises
    ------
    RangeError
        If the slope is requested at an endpoint or outside the curve.
    """
    if lambda_star is None:
        if curve is None:
            raise RangeError("need either a curve or lambda_star")
        if not curve.d_min < d < curve.d_max:
            raise RangeError(
                f"tilted information needs d strictly inside "
                f"({curve.d_min:.9f}, {curve.d_max:.9f}), got {d}"
            )
        lambda_star = envelope_slope(curve, joint.avg_distortion)
    values = joint.iota_uh + lambda_star * (joint.atom_distortion - d)
    return TiltedTable(float(d), float(lambda_star), joint, values)
