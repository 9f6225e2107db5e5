# Rate-distortion curve of the selection problem: a sweep over Lagrange
# multipliers, the lower convex envelope of the solved points, and the
# queries made against it (rate at a distortion, slope, inverse).

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from poolrate.exceptions import ConvergenceError, DomainError, RangeError
from poolrate.instance import DistortionBounds, SelectionProblem
from poolrate.rd.config import SolverConfig
from poolrate.rd.lagrangian import LagrangianPoint, solve_lagrangian
from poolrate.terminal_enhancer import tcols

MONOTONE_TOLERANCE = 1e-7
KNOT_TOLERANCE = 1e-12
PIN_TOLERANCE = 1e-6
CURVE_COLUMNS = ["lambda", "distortion", "rate_nats", "rate_bits"]


def default_lambda_grid(n_points: int = 15) -> np.ndarray:
    return np.concatenate([[0.0], np.logspace(-3, 4, n_points)])


def _lower_hull(d: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    hull = []
    for point in zip(d, r):
        while len(hull) >= 2:
            (d0, r0), (d1, r1) = hull[-2], hull[-1]
            cross = (d1 - d0) * (point[1] - r0) - (r1 - r0) * (point[0] - d0)
            if cross > 0:
                break
            hull.pop()
        hull.append(point)
    knots = np.array(hull, dtype=float).reshape(-1, 2)
    return knots[:, 0], knots[:, 1]


@dataclass(frozen=True, eq=False)
class RDCurve:
    """Solved points and their lower convex envelope.

    Attributes
    ----------
    points : tuple of `LagrangianPoint`
        Solved points in increasing distortion.
    d_min, d_max : float
        Distortion range. ``d_max`` is the least zero-rate distortion or, when
        no zero-rate selection exists, the distortion of the minimum-rate
        point.
    rate_floor : float
        Rate at ``d_max``; zero unless zero rate is unreachable.
    knots_d, knots_r : :class:`numpy.ndarray`
        Envelope knots, distortion increasing and rate non-increasing.
    m : int, optional
        Pool size of the instance the curve was swept on.
    """

    points: Tuple[LagrangianPoint, ...]
    d_min: float
    d_max: float
    rate_floor: float
    knots_d: np.ndarray
    knots_r: np.ndarray
    m: Optional[int] = None

    @classmethod
    def from_points(
        cls, points: Sequence[LagrangianPoint], bounds: DistortionBounds, m: Optional[int] = None
    ) -> "RDCurve":
        """Sorts, de-duplicates and checks the solved points, then builds the
        envelope. The leftmost knot is pinned to d_min when it lies within
        1e-6 of the distortion range from it; otherwise the curve starts at
        the smallest solved distortion. When zero rate is reachable the
        envelope ends at (d_max, 0).

        Raises
        ------
        ConvergenceError
            If the rate increases with distortion by more than 1e-7.
        """
        ordered = sorted(points, key=lambda p: (p.avg_distortion, p.rate))
        kept = []
        for point in ordered:
            if kept and point.avg_distortion - kept[-1].avg_distortion <= KNOT_TOLERANCE:
                continue
            kept.append(point)
        d = np.array([p.avg_distortion for p in kept])
        r = np.array([max(p.rate, 0.0) for p in kept])
        for i in range(1, r.size):
            if r[i] > r[i - 1] + MONOTONE_TOLERANCE:
                raise ConvergenceError(
                    f"rate increases from {r[i-1]:.9f} to {r[i]:.9f} nats between "
                    f"d={d[i-1]:.9f} and d={d[i]:.9f}"
                )
            r[i] = min(r[i], r[i - 1])

        if bounds.zero_rate_reachable:
            d_max, rate_floor = bounds.d_max, 0.0
            inside = d < d_max - KNOT_TOLERANCE
            d = np.append(d[inside], d_max)
            r = np.append(r[inside], 0.0)
        else:
            d_max, rate_floor = float(d[-1]), float(r[-1])
        if d[0] - bounds.d_min <= PIN_TOLERANCE * max(d_max - bounds.d_min, KNOT_TOLERANCE):
            d[0] = bounds.d_min
        d_min = float(d[0])
        knots_d, knots_r = _lower_hull(d, r)
        return cls(
            tuple(kept), float(d_min), float(d_max), float(rate_floor), knots_d, knots_r, m
        )

    @property
    def max_rate(self) -> float:
        return float(self.knots_r[0])

    def slopes(self) -> np.ndarray:
        return np.diff(self.knots_r) / np.diff(self.knots_d)

    def is_convex(self, tolerance: float = 1e-9) -> bool:
        slopes = self.slopes()
        return bool(np.all(np.diff(slopes) >= -tolerance) and np.all(slopes <= tolerance))

    def to_frame(self) -> pd.DataFrame:
        """One row per solved point with columns lambda, distortion, rate_nats
        and rate_bits.
        """
        return pd.DataFrame([p.to_row() for p in self.points], columns=CURVE_COLUMNS)

    def diagnostics_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([p.diagnostics_row() for p in self.points])
        frame["on_envelope"] = [
            bool(np.any(np.abs(self.knots_d - p.avg_distortion) <= KNOT_TOLERANCE))
            for p in self.points
        ]
        return frame


def sweep_lambda(
    problem: SelectionProblem,
    lambda_grid: Optional[Sequence[float]] = None,
    config: Optional[SolverConfig] = None,
    verbose: bool = False,
) -> RDCurve:
    """Solves the Lagrangian problem along a grid of multipliers.

    Multipliers are solved in increasing order, each warm-started from the
    previous solution.

    Parameters
    ----------
    problem : `SelectionProblem`
    lambda_grid : sequence of float, optional
        Non-negative multipliers; defaults to 0 followed by 15 log-spaced
        values in [1e-3, 1e4].
    config : `SolverConfig`, optional
    verbose : bool
        Print one line per multiplier.

    Raises
    ------
    DomainError
        If the grid is empty or has a negative entry.
    ConvergenceError
        Naming the multiplier at which the solver failed.
    """
    grid = default_lambda_grid() if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    if grid.size == 0 or np.any(~np.isfinite(grid)) or np.any(grid < 0):
        raise DomainError("lambda grid must be a non-empty list of non-negative numbers")
    points, warm = [], None
    for lam in np.unique(grid):
        try:
            point = solve_lagrangian(problem, float(lam), config, init=warm)
        except ConvergenceError as error:
            raise ConvergenceError(f"sweep stopped at lambda={lam:g}: {error}") from error
        if lam > 0:
            warm = np.asarray(point.selection_kernel.rows)
        if verbose:
            print(
                tcols.OKBLUE + f"lambda={lam:<10.4g}" + tcols.ENDC
                + f" rate {point.rate:.6f} nats, distortion {point.avg_distortion:.6f}"
            )
        points.append(point)
    return RDCurve.from_points(points, problem.bounds, problem.instance.m)


def _check_range(curve: RDCurve, d: float):
    if not curve.d_min - KNOT_TOLERANCE <= d <= curve.d_max + KNOT_TOLERANCE:
        raise RangeError(
            f"distortion {d} outside [{curve.d_min:.9f}, {curve.d_max:.9f}]"
        )


def rate_at_distortion(curve: RDCurve, d: float) -> float:
    """R(d) in nats by linear interpolation of the envelope."""
    _check_range(curve, d)
    return float(np.interp(d, curve.knots_d, curve.knots_r))


def _slope_at(knots_x: np.ndarray, slopes: np.ndarray, x: float) -> Tuple[float, bool]:
    """Slope of a piecewise-linear function at x, the mean of the adjacent
    slopes at a knot. Returns the slope and whether x sits on a kink.
    """
    scale = max(1.0, abs(knots_x[-1] - knots_x[0]))
    hits = np.flatnonzero(np.abs(knots_x - x) <= KNOT_TOLERANCE * scale)
    if hits.size:
        j = int(hits[0])
        adjacent = [slopes[k] for k in (j - 1, j) if 0 <= k < slopes.size]
        kink = len(adjacent) == 2 and not np.isclose(adjacent[0], adjacent[1])
        return float(np.mean(adjacent)), kink
    j = int(np.searchsorted(knots_x, x)) - 1
    return float(slopes[min(max(j, 0), slopes.size - 1)]), False


def lambda_star(curve: RDCurve, d: float) -> float:
    """Negative slope of the envelope at d, for d strictly inside (d_min, d_max).

    Raises
    ------
    RangeError
        At the endpoints, outside the range, or on a flat segment.
    """
    if not curve.d_min < d < curve.d_max or curve.knots_d.size < 2:
        raise RangeError(
            f"slope needs d strictly inside ({curve.d_min:.9f}, {curve.d_max:.9f}), got {d}"
        )
    slope, _ = _slope_at(curve.knots_d, curve.slopes(), d)
    if not -slope > 0:
        raise RangeError(f"the envelope is flat at d={d}; no positive multiplier")
    return -slope


class Inversion(NamedTuple):
    distortion: float
    derivative: float
    kink: bool


def invert_to_distortion(curve: RDCurve, rate: float) -> Inversion:
    """Distortion-rate function D(R) and its derivative D'(R) = 1 / R'(D).

    Raises
    ------
    RangeError
        If the rate is outside [rate_floor, max_rate] or D sits on a flat
        segment.
    """
    if not curve.rate_floor - KNOT_TOLERANCE <= rate <= curve.max_rate + KNOT_TOLERANCE:
        raise RangeError(
            f"rate {rate} outside [{curve.rate_floor:.9f}, {curve.max_rate:.9f}] nats"
        )
    # keep the leftmost knot of every flat run so that rates strictly decrease
    keep = np.concatenate([[True], np.diff(curve.knots_r) < 0])
    knots_d, knots_r = curve.knots_d[keep], curve.knots_r[keep]
    if knots_d.size < 2:
        raise RangeError("the envelope has a single knot; D(R) has no derivative")
    distortion = float(np.interp(rate, knots_r[::-1], knots_d[::-1]))
    slope, kink = _slope_at(knots_d, np.diff(knots_r) / np.diff(knots_d), distortion)
    if slope == 0:
        raise RangeError(f"the envelope is flat at D={distortion}")
    return Inversion(distortion, 1.0 / slope, kink)


def solve_at_distortion(
    problem: SelectionProblem,
    d: float,
    config: Optional[SolverConfig] = None,
    rel_tol: Optional[float] = None,
    max_steps: int = 80,
    verbose: bool = False,
) -> LagrangianPoint:
    """Bisects on the multiplier until the solved distortion is within
    ``rel_tol * (d_max - d_min)`` of ``d``; ``rel_tol`` defaults to
    ``config.bisection_rel_tol``.

    The average distortion is non-increasing in the multiplier. When the
    target falls in a jump of that function the closest solved point is
    returned; its achieved distortion is in ``avg_distortion``.

    Raises
    ------
    RangeError
        If ``d`` is outside [d_min, d_max].
    """
    config = config or SolverConfig()
    rel_tol = config.bisection_rel_tol if rel_tol is None else rel_tol
    bounds = problem.bounds
    lower = solve_lagrangian(problem, 0.0, config)
    d_max = bounds.d_max if bounds.zero_rate_reachable else lower.avg_distortion
    if not bounds.d_min - KNOT_TOLERANCE <= d <= d_max + KNOT_TOLERANCE:
        raise RangeError(f"distortion {d} outside [{bounds.d_min:.9f}, {d_max:.9f}]")
    tol = rel_tol * max(d_max - bounds.d_min, KNOT_TOLERANCE)
    if lower.avg_distortion <= d + tol:
        return lower

    lo, hi = 0.0, 1.0
    upper = solve_lagrangian(problem, hi, config)
    while upper.avg_distortion > d + tol and hi < 1e8:
        lo, hi = hi, 4.0 * hi
        upper = solve_lagrangian(problem, hi, config, init=upper.selection_kernel.rows)
    best = min((lower, upper), key=lambda p: abs(p.avg_distortion - d))
    for _ in range(max_steps):
        if abs(best.avg_distortion - d) <= tol or hi / max(lo, 1e-300) - 1.0 < 1e-12:
            break
        lam = 0.5 * hi if lo == 0 else float(np.sqrt(lo * hi))
        point = solve_lagrangian(problem, lam, config, init=upper.selection_kernel.rows)
        if verbose:
            print(f"lambda={lam:.6g}: distortion {point.avg_distortion:.9f} (target {d:.9f})")
        if abs(point.avg_distortion - d) < abs(best.avg_distortion - d):
            best = point
        if point.avg_distortion > d:
            lo = lam
        else:
            hi, upper = lam, point
    return best
