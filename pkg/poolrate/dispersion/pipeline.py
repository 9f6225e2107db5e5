from dataclasses import dataclass
from typing import Optional

from poolrate.dispersion.decomposition import DispersionReport, dispersion_report
from poolrate.dispersion.joint import InducedJoint, joint_for_kernel
from poolrate.dispersion.tilted import TiltedTable, tilted_information
from poolrate.instance import SelectionProblem
from poolrate.rd import LagrangianPoint, RDCurve, SolverConfig, solve_at_distortion


@dataclass(frozen=True, eq=False)
class DispersionResult:
    point: LagrangianPoint
    joint: InducedJoint
    tilted: TiltedTable
    report: DispersionReport


def dispersion_at(
    problem: SelectionProblem,
    curve: RDCurve,
    d: float,
    config: Optional[SolverConfig] = None,
    point: Optional[LagrangianPoint] = None,
    verbose: bool = False,
) -> DispersionResult:
    """Solves the problem at distortion ``d`` (unless ``point`` is given) and
    computes the tilted information and its dispersion there.
    """
    if point is None:
        point = solve_at_distortion(problem, d, config, verbose=verbose)
    joint = joint_for_kernel(problem, point.selection_kernel)
    tilted = tilted_information(joint, curve, d)
    return DispersionResult(point, joint, tilted, dispersion_report(joint, tilted))
