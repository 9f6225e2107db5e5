# Command line front end of poolrate. Every subcommand loads an instance file,
# runs one pipeline and writes its tables, charts and the run manifest to the
# output directory. Errors are mapped onto exit codes (see EXIT_CODES).

import argparse
import math
import os
import sys
from typing import List, Optional

import pandas as pd

from poolrate import __version__
from poolrate.converse import (
    theorem1_curve,
    theorem1_report,
    theorem2_rate_bound,
    theorem3_distortion_bound,
)
from poolrate.dispersion import dispersion_at
from poolrate.exceptions import (
    AlphabetError,
    AxisError,
    BudgetError,
    ConvergenceError,
    CoverageError,
    DecompositionError,
    DependencyError,
    DomainError,
    RangeError,
    SupportError,
    ValidationError,
)
from poolrate.instance import build_selection_problem, load_instance, validate_instance
from poolrate.oracle import STRATEGIES, enumerate_selections, simulate_block
from poolrate.rd import SolverConfig, invert_to_distortion, solve_at_distortion, sweep_lambda
from poolrate.report import RunManifest, emit_report
from poolrate.terminal_enhancer import print_failure, print_header, print_warning, tcols
from poolrate.util import (
    file_sha256,
    load_solution,
    print_runtime,
    save_solution,
    time_and_exec,
)

DEFAULT_SEED = 12345
LN2 = math.log(2.0)

EXIT_CODES = (
    (BudgetError, 4),
    ((ConvergenceError, DependencyError, DecompositionError), 3),
    (
        (
            ValidationError,
            RangeError,
            DomainError,
            AlphabetError,
            AxisError,
            SupportError,
            CoverageError,
            OSError,
        ),
        2,
    ),
)


def _setup(args: dict):
    """Loads the instance, builds its selection problem and sweeps R(d)."""
    inst = load_instance(args["instance"])
    problem = build_selection_problem(inst, args["budget"])
    print_header("Rate-distortion sweep")
    curve, exec_time = time_and_exec(
        sweep_lambda, problem, args.get("lambda_grid"), SolverConfig(), args["verbose"]
    )
    print_runtime("Sweep", exec_time)
    print(
        f"d in [{curve.d_min:.6f}, {curve.d_max:.6f}], R(d_min) = "
        + tcols.OKGREEN + f"{curve.max_rate / LN2:.6f} bits" + tcols.ENDC
    )
    if curve.rate_floor > 0:
        print_warning(
            f"no zero-rate selection exists; the curve ends at rate {curve.rate_floor:.6f} nats"
        )
    return inst, problem, curve


def _dispersion(args: dict, problem, curve, d: float):
    print_header(f"Tilted information and dispersion at d = {d}")
    result, exec_time = time_and_exec(
        dispersion_at, problem, curve, d, SolverConfig(), verbose=args["verbose"]
    )
    print_runtime("Target-distortion solve", exec_time)
    report = result.report
    print(f"achieved distortion {result.point.avg_distortion:.9f}, lambda* = {report.lambda_star:.6f}")
    print(
        "V = " + tcols.OKGREEN + f"{report.V:.6e}" + tcols.ENDC
        + f" (V_in {report.V_in:.6e}, V_bet {report.V_bet:.6e})"
    )
    if report.zero_dispersion:
        print_warning("zero dispersion, the Gaussian bounds reduce to their first order term")
    return result


def validate(args: dict) -> dict:
    inst = load_instance(args["instance"], validate=False)
    report = validate_instance(inst, raise_on_error=False)
    print(pd.DataFrame(report.rows(), columns=["item", "value"]).to_string(index=False))
    if not report.valid:
        field_name, index, message = report.issues[0]
        raise ValidationError(message, field_name, index, list(report.issues))
    print(tcols.OKGREEN + "Instance is valid. " + tcols.ENDC + tcols.SPARKS)
    return {"validation": report}


def rd_sweep(args: dict) -> dict:
    _, _, curve = _setup(args)
    return {"rd_curve": curve}


def rd_solve(args: dict) -> dict:
    inst, problem, curve = _setup(args)
    print_header(f"Solving at d = {args['target_d']}")
    point = solve_at_distortion(problem, args["target_d"], SolverConfig(), verbose=args["verbose"])
    print(
        f"lambda = {point.lam:.6g}, achieved distortion {point.avg_distortion:.9f}, "
        f"rate {point.rate / LN2:.6f} bits"
    )
    path = save_solution(
        {
            "instance_sha256": file_sha256(args["instance"]),
            "target_d": args["target_d"],
            "point": point,
        },
        args["out"],
    )
    return {"rd_curve": curve, "rd_point": point, "files": [os.path.basename(path)]}


def tilted(args: dict) -> dict:
    _, problem, curve = _setup(args)
    result = _dispersion(args, problem, curve, args["d"])
    return {"rd_curve": curve, "rd_point": result.point, "tilted": result.tilted}


def dispersion(args: dict) -> dict:
    _, problem, curve = _setup(args)
    result = _dispersion(args, problem, curve, args["d"])
    return {
        "rd_curve": curve,
        "rd_point": result.point,
        "tilted": result.tilted,
        "dispersion": result.report,
    }


def _theorem2_reports(args: dict, inst, curve, report, k_values: List[int]) -> list:
    variants = ("asymptotic", "explicit") if args["variant"] == "both" else (args["variant"],)
    reports = []
    for k in k_values:
        for variant in variants:
            converse = theorem2_rate_bound(
                curve, report, k, args["d"], args["eps"], variant, b=inst.bits_per_sample, m=inst.m
            )
            print(
                f"k={k:<6d} {converse.variant:<10s} rate >= "
                + tcols.OKGREEN + f"{converse.bound_value / LN2:.6f} bits" + tcols.ENDC
                + f", labels >= {converse.n}"
            )
            if converse.flags:
                print_warning(", ".join(converse.flags))
            reports.append(converse)
    return reports


def converse(args: dict) -> dict:
    inst, problem, curve = _setup(args)
    theorem = args["theorem"]
    if theorem == "3":
        if args["rate"] is None:
            raise ValidationError("theorem 3 needs --rate", "rate")
        rate = args["rate"] * LN2
        inversion = invert_to_distortion(curve, rate)
        result = _dispersion(args, problem, curve, inversion.distortion)
        reports = [
            theorem3_distortion_bound(
                curve,
                result.report,
                k,
                rate,
                args["eps"],
                args["statement_term"],
                m=inst.m,
                b=inst.bits_per_sample,
            )
            for k in args["k"]
        ]
        for report in reports:
            print(f"k={report.k:<6d} distortion >= " + tcols.OKGREEN + f"{report.bound_value:.6f}" + tcols.ENDC)
        return {"rd_curve": curve, "dispersion": result.report, "converse": reports}

    if args["d"] is None:
        raise ValidationError(f"theorem {theorem} needs --d", "d")
    result = _dispersion(args, problem, curve, args["d"])
    if theorem == "1":
        n_values = args["n"] if args["n"] else list(range(inst.m + 1))
        bounds = theorem1_curve(result.tilted, n_values, inst.bits_per_sample)
        for bound in bounds:
            print(f"n={bound.n:<4d} eps >= " + tcols.OKGREEN + f"{bound.eps_lower:.6f}" + tcols.ENDC)
            if bound.vacuous:
                print_warning(f"the bound is vacuous at n={bound.n}")
        return {
            "rd_curve": curve,
            "tilted": result.tilted,
            "theorem1": bounds,
            "theorem1_d": args["d"],
            "converse": [theorem1_report(curve, result.report, bound, inst.m) for bound in bounds],
        }
    reports = _theorem2_reports(args, inst, curve, result.report, args["k"])
    return {"rd_curve": curve, "dispersion": result.report, "converse": reports}


def oracle(args: dict) -> dict:
    inst = load_instance(args["instance"])
    print_header("Exhaustive enumeration of selection maps")
    report, exec_time = time_and_exec(
        enumerate_selections, inst, args["n"], args["d"], args["eps_grid"] or (), args["k"], args["budget"]
    )
    print_runtime("Enumeration", exec_time)
    print(report.to_frame().to_string(index=False))
    for (d, eps), n_star in sorted(report.n_star.items()):
        print(f"d={d}, eps={eps}: least n = " + tcols.OKGREEN + f"{n_star}" + tcols.ENDC)
    return {"enumeration": report}


def simulate(args: dict) -> dict:
    inst = load_instance(args["instance"])
    problem = point = None
    if args["strategy"] == "per-letter-S*":
        solution = load_solution(args["out"], file_sha256(args["instance"]))
        point = solution["point"]
        problem = build_selection_problem(inst, args["budget"])
    print_header(f"Simulating {args['trials']} blocks of k = {args['k']} pools")
    report, exec_time = time_and_exec(
        simulate_block,
        inst,
        args["strategy"],
        args["k"],
        args["trials"],
        args["seed"],
        args["d"],
        n_per_letter=inst.n if args["n"] is None else args["n"],
        problem=problem,
        point=point,
        n_jobs=args["jobs"],
        budget=args["budget"],
    )
    print_runtime("Simulation", exec_time)
    print(
        f"P[distortion > {report.d}] = " + tcols.OKGREEN + f"{report.excess_prob:.4f}" + tcols.ENDC
        + f" [{report.wilson_low:.4f}, {report.wilson_high:.4f}], rate {report.rate_bits:.4f} bits"
    )
    return {"simulation": [report]}


def report(args: dict) -> dict:
    inst, problem, curve = _setup(args)
    result = _dispersion(args, problem, curve, args["d"])
    print_header("Converse bounds")
    args = dict(args, variant="both")
    reports = _theorem2_reports(args, inst, curve, result.report, args["k_grid"])
    n_values = list(range(inst.m + 1))
    bounds = theorem1_curve(result.tilted, n_values, inst.bits_per_sample)

    results = {
        "rd_curve": curve,
        "rd_point": result.point,
        "dispersion": result.report,
        "converse": [theorem1_report(curve, result.report, b, inst.m) for b in bounds] + reports,
        "theorem1": bounds,
        "theorem1_d": args["d"],
    }
    print_header("Oracles")
    try:
        results["enumeration"] = enumerate_selections(
            inst, n_values[1:], [args["d"]], [args["eps"]], budget=args["budget"]
        )
    except BudgetError as error:
        print_warning(f"skipping the exhaustive enumeration: {error}")
    results["simulation"] = [
        simulate_block(
            inst,
            "per-letter-S*",
            k,
            args["trials"],
            args["seed"],
            args["d"],
            problem=problem,
            point=result.point,
            n_jobs=args["jobs"],
        )
        for k in args["k_grid"]
    ]
    return results


def main(args: dict) -> List[str]:
    """Runs one subcommand and writes its results. The following parameters
    are given through `argparse` and passed in a dictionary format (`args`).

    Parameters
    ----------
    args : dict
        Configuration dictionary, containing the following arguments.
    command: str
        Subcommand to run.
    instance: str
        Path to the JSON instance file.
    out: str
        Output directory.
    seed: int
        Root seed of every random draw.
    budget: int
        Enumeration budget, overriding ``POOLRATE_BUDGET``.
    verbose: bool
        Print solver progress.

    Returns
    -------
    list of str
        Files written to ``args["out"]``.
    """
    switcher = {
        "validate": validate,
        "rd-sweep": rd_sweep,
        "rd-solve": rd_solve,
        "tilted": tilted,
        "dispersion": dispersion,
        "converse": converse,
        "oracle": oracle,
        "simulate": simulate,
        "report": report,
    }
    manifest = RunManifest(
        tool_version=__version__,
        instance_sha256=file_sha256(args["instance"]),
        config=dict(args, solver=SolverConfig().to_dict()),
        seed=args["seed"],
    )
    results = switcher[args["command"]](args)
    return emit_report(results, args["out"], manifest)


def _float_list(text: str) -> List[float]:
    return [float(value) for value in text.split(",") if value.strip()]


def _int_list(text: str) -> List[int]:
    return [int(value) for value in text.split(",") if value.strip()]


def get_arguments(argv: Optional[List[str]] = None) -> dict:
    """Parses command line arguments and gives back a dictionary.

    Returns
    -------
    dict
        Dictionary with the configuration arguments.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("instance", type=str, help="Path to the JSON instance file.")
    common.add_argument("--out", type=str, default="poolrate_out", help="Output directory.")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Root seed.")
    common.add_argument(
        "--budget",
        type=int,
        default=None,
        help="Enumeration budget. Defaults to POOLRATE_BUDGET or 10^6.",
    )
    common.add_argument("--verbose", action="store_true", help="Print solver progress.")
    common.add_argument(
        "--lambda-grid",
        type=_float_list,
        default=None,
        help="Comma separated multipliers of the R(d) sweep.",
    )
    common.add_argument(
        "--jobs", type=int, default=1, help="Parallel workers of the Monte Carlo simulation."
    )

    parser = argparse.ArgumentParser(
        prog="poolrate",
        description="Rate-distortion lower bounds for pool-based active learning.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str):
        return commands.add_parser(
            name,
            parents=[common],
            help=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )

    add("validate", "Validate an instance and print its diagnostics.")
    add("rd-sweep", "Sweep the Lagrange multiplier and write R(d).")
    solve = add("rd-solve", "Solve at a target distortion and save the selection kernel.")
    solve.add_argument("--target-d", type=float, required=True, help="Target distortion.")
    for name, help_text in (
        ("tilted", "Tilted information at a distortion."),
        ("dispersion", "Dispersion and its decomposition at a distortion."),
    ):
        add(name, help_text).add_argument("--d", type=float, required=True, help="Distortion.")

    bound = add("converse", "Evaluate one of the converse bounds.")
    bound.add_argument("--theorem", choices=["1", "2", "3"], required=True)
    bound.add_argument("--k", type=_int_list, default=[100], help="Comma separated block lengths.")
    bound.add_argument("--n", type=_int_list, default=None, help="Comma separated label budgets.")
    bound.add_argument("--eps", type=float, default=0.1, help="Excess-distortion probability.")
    bound.add_argument("--d", type=float, default=None, help="Distortion (theorems 1 and 2).")
    bound.add_argument("--rate", type=float, default=None, help="Label rate in bits per pool (theorem 3).")
    bound.add_argument(
        "--variant", choices=["asymptotic", "explicit", "both"], default="asymptotic"
    )
    bound.add_argument(
        "--statement-term",
        action="store_true",
        help="Add the extra D'(R) summand to the distortion bound.",
    )

    enumerate_ = add("oracle", "Exhaustive search over deterministic selection maps.")
    enumerate_.add_argument("--n", type=_int_list, required=True, help="Comma separated label budgets.")
    enumerate_.add_argument("--d", type=_float_list, required=True, help="Comma separated distortions.")
    enumerate_.add_argument("--k", type=int, default=1, help="Block length.")
    enumerate_.add_argument("--eps-grid", type=_float_list, default=None)

    sim = add("simulate", "Monte Carlo simulation of a selection strategy.")
    sim.add_argument("--k", type=int, required=True, help="Pools per block.")
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--strategy", choices=list(STRATEGIES), required=True)
    sim.add_argument("--d", type=float, required=True, help="Distortion threshold.")
    sim.add_argument("--n", type=int, default=None, help="Labels per pool.")

    bundle = add("report", "Curve, dispersion, converse bounds and oracle overlays.")
    bundle.add_argument("--d", type=float, required=True)
    bundle.add_argument("--eps", type=float, default=0.1)
    bundle.add_argument("--k-grid", type=_int_list, default=[10, 100, 1000])
    bundle.add_argument("--trials", type=int, default=2000)

    args = parser.parse_args(argv)
    return vars(args)


def run_command(argv: Optional[List[str]] = None) -> int:
    """Parses ``argv``, runs the subcommand and returns the exit code:
    0 on success, 2 for invalid input, 3 for solver or pipeline failures and
    4 when an enumeration exceeds its budget.
    """
    try:
        args = get_arguments(argv)
    except SystemExit as error:
        return int(error.code or 0)
    try:
        main(args)
    except Exception as error:
        for errors, code in EXIT_CODES:
            if isinstance(error, errors):
                print_failure(f"{type(error).__name__}: {error}")
                return code
        raise
    return 0


def run():
    sys.exit(run_command())


if __name__ == "__main__":
    run()
