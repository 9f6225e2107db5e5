# Sweeps the rate-distortion function of an instance for several pool sizes
# and label budgets and saves the curves side by side, one CSV per setting
# and a common chart.

import argparse
import os

import matplotlib.pyplot as plt
import numpy as np

from poolrate.instance import build_selection_problem, load_instance
from poolrate.rd import SolverConfig, sweep_lambda
from poolrate.report import CSV_OPTIONS
from poolrate.terminal_enhancer import print_header, tcols
from poolrate.util import create_output_folder, print_runtime, time_and_exec


def main(args: dict):
    """Solves R(d) for every pool size and label budget given. The following
    parameters are given through `argparse` and passed in a dictionary format
    (`args`) to the function.

    Parameters
    ----------
    args : dict
        Configuration dictionary, containing the following arguments.
    instance: str
        Path to the JSON instance file.
    m: list of int
        Pool sizes to sweep.
    n: list of int
        Label budgets per pool. Empty for the any-subset mode.
    lambda_points: int
        Number of log-spaced multipliers in [1e-3, 1e4].
    output_folder: str
        Where the CSV files and the chart are saved.
    """
    out_path = create_output_folder(args["output_folder"])
    inst = load_instance(args["instance"])
    grid = np.concatenate([[0.0], np.logspace(-3, 4, args["lambda_points"])])
    settings = [(m, n) for m in args["m"] for n in (args["n"] or [None]) if n is None or n <= m]

    fig = plt.figure(figsize=(6, 4.5))
    for m, n in settings:
        label = f"m={m}, " + ("any subset" if n is None else f"n={n}")
        print_header(label)
        variant = inst.with_updates(
            m=m, n=n, selection_mode="any-subset" if n is None else "fixed-n"
        )
        problem = build_selection_problem(variant)
        curve, exec_time = time_and_exec(sweep_lambda, problem, grid, SolverConfig())
        print_runtime("Sweep", exec_time)
        print("R(d_min) = " + tcols.OKGREEN + f"{curve.max_rate / np.log(2):.6f} bits" + tcols.ENDC)

        frame = curve.to_frame()
        frame.insert(0, "n", n)
        frame.insert(0, "m", m)
        name = f"rd_curve_m{m}_" + ("any" if n is None else f"n{n}") + ".csv"
        frame.to_csv(os.path.join(out_path, name), **CSV_OPTIONS)
        plt.plot(curve.knots_d, curve.knots_r / np.log(2), linewidth=1.5, label=label)

    plt.xlabel("average distortion d")
    plt.ylabel("R(d) [bits per pool]")
    plt.legend(frameon=False)
    plt.savefig(os.path.join(out_path, "rd_curves.pdf"), bbox_inches="tight")
    plt.close(fig)
    print("Curves saved in: " + tcols.OKCYAN + out_path + tcols.ENDC + tcols.SPARKS)


def get_arguments() -> dict:
    """Parses command line arguments and gives back a dictionary.

    Returns
    -------
    dict
        Dictionary with the configuration arguments.
    """
    parser = argparse.ArgumentParser(formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--instance", type=str, required=True, help="Path to the JSON instance file.")
    parser.add_argument("--m", type=int, nargs="+", default=[1, 2, 3], help="Pool sizes.")
    parser.add_argument(
        "--n",
        type=int,
        nargs="*",
        default=[],
        help="Label budgets per pool. Leave empty to select any subset.",
    )
    parser.add_argument("--lambda_points", type=int, default=25)
    parser.add_argument("--output_folder", type=str, required=True)
    args = parser.parse_args()
    return vars(args)


if __name__ == "__main__":
    args = get_arguments()
    main(args)
