# Compares the excess-distortion lower bound with the exact optimum over
# deterministic selection maps for every label budget of an instance, and
# checks that no map (deterministic or random) beats the bound.

import argparse
import os

import matplotlib.pyplot as plt
import pandas as pd

from poolrate.converse import theorem1_epsilon_bound
from poolrate.dispersion import dispersion_at
from poolrate.instance import build_selection_problem, load_instance
from poolrate.oracle import converse_dominance, random_kernel_check
from poolrate.rd import SolverConfig, sweep_lambda
from poolrate.report import CSV_OPTIONS
from poolrate.terminal_enhancer import print_header, print_warning, tcols
from poolrate.util import create_output_folder

seed = 12345


def main(args: dict):
    """Runs the bound-against-oracle study. The following parameters are given
    through `argparse` and passed in a dictionary format (`args`) to the
    function.

    Parameters
    ----------
    args : dict
        Configuration dictionary, containing the following arguments.
    instance: str
        Path to the JSON instance file.
    d: list of float
        Distortion thresholds.
    random_trials: int
        Random stochastic kernels drawn per label budget.
    output_folder: str
        Where the table and the chart are saved.
    """
    out_path = create_output_folder(args["output_folder"])
    inst = load_instance(args["instance"])
    # the label bound ranges over every n
    problem = build_selection_problem(inst.with_updates(n=None, selection_mode="any-subset"))
    curve = sweep_lambda(problem, config=SolverConfig())
    n_values = list(range(1, inst.m + 1))

    rows = []
    fig = plt.figure(figsize=(6, 4.5))
    for d in args["d"]:
        print_header(f"d = {d}")
        tilted = dispersion_at(problem, curve, d).tilted

        def bound_for_n(n):
            return theorem1_epsilon_bound(tilted, n, inst.bits_per_sample).eps_lower

        for record in converse_dominance(inst, bound_for_n, n_values, d):
            per_n = build_selection_problem(inst.with_updates(n=record.n, selection_mode="fixed-n"))
            check = random_kernel_check(per_n, d, args["random_trials"], seed)
            rows.append(
                {
                    "d": d,
                    "n": record.n,
                    "eps_lower": record.bound,
                    "min_excess_prob": record.min_excess_prob,
                    "n_maps": record.n_maps,
                    "violations": record.violations,
                    "min_random_kernel": check.min_random,
                }
            )
            status = tcols.OKGREEN + "holds" if record.holds and check.holds else tcols.FAIL + "violated"
            print(
                f"n={record.n}: bound {record.bound:.6f}, best map {record.min_excess_prob:.6f} "
                + status + tcols.ENDC
            )
            if not record.holds:
                print_warning(f"{record.violations} maps fall below the bound at n={record.n}")
        chosen = [row for row in rows if row["d"] == d]
        plt.step([r["n"] for r in chosen], [r["eps_lower"] for r in chosen], where="mid", label=f"bound, d={d}")
        plt.scatter([r["n"] for r in chosen], [r["min_excess_prob"] for r in chosen], label=f"best map, d={d}")

    pd.DataFrame(rows).to_csv(os.path.join(out_path, "converse_study.csv"), **CSV_OPTIONS)
    plt.xlabel("labels n")
    plt.ylabel("excess-distortion probability")
    plt.legend(frameon=False)
    plt.savefig(os.path.join(out_path, "converse_study.pdf"), bbox_inches="tight")
    plt.close(fig)
    print("Study saved in: " + tcols.OKCYAN + out_path + tcols.ENDC + tcols.SPARKS)


def get_arguments() -> dict:
    """Parses command line arguments and gives back a dictionary.

    Returns
    -------
    dict
        Dictionary with the configuration arguments.
    """
    parser = argparse.ArgumentParser(formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--instance", type=str, required=True, help="Path to the JSON instance file.")
    parser.add_argument("--d", type=float, nargs="+", required=True, help="Distortion thresholds.")
    parser.add_argument("--random_trials", type=int, default=200)
    parser.add_argument("--output_folder", type=str, required=True)
    args = parser.parse_args()
    return vars(args)


if __name__ == "__main__":
    args = get_arguments()
    main(args)
