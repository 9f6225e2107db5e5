# Utility methods shared by the poolrate pipelines: enumeration budgets,
# output folders, timing, hashing and persistence of solved points.

import hashlib
import json
import os
from time import perf_counter
from typing import Callable, Tuple

import joblib

from poolrate.exceptions import DependencyError
from poolrate.terminal_enhancer import tcols

BUDGET_ENV = "POOLRATE_BUDGET"
DEFAULT_ENUMERATION_BUDGET = 10**6
DEFAULT_SELECTION_BUDGET = 10**7
SOLUTION_FILE = "solution.joblib"


def enumeration_budget() -> int:
    """Budget on the number of pools, subsets or joint atoms enumerated
    exhaustively. The environment variable ``POOLRATE_BUDGET`` overrides the
    default of 10^6.
    """
    value = os.environ.get(BUDGET_ENV)
    if value is None or value.strip() == "":
        return DEFAULT_ENUMERATION_BUDGET
    return int(float(value))


def selection_budget() -> int:
    """Budget on the number of deterministic selection maps. Defaults to 10^7
    and follows ``POOLRATE_BUDGET`` when that is set.
    """
    value = os.environ.get(BUDGET_ENV)
    if value is None or value.strip() == "":
        return DEFAULT_SELECTION_BUDGET
    return int(float(value))


def create_output_folder(out_path: str) -> str:
    if not os.path.exists(out_path):
        os.makedirs(out_path)
    return out_path


def time_and_exec(func: Callable, *args, **kwargs) -> Tuple[object, float]:
    """Executes the given function with its arguments and times it.

    Parameters
    ----------
    func : Callable
        Function to execute.
    args, kwargs:
        Arguments of the function.

    Returns
    -------
    Tuple
        object
            Whatever ``func`` returns.
        float
            The runtime in seconds.
    """
    time_init = perf_counter()
    result = func(*args, **kwargs)
    exec_time = perf_counter() - time_init
    return result, exec_time


def print_runtime(task: str, exec_time: float):
    print(
        f"{task} completed in: " + tcols.OKGREEN + f"{exec_time:.2e} sec. "
        f"or {exec_time/60:.2e} min. " + tcols.ENDC + tcols.SPARKS
    )


def file_sha256(path: str) -> str:
    """SHA-256 hex digest of the raw bytes of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def config_hash(config: dict) -> str:
    """Short stable hash of a configuration dictionary, recorded in every
    oracle output row.
    """
    payload = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def save_solution(solution: dict, out_dir: str) -> str:
    """Saves a solved point (and the hash of the instance it belongs to) so
    that later pipeline steps can reuse it.

    Parameters
    ----------
    solution : dict
        Dictionary with at least the keys ``"instance_sha256"`` and ``"point"``.
    out_dir : str
        Output directory of the run.

    Returns
    -------
    str
        Path of the written file.
    """
    create_output_folder(out_dir)
    path = os.path.join(out_dir, SOLUTION_FILE)
    joblib.dump(solution, path)
    print("Solved selection kernel saved in: " + tcols.OKCYAN + path + tcols.ENDC)
    return path


def load_solution(out_dir: str, instance_sha256: str = None) -> dict:
    """Loads the solved point written by :func:`save_solution`.

    Raises
    ------
    DependencyError
        If no solution was saved in ``out_dir`` or it was solved for another
        instance file.
    """
    path = os.path.join(out_dir, SOLUTION_FILE)
    if not os.path.exists(path):
        raise DependencyError(
            f"no solved selection kernel in {out_dir}; run `rd-solve` first"
        )
    solution = joblib.load(path)
    if instance_sha256 is not None and solution["instance_sha256"] != instance_sha256:
        raise DependencyError(
            f"the selection kernel in {path} was solved for another instance; "
            "rerun `rd-solve`"
        )
    return solution
