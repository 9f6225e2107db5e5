# JSON encoding of problem instances.
#
# Samples inside explicit algorithm tables are written with symbols, i.e.
# {"dataset": [[x, y], ...], "probs": [...]}, and stored internally with
# alphabet positions.

import json
from typing import Dict, Optional

import numpy as np

from poolrate.exceptions import ValidationError
from poolrate.instance.problem import (
    AlgorithmSpec,
    HypothesisSpec,
    LossSpec,
    ProblemInstance,
    validate_instance,
)
from poolrate.prob import FiniteDist, StochKernel

REQUIRED_KEYS = (
    "x_alphabet",
    "y_alphabet",
    "w_alphabet",
    "h_alphabet",
    "p_w",
    "p_x_given_w",
    "p_y_given_x",
    "hypotheses",
    "algorithm",
    "m",
)
OPTIONAL_KEYS = ("loss", "distortion_mode", "b", "n", "selection_mode")
HYPOTHESIS_KEYS = ("map", "table")
ALGORITHM_KEYS = ("kind", "beta", "explicit_table")
LOSS_KEYS = ("kind", "table")


def _check_keys(obj, allowed, path: str, required=()):
    if not isinstance(obj, dict):
        raise ValidationError("expected a JSON object", path)
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"unknown key {key!r}", path)
    for key in required:
        if key not in obj:
            raise ValidationError(f"missing key {key!r}", path)


def _rewrap(error: ValidationError, field: str, index=None) -> ValidationError:
    inner = error.index if error.index is not None else index
    return ValidationError(error.reason, field, inner)


def _dist(values, field: str, labels) -> FiniteDist:
    try:
        return FiniteDist(np.asarray(values, dtype=float), labels)
    except ValidationError as error:
        raise _rewrap(error, field) from None
    except (TypeError, ValueError) as error:
        raise ValidationError(str(error), field) from None


def _kernel(values, field: str, row_labels, col_labels) -> StochKernel:
    try:
        return StochKernel(np.asarray(values, dtype=float), row_labels, col_labels)
    except ValidationError as error:
        raise _rewrap(error, field) from None
    except (TypeError, ValueError) as error:
        raise ValidationError(str(error), field) from None


def _hypothesis(entry, index: int, x_alphabet, y_alphabet) -> HypothesisSpec:
    _check_keys(entry, HYPOTHESIS_KEYS, f"hypotheses[{index}]")
    if "map" in entry and "table" not in entry:
        return HypothesisSpec(map=tuple(entry["map"]))
    if "table" in entry and "map" not in entry:
        try:
            table = StochKernel(np.asarray(entry["table"], dtype=float), x_alphabet, y_alphabet)
        except ValidationError as error:
            raise ValidationError(error.reason, "hypotheses", index) from None
        return HypothesisSpec(table=table)
    raise ValidationError("give exactly one of 'map' or 'table'", "hypotheses", index)


def _algorithm(entry, x_alphabet, y_alphabet) -> AlgorithmSpec:
    _check_keys(entry, ALGORITHM_KEYS, "algorithm", required=("kind",))
    table = None
    if "explicit_table" in entry:
        table = {}
        for i, row in enumerate(entry["explicit_table"]):
            _check_keys(row, ("dataset", "probs"), f"algorithm.explicit_table[{i}]", ("dataset", "probs"))
            try:
                key = tuple(
                    sorted((x_alphabet.index(x), y_alphabet.index(y)) for x, y in row["dataset"])
                )
            except ValueError:
                raise ValidationError("sample outside the alphabets", "algorithm", i) from None
            table[key] = np.asarray(row["probs"], dtype=float)
    beta = entry.get("beta")
    return AlgorithmSpec(
        kind=entry["kind"], explicit_table=table, beta=None if beta is None else float(beta)
    )


def _loss(entry) -> LossSpec:
    _check_keys(entry, LOSS_KEYS, "loss", required=("kind",))
    table = entry.get("table")
    return LossSpec(entry["kind"], None if table is None else np.asarray(table, dtype=float))


def instance_from_dict(data: Dict) -> ProblemInstance:
    """Builds an instance from its JSON dictionary.

    Unknown keys are rejected at every level. Probability vectors within
    1e-9 of summing to one are renormalised.

    Raises
    ------
    ValidationError
        Naming the offending field and, where relevant, the row or index.
    """
    _check_keys(data, REQUIRED_KEYS + OPTIONAL_KEYS, "instance", REQUIRED_KEYS)
    alphabets = {
        key: tuple(data[key]) for key in ("x_alphabet", "y_alphabet", "w_alphabet", "h_alphabet")
    }
    x_alphabet, y_alphabet = alphabets["x_alphabet"], alphabets["y_alphabet"]
    hypotheses = data["hypotheses"]
    if not isinstance(hypotheses, list):
        raise ValidationError("expected a list aligned with h_alphabet", "hypotheses")

    return ProblemInstance(
        x_alphabet=x_alphabet,
        y_alphabet=y_alphabet,
        w_alphabet=alphabets["w_alphabet"],
        h_alphabet=alphabets["h_alphabet"],
        p_w=_dist(data["p_w"], "p_w", alphabets["w_alphabet"]),
        p_x_given_w=_kernel(data["p_x_given_w"], "p_x_given_w", alphabets["w_alphabet"], x_alphabet),
        p_y_given_x=_kernel(data["p_y_given_x"], "p_y_given_x", x_alphabet, y_alphabet),
        hypotheses=tuple(
            _hypothesis(entry, i, x_alphabet, y_alphabet) for i, entry in enumerate(hypotheses)
        ),
        algorithm=_algorithm(data["algorithm"], x_alphabet, y_alphabet),
        loss=_loss(data.get("loss", {"kind": "zero-one"})),
        distortion_mode=data.get("distortion_mode", "expected-loss"),
        m=int(data["m"]),
        b=None if data.get("b") is None else float(data["b"]),
        n=None if data.get("n") is None else int(data["n"]),
        selection_mode=data.get("selection_mode", "fixed-n"),
    )


def instance_to_dict(inst: ProblemInstance) -> Dict:
    """Inverse of :func:`instance_from_dict`."""
    hypotheses = []
    for hypothesis in inst.hypotheses:
        if hypothesis.map is not None:
            hypotheses.append({"map": list(hypothesis.map)})
        else:
            hypotheses.append({"table": hypothesis.table.rows.tolist()})
    algorithm = {"kind": inst.algorithm.kind}
    if inst.algorithm.beta is not None:
        algorithm["beta"] = inst.algorithm.beta
    if inst.algorithm.explicit_table is not None:
        algorithm["explicit_table"] = [
            {
                "dataset": [[inst.x_alphabet[x], inst.y_alphabet[y]] for x, y in key],
                "probs": np.asarray(probs, dtype=float).tolist(),
            }
            for key, probs in sorted(inst.algorithm.explicit_table.items())
        ]
    loss = {"kind": inst.loss.kind}
    if inst.loss.table is not None:
        loss["table"] = np.asarray(inst.loss.table).tolist()

    data = {
        "x_alphabet": list(inst.x_alphabet),
        "y_alphabet": list(inst.y_alphabet),
        "w_alphabet": list(inst.w_alphabet),
        "h_alphabet": list(inst.h_alphabet),
        "p_w": inst.p_w.weights.tolist(),
        "p_x_given_w": inst.p_x_given_w.rows.tolist(),
        "p_y_given_x": inst.p_y_given_x.rows.tolist(),
        "hypotheses": hypotheses,
        "algorithm": algorithm,
        "loss": loss,
        "distortion_mode": inst.distortion_mode,
        "m": inst.m,
        "selection_mode": inst.selection_mode,
    }
    if inst.b is not None:
        data["b"] = inst.b
    if inst.n is not None:
        data["n"] = inst.n
    return data


def load_instance(path: str, validate: bool = True) -> ProblemInstance:
    """Reads an instance from a JSON file and, unless ``validate`` is False,
    checks it with :func:`validate_instance`.

    Raises
    ------
    ValidationError
        On malformed JSON (with line and column) or an invalid instance.
    """
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ValidationError(
            f"parse error at line {error.lineno} column {error.colno}: {error.msg}", "json"
        ) from None
    inst = instance_from_dict(data)
    if validate:
        validate_instance(inst)
    return inst


def save_instance(inst: ProblemInstance, path: str, indent: Optional[int] = 2) -> str:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(instance_to_dict(inst), handle, indent=indent)
        handle.write("\n")
    return path
