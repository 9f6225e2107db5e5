# Emission of the result bundle of a run: one CSV per result table, the SVG
# charts and the run manifest that ties every file to the instance and the
# configuration it was computed from.

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional

import pandas as pd

from poolrate import plot
from poolrate.converse import bounds as converse_bounds
from poolrate.oracle import simulation
from poolrate.terminal_enhancer import print_warning, tcols
from poolrate.util import config_hash, create_output_folder

MANIFEST_FILE = "manifest.json"
# arguments that do not change any result
UNHASHED_ARGUMENTS = ("instance", "out", "verbose")
CSV_OPTIONS = {"index": False, "sep": ",", "decimal": ".", "lineterminator": "\n"}


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Reproducibility record written next to the outputs of a run.

    Attributes
    ----------
    tool_version : str
    instance_sha256 : str
        SHA-256 of the raw bytes of the instance file, empty when the run had
        no instance file.
    config : dict
        The resolved command line arguments and solver settings.
    seed : int
    started, finished : str
        UTC timestamps in ISO format.
    outputs : list of str
        File names written in the output directory.
    """

    tool_version: str
    instance_sha256: str
    config: dict
    seed: int
    started: str = field(default_factory=timestamp)
    finished: Optional[str] = None
    outputs: List[str] = field(default_factory=list)

    @property
    def run_hash(self) -> str:
        """Hash of everything that determines the results, i.e. the manifest
        without its timestamps, its output list, the instance and output paths
        and the verbosity. Every CSV row carries it.
        """
        config = {k: v for k, v in self.config.items() if k not in UNHASHED_ARGUMENTS}
        return config_hash(
            {"instance_sha256": self.instance_sha256, "config": config, "seed": self.seed}
        )

    def write(self, out_dir: str) -> str:
        """Writes ``manifest.json`` atomically through a temporary file."""
        path = os.path.join(out_dir, MANIFEST_FILE)
        tmp_path = path + ".tmp"
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(asdict(self), handle, indent=2, sort_keys=True, default=str)
            handle.write("\n")
        os.replace(tmp_path, path)
        return path


def write_csv(frame: pd.DataFrame, out_dir: str, name: str, run_hash: str) -> str:
    frame = frame.copy()
    frame["run_hash"] = run_hash
    frame.to_csv(os.path.join(out_dir, name), **CSV_OPTIONS)
    return name


def _rd_curve(curve, out_dir, run_hash, results):
    names = [write_csv(curve.to_frame(), out_dir, "rd_curve.csv", run_hash)]
    names.append(write_csv(curve.diagnostics_frame(), out_dir, "rd_diagnostics.csv", run_hash))
    knots = pd.DataFrame({"d": curve.knots_d, "rate_nats": curve.knots_r})
    names.append(write_csv(knots, out_dir, "rd_envelope.csv", run_hash))
    marker = results.get("rd_point")
    plot.plot_rd_curve(
        curve,
        os.path.join(out_dir, "rd_curve.svg"),
        d_marker=None if marker is None else marker.avg_distortion,
    )
    names.append("rd_curve.svg")
    return names


def _rd_point(point, out_dir, run_hash, results):
    return [write_csv(pd.DataFrame([point.to_row()]), out_dir, "rd_point.csv", run_hash)]


def _tilted(tilted, out_dir, run_hash, results):
    frame = tilted.to_frame()
    frame.insert(0, "lambda_star", tilted.lambda_star)
    frame.insert(0, "d", tilted.d)
    return [write_csv(frame, out_dir, "tilted.csv", run_hash)]


def _dispersion(report, out_dir, run_hash, results):
    names = [write_csv(report.to_frame(), out_dir, "dispersion.csv", run_hash)]
    with open(os.path.join(out_dir, "dispersion.json"), "w", encoding="utf-8", newline="\n") as handle:
        json.dump(dict(report.to_dict(), run_hash=run_hash), handle, indent=2, sort_keys=True)
        handle.write("\n")
    names.append("dispersion.json")
    return names


def _converse(reports, out_dir, run_hash, results):
    names = [write_csv(converse_bounds.reports_to_frame(reports), out_dir, "converse.csv", run_hash)]
    rate_reports = [r for r in reports if r.theorem == "2"]
    if rate_reports:
        plot.plot_converse_vs_k(
            rate_reports, results.get("simulation", ()), os.path.join(out_dir, "converse_vs_k.svg")
        )
        names.append("converse_vs_k.svg")
    return names


def _theorem1(bounds, out_dir, run_hash, results):
    frame = pd.DataFrame([b.to_row() for b in bounds])
    names = [write_csv(frame, out_dir, "theorem1.csv", run_hash)]
    oracle = ()
    enumeration = results.get("enumeration")
    if enumeration is not None and bounds:
        d = results.get("theorem1_d")
        oracle = [r for r in enumeration.records if d is None or r.d == d]
    plot.plot_theorem1_vs_n(bounds, os.path.join(out_dir, "theorem1_vs_n.svg"), oracle=oracle)
    names.append("theorem1_vs_n.svg")
    return names


def _enumeration(report, out_dir, run_hash, results):
    names = [write_csv(report.to_frame(), out_dir, "enumeration.csv", run_hash)]
    if report.n_star:
        names.append(write_csv(report.n_star_frame(), out_dir, "n_star.csv", run_hash))
    return names


def _simulation(reports, out_dir, run_hash, results):
    return [write_csv(simulation.reports_to_frame(reports), out_dir, "simulation.csv", run_hash)]


def _validation(report, out_dir, run_hash, results):
    frame = pd.DataFrame(report.rows(), columns=["item", "value"])
    return [write_csv(frame, out_dir, "validation.csv", run_hash)]


WRITERS = {
    "validation": _validation,
    "rd_curve": _rd_curve,
    "rd_point": _rd_point,
    "tilted": _tilted,
    "dispersion": _dispersion,
    "converse": _converse,
    "theorem1": _theorem1,
    "enumeration": _enumeration,
    "simulation": _simulation,
}


def emit_report(results: Dict[str, object], out_dir: str, manifest: RunManifest) -> List[str]:
    """Writes every available result table and chart plus the manifest.

    Parameters
    ----------
    results : dict
        Pipeline results keyed by ``validation``, ``rd_curve``, ``rd_point``,
        ``tilted``, ``dispersion``, ``converse`` (list of `ConverseReport`),
        ``theorem1`` (list of `EpsilonBound`, with ``theorem1_d`` selecting
        the oracle records to overlay), ``enumeration`` and ``simulation``
        (list of `SimReport`). Missing or empty entries are skipped. ``files``
        lists outputs the pipeline already wrote itself.
    out_dir : str
        Output directory, created if needed.
    manifest : `RunManifest`
        Completed with the output list and the end time, then written.

    Returns
    -------
    list of str
        Names of the written files, the manifest last.

    Raises
    ------
    OSError
        If the directory cannot be created or written.
    """
    create_output_folder(out_dir)
    run_hash = manifest.run_hash
    written = list(results.get("files", ()))
    for key, writer in WRITERS.items():
        value = results.get(key)
        if value is None or (isinstance(value, (list, tuple)) and not value):
            continue
        written.extend(writer(value, out_dir, run_hash, results))
    if not written:
        print_warning("no results to report, writing the manifest only")

    manifest.outputs = sorted(written)
    manifest.finished = timestamp()
    manifest.write(out_dir)
    written.append(MANIFEST_FILE)
    print("Outputs written to: " + tcols.OKCYAN + out_dir + tcols.ENDC)
    return written
