# Figures of the report bundle: the rate-distortion curve, the second-order
# label-rate bound against the block length, and the excess-probability bound
# against the number of labels. Output is SVG without timestamps.

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SVG_SETTINGS = {"svg.hashsalt": "poolrate", "svg.fonttype": "path"}


def _save(fig, path: str):
    plt.savefig(path, format="svg", bbox_inches="tight", metadata={"Date": None})
    plt.close(fig)


def plot_rd_curve(curve, path: str, d_marker: Optional[float] = None):
    """Solved points and the lower convex envelope of R(d) in bits."""
    with plt.rc_context(SVG_SETTINGS):
        fig = plt.figure(figsize=(6, 4.5))
        d = [p.avg_distortion for p in curve.points]
        r = [p.rate / np.log(2.0) for p in curve.points]
        plt.plot(curve.knots_d, curve.knots_r / np.log(2.0), linewidth=1.5, label="envelope")
        plt.scatter(d, r, s=14, color="black", zorder=3, label="solved points")
        if d_marker is not None:
            plt.axvline(d_marker, color="grey", linestyle="--", linewidth=1.0)
        plt.xlabel("average distortion d")
        plt.ylabel("R(d) [bits per pool]")
        plt.legend(frameon=False)
        _save(fig, path)


def plot_converse_vs_k(reports: Sequence, simulations: Sequence, path: str):
    """Rate lower bound against k, with simulated label rates overlaid."""
    with plt.rc_context(SVG_SETTINGS):
        fig = plt.figure(figsize=(6, 4.5))
        for variant in ("asymptotic", "explicit"):
            chosen = sorted((r for r in reports if r.variant == variant), key=lambda r: r.k)
            if chosen:
                plt.plot(
                    [r.k for r in chosen],
                    [r.bound_value / np.log(2.0) for r in chosen],
                    marker="o",
                    linewidth=1.5,
                    label=f"{variant} bound",
                )
        if reports:
            plt.axhline(reports[0].R_nats / np.log(2.0), color="grey", linestyle="--", label="R(d)")
        if simulations:
            plt.scatter(
                [s.k for s in simulations],
                [s.rate_bits for s in simulations],
                color="black",
                marker="x",
                zorder=3,
                label="simulated",
            )
        plt.xscale("log")
        plt.xlabel("block length k")
        plt.ylabel("label rate [bits per pool]")
        plt.legend(frameon=False)
        _save(fig, path)


def plot_theorem1_vs_n(bounds: Sequence, path: str, oracle: Sequence = ()):
    """Excess-probability lower bound against n, with exact optima overlaid."""
    with plt.rc_context(SVG_SETTINGS):
        fig = plt.figure(figsize=(6, 4.5))
        plt.step([b.n for b in bounds], [b.eps_lower for b in bounds], where="mid", label="lower bound")
        if oracle:
            plt.scatter(
                [r.n for r in oracle],
                [r.min_excess_prob for r in oracle],
                color="black",
                zorder=3,
                label="best deterministic map",
            )
        plt.ylim(-0.02, 1.02)
        plt.xlabel("labels n")
        plt.ylabel("excess-distortion probability")
        plt.legend(frameon=False)
        _save(fig, path)
