"""Figures for runs and design sheets.

matplotlib is optional (``pip install flywheel-ocs[plot]``) and imported
only when a figure is requested. :func:`gnuplot_script` needs nothing beyond
the CSV it points at.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from . import design
from .harness import CSV_COLUMNS


class PlottingUnavailable(RuntimeError):
    pass


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        raise PlottingUnavailable(
            "matplotlib is not installed; install the 'plot' extra or use --gnuplot"
        ) from None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_run(columns: Mapping[str, np.ndarray], out_dir, stem: str = "run",
             touchdown_time: Optional[float] = None) -> list[Path]:
    """Write ``<stem>_attitude.png``, ``<stem>_wheels.png`` and ``<stem>_momentum.png``.

    ``columns`` is the mapping returned by :func:`harness.read_csv` (or built
    from :func:`harness.trajectory_table`).
    """
    plt = _pyplot()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t = columns["t"]
    paths = []

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for name in ("roll", "pitch", "yaw"):
        ax1.plot(t, np.degrees(columns[name]), label=name)
    ax1.set_ylabel("attitude [deg]")
    ax1.legend(loc="best")
    ax2.plot(t, columns["p_x"], label="CoM x")
    ax2.plot(t, columns["p_z"], label="CoM z")
    ax2.set_ylabel("position [m]")
    ax2.set_xlabel("t [s]")
    ax2.legend(loc="best")
    if touchdown_time is not None:
        for ax in (ax1, ax2):
            ax.axvline(touchdown_time, color="k", lw=0.8, ls="--")
    paths.append(_save(fig, out_dir / f"{stem}_attitude.png", plt))

    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax1.plot(t, columns["gamma_dot_l"], label="left")
    ax1.plot(t, columns["gamma_dot_r"], label="right")
    ax1.set_ylabel("wheel speed [rad/s]")
    ax1.legend(loc="best")
    ax2.plot(t, columns["u_l"], label="left")
    ax2.plot(t, columns["u_r"], label="right")
    ax2.set_ylabel("wheel torque [N m]")
    ax2.set_xlabel("t [s]")
    paths.append(_save(fig, out_dir / f"{stem}_wheels.png", plt))

    fig, ax = plt.subplots(figsize=(7, 3.5))
    for axis in "xyz":
        ax.plot(t, columns[f"L_{axis}"], label=f"L_{axis}")
    ax.set_ylabel("world momentum [kg m^2/s]")
    ax.set_xlabel("t [s]")
    ax.legend(loc="best")
    paths.append(_save(fig, out_dir / f"{stem}_momentum.png", plt))
    return paths


def plot_bound_surface(path, gamma_dot_max=(50.0, 1000.0), delta_theta_dot=(0.0, 10.0), n: int = 60) -> Path:
    """Contour map of the normalized inertia bound I_f / I_r."""
    plt = _pyplot()
    g = np.linspace(*gamma_dot_max, n)
    d = np.linspace(*delta_theta_dot, n)
    G, D = np.meshgrid(g, d)
    Z = np.vectorize(lambda gg, dd: design.min_flywheel_inertia(1.0, dd, gg))(G, D)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    cs = ax.contourf(G, D, Z, levels=20)
    fig.colorbar(cs, ax=ax, label="I_f / I_r")
    ax.set_xlabel("max wheel speed [rad/s]")
    ax.set_ylabel("velocity change [rad/s]")
    return _save(fig, Path(path), plt)


def _save(fig, path: Path, plt) -> Path:
    # fixed metadata keeps files byte-stable between runs
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def gnuplot_script(csv_path, out_png: Optional[str] = None) -> str:
    """gnuplot script plotting pitch, CoM x and wheel speeds from a run CSV."""
    col = {name: i + 1 for i, name in enumerate(CSV_COLUMNS)}
    deg = 180.0 / math.pi
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if out_png:
        lines += ["set terminal pngcairo size 800,900", f"set output '{out_png}'"]
    lines += [
        "set multiplot layout 3,1",
        "set xlabel 't [s]'",
        "set ylabel 'pitch [deg]'",
        f"plot '{csv_path}' using {col['t']}:(${col['pitch']}*{deg!r}) with lines title 'pitch'",
        "set ylabel 'CoM x [m]'",
        f"plot '{csv_path}' using {col['t']}:{col['p_x']} with lines title 'CoM x'",
        "set ylabel 'wheel speed [rad/s]'",
        f"plot '{csv_path}' using {col['t']}:{col['gamma_dot_l']} with lines title 'left', \\",
        f"     '' using {col['t']}:{col['gamma_dot_r']} with lines title 'right'",
        "unset multiplot",
    ]
    return "\n".join(lines) + "\n"
