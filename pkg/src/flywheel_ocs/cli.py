"""Command-line entry point: ``flywheel-ocs {run,design,compare,plot}``.

Exit codes: 0 success, 1 validation, 2 divergence, 3 I/O.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .dynamics import SimulationDiverged
from .scenario import load_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    scenario = scenario.with_overrides(dt=args.dt, t_max=args.duration)
    traj, summary = harness.run(scenario, ocs_enabled=False if args.disable_ocs else None)
    text = summary.to_text()
    sys.stdout.write(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        harness.write_csv(traj, out / "trajectory.csv")
        (out / "summary.txt").write_text(text, encoding="utf-8")
        if args.plot:
            from .plotting import plot_run

            cols = dict(zip(harness.CSV_COLUMNS, harness.trajectory_table(traj).T))
            for p in plot_run(cols, out, stem=scenario.name, touchdown_time=traj.touchdown_time):
                print(f"# wrote {p}", file=sys.stderr)
    elif args.plot:
        raise ValueError("--plot needs --out")
    return EXIT_OK


def _cmd_design(args) -> int:
    report = harness.design_report(harness.parse_design_config(args.config))
    text = report.to_text()
    sys.stdout.write(text)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "design.txt").write_text(text, encoding="utf-8")
        if args.plot:
            from .plotting import plot_bound_surface

            p = plot_bound_surface(out / "bound_surface.png")
            print(f"# wrote {p}", file=sys.stderr)
    elif args.plot:
        raise ValueError("--plot needs --out")
    return EXIT_OK


def _cmd_compare(args) -> int:
    summaries = [harness.RunSummary.read(p) for p in args.summaries]
    sys.stdout.write(harness.compare(summaries).to_text())
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plotting import gnuplot_script, plot_run

    if args.gnuplot:
        sys.stdout.write(gnuplot_script(args.csv, args.png))
        return EXIT_OK
    cols = harness.read_csv(args.csv)
    out = Path(args.out) if args.out else Path(args.csv).parent
    for p in plot_run(cols, out, stem=Path(args.csv).stem):
        print(f"# wrote {p}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flywheel-ocs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and print its summary")
    p.add_argument("--scenario", required=True, help="scenario file or bundled name")
    p.add_argument("--out", help="directory for trajectory.csv and summary.txt")
    p.add_argument("--disable-ocs", action="store_true", help="run with the wheels idle")
    p.add_argument("--dt", type=float, help="override integration step, s")
    p.add_argument("--duration", type=float, help="override t_max, s")
    p.add_argument("--plot", action="store_true", help="also write PNG figures (needs matplotlib)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("design", help="size the flywheels from a design file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="directory for design.txt")
    p.add_argument("--plot", action="store_true", help="also write the bound surface figure")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("compare", help="tabulate metric deltas between run summaries")
    p.add_argument("summaries", nargs="+")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("plot", help="render figures from a trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--out", help="output directory (default: next to the CSV)")
    p.add_argument("--gnuplot", action="store_true", help="print a gnuplot script instead")
    p.add_argument("--png", help="with --gnuplot, make the script write this PNG")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
