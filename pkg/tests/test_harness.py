import math
from pathlib import Path

import numpy as np
import pytest

from conftest import REF_WHEEL, REF_WHEEL_TABULATED
from flywheel_ocs import cli
from flywheel_ocs.design import InfeasibleDesignError
from flywheel_ocs.dynamics import Trajectory
from flywheel_ocs.harness import (
    CSV_COLUMNS,
    DesignInputs,
    RunSummary,
    compare,
    design_report,
    parse_design_config,
    read_csv,
    run,
    trajectory_table,
    write_csv,
)
from flywheel_ocs.scenario import ScenarioError, load_scenario

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def test2_runs():
    sc = load_scenario("test2_fall")
    return run(sc, ocs_enabled=False), run(sc, ocs_enabled=True)


class TestRun:
    def test_ocs_off_keeps_attitude(self, test2_runs):
        (_, off), _ = test2_runs
        assert math.degrees(off.attitude_at_touchdown[1]) == pytest.approx(30.0, abs=1e-6)
        assert not off.ocs_enabled and off.wheel_speed_peak == 0.0

    def test_ocs_on_levels_base(self, test2_runs):
        _, (_, on) = test2_runs
        assert abs(math.degrees(on.attitude_at_touchdown[1])) < 2.0
        assert on.touchdown_time == pytest.approx(0.4515, abs=1e-3)

    def test_summary_fields(self, test2_runs):
        _, (traj, s) = test2_runs
        assert s.samples == len(traj) and s.final_time == traj.t[-1]
        assert 0.0 <= s.saturation_duty <= 1.0
        assert s.max_attitude_error == pytest.approx(math.radians(30), rel=1e-12)

    def test_test1_on_off(self):
        sc = load_scenario("test1_disturbance")
        _, off = run(sc, ocs_enabled=False)
        _, on = run(sc)
        assert np.max(np.abs(np.degrees(on.attitude_at_touchdown))) < 2.0
        assert np.degrees(off.attitude_at_touchdown[1]) > 10.0


class TestSummaryText:
    def test_roundtrip(self, test2_runs):
        _, (_, s) = test2_runs
        back = RunSummary.from_text(s.to_text())
        assert back.to_text() == s.to_text()
        assert np.array_equal(back.attitude_at_touchdown, s.attitude_at_touchdown)

    def test_none_touchdown(self, test2_runs):
        _, (_, s) = test2_runs
        text = s.to_text().replace(f"touchdown_time = {s.touchdown_time!r}", "touchdown_time = none")
        assert RunSummary.from_text(text).touchdown_time is None

    def test_missing_key(self):
        with pytest.raises(ValueError, match="missing key"):
            RunSummary.from_text("scenario = x\n")

    def test_bad_line(self):
        with pytest.raises(ValueError, match="line 1"):
            RunSummary.from_text("garbage\n")


class TestCsv:
    def test_roundtrip_bit_exact(self, tmp_path, test2_runs):
        _, (traj, _) = test2_runs
        write_csv(traj, tmp_path / "t.csv")
        cols = read_csv(tmp_path / "t.csv")
        assert list(cols) == list(CSV_COLUMNS)
        table = trajectory_table(traj)
        for i, name in enumerate(CSV_COLUMNS):
            assert np.array_equal(cols[name], table[:, i]), name

    def test_empty_trajectory(self, tmp_path):
        empty = Trajectory(np.empty(0), np.empty((0, 17)), np.empty((0, 2)), np.empty(0, bool),
                           np.empty(0, bool), np.empty((0, 3)))
        write_csv(empty, tmp_path / "e.csv")
        assert (tmp_path / "e.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
        assert len(read_csv(tmp_path / "e.csv")["t"]) == 0

    def test_unit_quaternions(self, test2_runs):
        _, (traj, _) = test2_runs
        table = trajectory_table(traj)
        assert np.max(np.abs(np.linalg.norm(table[:, 7:11], axis=1) - 1.0)) <= 1e-9

    def test_test3_row_count(self, tmp_path):
        traj, _ = run(load_scenario("test3_backflip_lunar"))
        write_csv(traj, tmp_path / "t3.csv")
        lines = (tmp_path / "t3.csv").read_text().splitlines()
        assert len(lines) == 1 + 2001

    def test_bad_header(self, tmp_path):
        (tmp_path / "x.csv").write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_csv(tmp_path / "x.csv")


class TestCompare:
    def test_identical_runs(self, test2_runs):
        _, (_, s) = test2_runs
        cmp = compare([s, s])
        assert all(cmp.delta(m) in (0.0, None) for m in cmp.rows)

    def test_on_off_pitch_delta(self, test2_runs):
        (_, off), (_, on) = test2_runs
        cmp = compare([off, on])
        assert 28.0 <= -math.degrees(cmp.delta("attitude_at_touchdown.pitch")) <= 30.0
        assert off.momentum_drift <= 1e-6 and on.momentum_drift <= 1e-6
        assert "delta" in cmp.to_text()

    def test_mismatched_names(self, test2_runs):
        _, (_, s) = test2_runs
        other = RunSummary.from_text(s.to_text().replace("test2_fall", "other"))
        with pytest.raises(ValueError, match="different scenarios"):
            compare([s, other])

    def test_needs_two(self, test2_runs):
        _, (_, s) = test2_runs
        with pytest.raises(ValueError):
            compare([s])


class TestDesignReport:
    def inputs(self, **kw):
        args = dict(inertia=np.array([0.025, 0.0298, 0.045]), delta_theta_dot=2.2, gamma_dot_max=600.0,
                    R=REF_WHEEL["R"], h=REF_WHEEL["h"], rho=REF_WHEEL["rho"])
        args.update(kw)
        return DesignInputs(**args)

    def test_reference_wheel_sheet(self):
        rep = design_report(self.inputs(r=REF_WHEEL["r"]))
        for key, ref in REF_WHEEL_TABULATED.items():
            assert getattr(rep.flywheel, key) == pytest.approx(ref, rel=0.05)
        assert math.degrees(rep.alpha_optimal) == pytest.approx(40.0, abs=0.01)
        assert not rep.inner_radius_solved

    def test_solved_radius_meets_requirement(self):
        rep = design_report(self.inputs(delta_theta_dot=1.5))
        assert rep.inner_radius_solved
        assert rep.flywheel.I_zz == pytest.approx(rep.I_spin_required, rel=1e-10)
        assert rep.I_spin_required == pytest.approx(rep.I_f_bound / (2 * math.cos(rep.alpha)), rel=1e-15)

    def test_no_wheel_required(self):
        rep = design_report(self.inputs(delta_theta_dot=0.0))
        assert rep.I_f_bound == 0.0 and not rep.wheel_required
        assert "no wheel required" in rep.to_text()
        assert rep.flywheel is None

    def test_symmetric_inertia(self):
        rep = design_report(self.inputs(inertia=np.array([0.03, 0.03, 0.05])))
        assert math.degrees(rep.alpha_optimal) == pytest.approx(45.0, abs=1e-12)

    def test_infeasible(self):
        with pytest.raises(InfeasibleDesignError):
            design_report(self.inputs(delta_theta_dot=10.0))

    def test_config_file(self):
        inputs = parse_design_config(ROOT / "configs" / "reference_wheel.design")
        assert inputs.r == REF_WHEEL["r"] and inputs.alpha is None

    @pytest.mark.parametrize(
        "text, field",
        [
            ("[robot]\ninertia=[1,1,1]\n[targets]\ndelta_theta_dot=1\ngamma_dot_max=10\n[flywheel]\nR=1\nh=1\n", "flywheel.rho"),
            ("[robot]\ninertia=[1,1,1]\nmas=1\n", "robot.mas"),
            ("[robot]\ninertia=[1,-1,1]\n", "robot.inertia"),
        ],
    )
    def test_config_errors(self, tmp_path, text, field):
        path = tmp_path / "d.design"
        path.write_text(text)
        with pytest.raises(ScenarioError) as info:
            parse_design_config(path)
        assert info.value.field == field


class TestCli:
    def test_run_writes_outputs(self, tmp_path, capsys):
        assert cli.main(["run", "--scenario", "test2_fall", "--out", str(tmp_path / "on")]) == 0
        out = capsys.readouterr().out
        assert "touchdown_time" in out
        assert (tmp_path / "on" / "trajectory.csv").exists()
        assert (tmp_path / "on" / "summary.txt").read_text() == out

    def test_compare_on_off(self, tmp_path, capsys):
        cli.main(["run", "--scenario", "test2_fall", "--out", str(tmp_path / "on")])
        cli.main(["run", "--scenario", "test2_fall", "--disable-ocs", "--out", str(tmp_path / "off")])
        capsys.readouterr()
        assert cli.main(["compare", str(tmp_path / "off" / "summary.txt"), str(tmp_path / "on" / "summary.txt")]) == 0
        assert "attitude_at_touchdown.pitch" in capsys.readouterr().out

    def test_overrides(self, capsys):
        assert cli.main(["run", "--scenario", "test3_backflip_lunar", "--dt", "0.01", "--duration", "0.5"]) == 0
        summary = RunSummary.from_text(capsys.readouterr().out)
        assert summary.samples == 51

    def test_validation_exit(self, capsys):
        assert cli.main(["run", "--scenario", "test2_fall", "--dt", "0"]) == cli.EXIT_VALIDATION
        assert "integration.dt" in capsys.readouterr().err

    def test_io_exit(self, tmp_path):
        assert cli.main(["run", "--scenario", str(tmp_path / "missing.scenario")]) == cli.EXIT_IO
        assert cli.main(["compare", str(tmp_path / "a.txt"), str(tmp_path / "b.txt")]) == cli.EXIT_IO

    def test_divergence_exit(self, tmp_path):
        text = (ROOT / "src/flywheel_ocs/scenarios/test2_fall.scenario").read_text()
        text = text.replace("kd = [35.0, 35.0, 0.0]", "kd = [1e300, 1e300, 0.0]")
        text = text.replace("tau_max = 0.5", "tau_max = 1e300")
        text = text.replace("gamma_dot_max = 2000.0", "gamma_dot_max = 1e300")
        path = tmp_path / "blow.scenario"
        path.write_text(text)
        assert cli.main(["run", "--scenario", str(path)]) == cli.EXIT_DIVERGED

    def test_design(self, capsys):
        assert cli.main(["design", "--config", str(ROOT / "configs" / "reference_wheel.design")]) == 0
        assert "flywheel.I_zz" in capsys.readouterr().out

    def test_design_infeasible(self, tmp_path, capsys):
        text = (ROOT / "configs" / "reference_wheel.design").read_text().replace("r = 2.20e-2", "# r")
        text = text.replace("delta_theta_dot = 2.2", "delta_theta_dot = 9.0")
        (tmp_path / "d.design").write_text(text)
        assert cli.main(["design", "--config", str(tmp_path / "d.design")]) == cli.EXIT_VALIDATION
        assert "feasible interval" in capsys.readouterr().err

    def test_gnuplot(self, tmp_path, capsys):
        cli.main(["run", "--scenario", "test2_fall", "--out", str(tmp_path)])
        capsys.readouterr()
        assert cli.main(["plot", str(tmp_path / "trajectory.csv"), "--gnuplot"]) == 0
        script = capsys.readouterr().out
        assert "set datafile separator ','" in script and "trajectory.csv" in script

    def test_plot_without_out(self):
        assert cli.main(["run", "--scenario", "test2_fall", "--plot"]) == cli.EXIT_VALIDATION
