"""Scenario runs, trajectory CSV, run summaries, comparisons and design sheets."""

from __future__ import annotations

import difflib
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import design
from .dynamics import Q, Trajectory, simulate_flight
from .scenario import Scenario, ScenarioError
from .so3 import error_vector, inertia_tensor

CSV_COLUMNS = (
    "t",
    "p_x", "p_y", "p_z",
    "v_x", "v_y", "v_z",
    "q_w", "q_x", "q_y", "q_z",
    "roll", "pitch", "yaw",
    "omega_x", "omega_y", "omega_z",
    "gamma_dot_l", "gamma_dot_r",
    "u_l", "u_r",
    "L_x", "L_y", "L_z",
)


# -- runs --------------------------------------------------------------------


@dataclass
class RunSummary:
    """Scalar metrics of one run. Angles in rad, rates in rad/s.

    ``touchdown_time`` is ``None`` when the run ended at ``t_max``; the
    ``*_at_touchdown`` entries then describe the final sample.
    """

    scenario: str
    ocs_enabled: bool
    samples: int
    final_time: float
    touchdown_time: Optional[float]
    attitude_at_touchdown: np.ndarray
    omega_at_touchdown: np.ndarray
    max_attitude_error: float
    momentum_drift: float
    wheel_speed_peak: float
    saturation_duty: float

    def to_text(self) -> str:
        lines = []
        for key, value in self.items():
            lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    def items(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "attitude_at_touchdown":
                yield from zip(("attitude_at_touchdown.roll", "attitude_at_touchdown.pitch",
                                "attitude_at_touchdown.yaw"), value)
            elif f.name == "omega_at_touchdown":
                yield from zip(("omega_at_touchdown.x", "omega_at_touchdown.y",
                                "omega_at_touchdown.z"), value)
            else:
                yield f.name, value

    @classmethod
    def from_text(cls, text: str) -> RunSummary:
        raw = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            raw[k] = v
        try:
            return cls(
                scenario=raw["scenario"],
                ocs_enabled=raw["ocs_enabled"] == "true",
                samples=int(raw["samples"]),
                final_time=float(raw["final_time"]),
                touchdown_time=None if raw["touchdown_time"] == "none" else float(raw["touchdown_time"]),
                attitude_at_touchdown=np.array([float(raw[f"attitude_at_touchdown.{a}"])
                                                for a in ("roll", "pitch", "yaw")]),
                omega_at_touchdown=np.array([float(raw[f"omega_at_touchdown.{a}"]) for a in "xyz"]),
                max_attitude_error=float(raw["max_attitude_error"]),
                momentum_drift=float(raw["momentum_drift"]),
                wheel_speed_peak=float(raw["wheel_speed_peak"]),
                saturation_duty=float(raw["saturation_duty"]),
            )
        except KeyError as exc:
            raise ValueError(f"summary is missing key {exc.args[0]!r}") from None

    @classmethod
    def read(cls, path) -> RunSummary:
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def momentum_drift(traj: Trajectory, I_b: np.ndarray) -> float:
    """Largest relative change of world-frame momentum over disturbance-free stretches.

    The reference resets at every sample reached through a disturbed step.
    Normalized by ``max(|L(0)|, lambda_max(I_b) * 1 rad/s)``.
    """
    L = traj.L_world
    if len(L) == 0:
        return 0.0
    scale = max(float(np.linalg.norm(L[0])), float(np.max(np.linalg.eigvalsh(I_b))))
    ref = L[0]
    worst = 0.0
    for k in range(1, len(L)):
        if traj.disturbed[k]:
            ref = L[k]
            continue
        worst = max(worst, float(np.linalg.norm(L[k] - ref)) / scale)
    return worst


def summarize(traj: Trajectory, scenario: Scenario) -> RunSummary:
    rpy = traj.rpy
    ref = scenario.attitude_reference()
    errors = [np.linalg.norm(error_vector(ref.q_fn(t), x[Q])) for t, x in zip(traj.t, traj.x)]
    return RunSummary(
        scenario=scenario.name,
        ocs_enabled=scenario.ocs_enabled,
        samples=len(traj),
        final_time=float(traj.t[-1]),
        touchdown_time=None if traj.touchdown_time is None else float(traj.touchdown_time),
        attitude_at_touchdown=rpy[-1],
        omega_at_touchdown=traj.x[-1, 10:13].copy(),
        max_attitude_error=float(max(errors)),
        momentum_drift=momentum_drift(traj, scenario.robot.I_b),
        wheel_speed_peak=float(np.max(np.abs(traj.x[:, 13:15]))),
        saturation_duty=float(np.mean(traj.saturated)),
    )


def run(scenario: Scenario, ocs_enabled: Optional[bool] = None) -> tuple[Trajectory, RunSummary]:
    """Simulate a scenario, optionally overriding whether the OCS is active.

    Raises:
        SimulationDiverged: propagated from the integrator.
    """
    if ocs_enabled is not None:
        scenario = scenario.with_overrides(ocs_enabled=ocs_enabled)
    traj = simulate_flight(scenario, scenario.controller())
    return traj, summarize(traj, scenario)


# -- CSV ---------------------------------------------------------------------


def trajectory_table(traj: Trajectory) -> np.ndarray:
    """``(N, 24)`` array in :data:`CSV_COLUMNS` order."""
    if len(traj) == 0:
        return np.empty((0, len(CSV_COLUMNS)))
    x = traj.x
    return np.column_stack((
        traj.t, x[:, 0:3], x[:, 3:6], x[:, 6:10], traj.rpy, x[:, 10:13], x[:, 13:15],
        traj.u, traj.L_world,
    ))


def write_csv(traj: Trajectory, path) -> None:
    """Header plus one row per sample; floats in shortest round-trip form."""
    rows = [",".join(CSV_COLUMNS)]
    for row in trajectory_table(traj):
        rows.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a trajectory CSV into a column-name -> array mapping."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]]).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


# -- comparison --------------------------------------------------------------


COMPARED = (
    "touchdown_time",
    "attitude_at_touchdown.roll",
    "attitude_at_touchdown.pitch",
    "attitude_at_touchdown.yaw",
    "max_attitude_error",
    "momentum_drift",
    "wheel_speed_peak",
    "saturation_duty",
)


@dataclass
class Comparison:
    """Metric values per run and their deltas against the first run."""

    scenario: str
    labels: list[str]
    rows: dict[str, list[Optional[float]]] = field(default_factory=dict)

    def delta(self, metric: str, i: int = 1) -> Optional[float]:
        base, other = self.rows[metric][0], self.rows[metric][i]
        if base is None or other is None:
            return None
        return other - base

    def to_text(self) -> str:
        head = ["metric"] + self.labels + [f"delta[{lab}]" for lab in self.labels[1:]]
        table = [head]
        for metric, vals in self.rows.items():
            cells = [metric] + [_cell(v) for v in vals]
            cells += [_cell(self.delta(metric, i)) for i in range(1, len(vals))]
            table.append(cells)
        widths = [max(len(r[c]) for r in table) for c in range(len(head))]
        out = [f"scenario: {self.scenario}"]
        for r in table:
            out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        return "\n".join(out) + "\n"


def _cell(v) -> str:
    return "none" if v is None else f"{v:.6g}"


def compare(summaries: Sequence[RunSummary], labels: Optional[Sequence[str]] = None) -> Comparison:
    """Side-by-side metrics of runs of the same scenario.

    Raises:
        ValueError: fewer than two summaries, or differing scenario names.
    """
    if len(summaries) < 2:
        raise ValueError("compare needs at least two summaries")
    names = {s.scenario for s in summaries}
    if len(names) != 1:
        raise ValueError(f"summaries come from different scenarios: {', '.join(sorted(names))}")
    if labels is None:
        labels = [f"{s.scenario}[ocs={'on' if s.ocs_enabled else 'off'}]" for s in summaries]
    cmp = Comparison(scenario=summaries[0].scenario, labels=list(labels))
    values = [dict(s.items()) for s in summaries]
    for metric in COMPARED:
        cmp.rows[metric] = [None if v[metric] is None else float(v[metric]) for v in values]
    return cmp


# -- design sheet ------------------------------------------------------------


@dataclass(frozen=True)
class DesignInputs:
    """Inputs of a design sheet.

    ``axis`` selects which base inertia the sizing bound uses ("pitch" uses
    I_yy, "roll" I_xx). ``r`` evaluates a given geometry instead of solving
    for the inner radius; ``alpha`` overrides the optimal incident angle.
    """

    inertia: np.ndarray
    delta_theta_dot: float
    gamma_dot_max: float
    R: float
    h: float
    rho: float
    r: Optional[float] = None
    alpha: Optional[float] = None
    axis: str = "pitch"


@dataclass
class DesignReport:
    I_r: float
    delta_theta_dot: float
    gamma_dot_max: float
    I_f_bound: float
    I_f_bound_normalized: float
    I_f_momentum_balance: Optional[float]
    alpha_optimal: float
    alpha: float
    I_spin_required: float
    wheel_required: bool
    flywheel: Optional[design.FlywheelSpec]
    inner_radius_solved: bool

    @property
    def spin_inertia_margin(self) -> Optional[float]:
        if self.flywheel is None or self.I_spin_required == 0.0:
            return None
        return self.flywheel.I_zz / self.I_spin_required

    def items(self):
        yield "robot_inertia", self.I_r
        yield "delta_theta_dot", self.delta_theta_dot
        yield "gamma_dot_max", self.gamma_dot_max
        yield "wheel_required", self.wheel_required
        if not self.wheel_required:
            yield "note", "no wheel required"
        yield "I_f_min", self.I_f_bound
        yield "I_f_min_over_I_r", self.I_f_bound_normalized
        yield "I_f_momentum_balance", self.I_f_momentum_balance
        yield "alpha_optimal_deg", math.degrees(self.alpha_optimal)
        yield "alpha_deg", math.degrees(self.alpha)
        yield "I_spin_per_wheel_required", self.I_spin_required
        if self.flywheel is not None:
            fw = self.flywheel
            yield "flywheel.r", fw.r
            yield "flywheel.r_source", "solved" if self.inner_radius_solved else "given"
            yield "flywheel.R", fw.R
            yield "flywheel.h", fw.h
            yield "flywheel.rho", fw.rho
            yield "flywheel.m", fw.m
            yield "flywheel.I_xx", fw.I_xx
            yield "flywheel.I_yy", fw.I_yy
            yield "flywheel.I_zz", fw.I_zz
            yield "flywheel.spin_inertia_margin", self.spin_inertia_margin

    def to_text(self) -> str:
        return "".join(f"{k} = {_format_value(v)}\n" for k, v in self.items())


def design_report(inputs: DesignInputs) -> DesignReport:
    """Size the wheels: inertia bound, incident angle, per-wheel split and geometry.

    Raises:
        InfeasibleDesignError: if no inner radius reaches the required inertia.
    """
    I = inertia_tensor(inputs.inertia)
    if inputs.axis not in ("pitch", "roll"):
        raise design.DesignError(f"axis must be 'pitch' or 'roll', got {inputs.axis!r}")
    I_r = float(I[1, 1] if inputs.axis == "pitch" else I[0, 0])
    bound = design.min_flywheel_inertia(I_r, inputs.delta_theta_dot, inputs.gamma_dot_max)
    try:
        balance = design.momentum_balance_inertia(I_r, inputs.delta_theta_dot, inputs.gamma_dot_max)
    except design.InfeasibleDesignError:
        balance = None
    alpha_opt = design.optimal_incident_angle(I[0, 0], I[1, 1])
    alpha = alpha_opt if inputs.alpha is None else inputs.alpha
    per_wheel = design.split_inertia(bound, alpha)
    wheel_required = bound > 0.0

    flywheel = None
    solved = False
    if inputs.r is not None:
        flywheel = design.hollow_cylinder_inertia(inputs.r, inputs.R, inputs.h, inputs.rho)
    elif wheel_required:
        r = design.solve_inner_radius(inputs.R, inputs.h, inputs.rho, per_wheel)
        flywheel = design.hollow_cylinder_inertia(r, inputs.R, inputs.h, inputs.rho)
        solved = True

    return DesignReport(
        I_r=I_r,
        delta_theta_dot=abs(inputs.delta_theta_dot),
        gamma_dot_max=inputs.gamma_dot_max,
        I_f_bound=bound,
        I_f_bound_normalized=bound / I_r,
        I_f_momentum_balance=balance,
        alpha_optimal=alpha_opt,
        alpha=alpha,
        I_spin_required=per_wheel,
        wheel_required=wheel_required,
        flywheel=flywheel,
        inner_radius_solved=solved,
    )


_DESIGN_KEYS = {
    "robot.inertia", "targets.delta_theta_dot", "targets.gamma_dot_max", "targets.axis",
    "flywheel.R", "flywheel.h", "flywheel.rho", "flywheel.r", "flywheel.alpha_deg",
}


def parse_design_config(path) -> DesignInputs:
    """Load a design config (TOML). See ``docs/scenario-format.md``.

    Raises:
        FileNotFoundError, ScenarioError.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("", f"{path}: malformed design file: {exc}") from None
    flat = {}
    for section, body in data.items():
        if not isinstance(body, dict):
            raise ScenarioError(section, "expected a [section] table")
        for k, v in body.items():
            flat[f"{section}.{k}"] = v
    for key in flat:
        if key not in _DESIGN_KEYS:
            near = difflib.get_close_matches(key, sorted(_DESIGN_KEYS), n=1, cutoff=0.0)
            raise ScenarioError(key, f"unknown key; nearest valid key is '{near[0]}'")

    def need(key):
        if key not in flat:
            raise ScenarioError(key, "missing required field")
        v = flat[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError(key, "expected a number")
        return float(v)

    if "robot.inertia" not in flat:
        raise ScenarioError("robot.inertia", "missing required field")
    try:
        inertia = inertia_tensor(flat["robot.inertia"])
    except (TypeError, ValueError) as exc:
        raise ScenarioError("robot.inertia", str(exc)) from None
    alpha = flat.get("flywheel.alpha_deg")
    return DesignInputs(
        inertia=inertia,
        delta_theta_dot=need("targets.delta_theta_dot"),
        gamma_dot_max=need("targets.gamma_dot_max"),
        R=need("flywheel.R"),
        h=need("flywheel.h"),
        rho=need("flywheel.rho"),
        r=need("flywheel.r") if "flywheel.r" in flat else None,
        alpha=None if alpha is None else math.radians(float(alpha)),
        axis=flat.get("targets.axis", "pitch"),
    )
