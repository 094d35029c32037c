"""Scenario files: TOML with one table per section, validated field by field.

Angles are given in degrees in the file and converted to radians here.
See ``docs/scenario-format.md`` for the annotated reference.
"""

from __future__ import annotations

import difflib
import math
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .control import ALLOCATION_MODES, AttitudeController, AttitudeReference, Gains
from .control import backflip_reference, setpoint_reference
from .design import OcsParams
from .dynamics import BodyState, DisturbancePulse, RobotParams
from .so3 import Quaternion, inertia_tensor

BUNDLED = ("test1_disturbance", "test2_fall", "test3_backflip_lunar", "beanie_bound")


class ScenarioError(ValueError):
    """Invalid scenario file; ``field`` names the offending dotted key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


# -- field schema -----------------------------------------------------------

_REQUIRED = object()


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError("expected a number")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _positive(v):
    v = _number(v)
    if v <= 0.0:
        raise ValueError(f"must be > 0 (got {v:g})")
    return v


def _non_negative(v):
    v = _number(v)
    if v < 0.0:
        raise ValueError(f"must be >= 0 (got {v:g})")
    return v


def _vector(n):
    def check(v):
        if not isinstance(v, list) or len(v) != n:
            raise TypeError(f"expected a list of {n} numbers")
        return np.array([_number(c) for c in v])
    return check


def _inertia(v):
    if isinstance(v, list) and len(v) == 3 and all(isinstance(r, list) for r in v):
        a = np.array([_vector(3)(r) for r in v])
    else:
        a = _vector(3)(v)
    return inertia_tensor(a)


def _choice(*options):
    def check(v):
        if v not in options:
            raise ValueError(f"must be one of {', '.join(map(repr, options))} (got {v!r})")
        return v
    return check


def _string(v):
    if not isinstance(v, str) or not v:
        raise TypeError("expected a non-empty string")
    return v


def _boolean(v):
    if not isinstance(v, bool):
        raise TypeError("expected true or false")
    return v


def _alpha(v):
    v = _number(v)
    if not 0.0 <= v <= 90.0:
        raise ValueError(f"must lie in [0, 90] degrees (got {v:g})")
    return v


# dotted key -> (validator, default)
SCHEMA: dict[str, tuple[Callable[[Any], Any], Any]] = {
    "name": (_string, _REQUIRED),
    "robot.mass": (_positive, _REQUIRED),
    "robot.inertia": (_inertia, _REQUIRED),
    "robot.gravity": (_vector(3), [0.0, 0.0, -9.81]),
    "ocs.enabled": (_boolean, True),
    "ocs.alpha_deg": (_alpha, _REQUIRED),
    "ocs.wheel_spin_inertia": (_positive, _REQUIRED),
    "ocs.wheel_transverse_inertia": (_non_negative, None),
    "ocs.allocation": (_choice(*ALLOCATION_MODES), "transpose"),
    "limits.tau_max": (_positive, _REQUIRED),
    "limits.gamma_dot_max": (_positive, _REQUIRED),
    "initial.position": (_vector(3), _REQUIRED),
    "initial.velocity": (_vector(3), [0.0, 0.0, 0.0]),
    "initial.rpy_deg": (_vector(3), [0.0, 0.0, 0.0]),
    "initial.omega": (_vector(3), [0.0, 0.0, 0.0]),
    "initial.wheel_speeds": (_vector(2), [0.0, 0.0]),
    "disturbance.t_start": (_non_negative, None),
    "disturbance.duration": (_non_negative, None),
    "disturbance.torque": (_vector(3), None),
    "reference.type": (_choice("setpoint", "backflip"), "setpoint"),
    "reference.rpy_deg": (_vector(3), [0.0, 0.0, 0.0]),
    "reference.total_angle_deg": (_number, None),
    "reference.t_ramp": (_positive, None),
    "reference.t_start": (_non_negative, 0.0),
    "gains.kp": (_vector(3), None),
    "gains.kd": (_vector(3), None),
    "integration.dt": (_positive, 0.001),
    "integration.t_max": (_positive, _REQUIRED),
    "touchdown.plane_height": (_number, 0.0),
}


def _flatten(d: dict, prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _nearest(key: str) -> str:
    valid = list(SCHEMA)
    leaf = key.rsplit(".", 1)[-1]
    by_leaf = {k.rsplit(".", 1)[-1]: k for k in valid}
    best = difflib.get_close_matches(leaf, list(by_leaf), n=1, cutoff=0.0)
    return by_leaf[best[0]] if best else valid[0]


# -- scenario model ---------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """Validated scenario. Angles are stored in radians."""

    name: str
    robot: RobotParams
    position: np.ndarray
    velocity: np.ndarray
    rpy: np.ndarray
    omega: np.ndarray
    wheel_speeds: np.ndarray
    disturbance: Optional[DisturbancePulse]
    reference_type: str
    reference_rpy: np.ndarray
    total_angle: float
    t_ramp: float
    t_ramp_start: float
    gains: Gains
    dt: float
    t_max: float
    plane_height: float
    ocs_enabled: bool
    allocation: str

    def initial_state(self) -> BodyState:
        return BodyState(
            p=self.position,
            v=self.velocity,
            q=Quaternion.from_rpy(*self.rpy),
            omega_r=self.omega,
            gamma_dot_l=float(self.wheel_speeds[0]),
            gamma_dot_r=float(self.wheel_speeds[1]),
        )

    def attitude_reference(self) -> AttitudeReference:
        if self.reference_type == "backflip":
            return backflip_reference(self.total_angle, self.t_ramp, self.t_ramp_start)
        return setpoint_reference(Quaternion.from_rpy(*self.reference_rpy))

    def controller(self) -> Optional[AttitudeController]:
        if not self.ocs_enabled:
            return None
        return AttitudeController(self.gains, self.attitude_reference(), self.robot, self.allocation)

    def with_overrides(
        self,
        *,
        dt: Optional[float] = None,
        t_max: Optional[float] = None,
        ocs_enabled: Optional[bool] = None,
    ) -> Scenario:
        changes: dict[str, Any] = {}
        if dt is not None:
            if not dt > 0.0:
                raise ScenarioError("integration.dt", f"must be > 0 (got {dt:g})")
            changes["dt"] = dt
        if t_max is not None:
            changes["t_max"] = t_max
        if ocs_enabled is not None:
            changes["ocs_enabled"] = ocs_enabled
        out = replace(self, **changes)
        if out.t_max < out.dt:
            raise ScenarioError("integration.t_max", f"must be >= integration.dt ({out.dt:g})")
        return out


def scenario_from_dict(data: dict) -> Scenario:
    flat = _flatten(data)
    for key in flat:
        if key not in SCHEMA:
            raise ScenarioError(key, f"unknown key; nearest valid key is '{_nearest(key)}'")

    values: dict[str, Any] = {}
    for key, (check, default) in SCHEMA.items():
        if key in flat:
            try:
                values[key] = check(flat[key])
            except (TypeError, ValueError) as exc:
                raise ScenarioError(key, str(exc)) from None
        elif default is _REQUIRED:
            raise ScenarioError(key, "missing required field")
        else:
            values[key] = check(default) if default is not None else None

    dist_keys = ("disturbance.t_start", "disturbance.duration", "disturbance.torque")
    given = [k for k in dist_keys if k in flat]
    disturbance = None
    if given:
        for k in dist_keys:
            if k not in flat:
                raise ScenarioError(k, "required when a [disturbance] section is present")
        disturbance = DisturbancePulse(
            values["disturbance.t_start"], values["disturbance.duration"], values["disturbance.torque"]
        )

    ref_type = values["reference.type"]
    if ref_type == "backflip":
        for k in ("reference.total_angle_deg", "reference.t_ramp"):
            if values[k] is None:
                raise ScenarioError(k, "required for a backflip reference")

    try:
        ocs = OcsParams(
            alpha=math.radians(values["ocs.alpha_deg"]),
            I_spin_per_wheel=values["ocs.wheel_spin_inertia"],
            tau_max=values["limits.tau_max"],
            gamma_dot_max=values["limits.gamma_dot_max"],
            I_transverse_per_wheel=values["ocs.wheel_transverse_inertia"],
        )
    except ValueError as exc:
        raise ScenarioError("ocs", str(exc)) from None
    robot = RobotParams(values["robot.mass"], values["robot.inertia"], ocs, values["robot.gravity"])

    defaults = Gains.default()
    for k in ("gains.kp", "gains.kd"):
        if values[k] is not None and np.any(values[k] < 0.0):
            raise ScenarioError(k, "entries must be >= 0")
    gains = Gains(
        kp=values["gains.kp"] if values["gains.kp"] is not None else defaults.kp,
        kd=values["gains.kd"] if values["gains.kd"] is not None else defaults.kd,
    )

    dt, t_max = values["integration.dt"], values["integration.t_max"]
    if t_max < dt:
        raise ScenarioError("integration.t_max", f"must be >= integration.dt ({dt:g})")
    plane = values["touchdown.plane_height"]
    position = values["initial.position"]
    if position[2] < plane:
        raise ScenarioError("initial.position", "CoM starts below touchdown.plane_height")

    return Scenario(
        name=values["name"],
        robot=robot,
        position=position,
        velocity=values["initial.velocity"],
        rpy=np.radians(values["initial.rpy_deg"]),
        omega=values["initial.omega"],
        wheel_speeds=values["initial.wheel_speeds"],
        disturbance=disturbance,
        reference_type=ref_type,
        reference_rpy=np.radians(values["reference.rpy_deg"]),
        total_angle=math.radians(values["reference.total_angle_deg"] or 0.0),
        t_ramp=values["reference.t_ramp"] or 0.0,
        t_ramp_start=values["reference.t_start"],
        gains=gains,
        dt=dt,
        t_max=t_max,
        plane_height=plane,
        ocs_enabled=values["ocs.enabled"],
        allocation=values["ocs.allocation"],
    )


def parse_scenario(path) -> Scenario:
    """Load and validate a scenario file.

    Raises:
        FileNotFoundError: if ``path`` does not exist.
        ScenarioError: on malformed TOML or any invalid field.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError("", f"{path}: malformed scenario file: {exc}") from None
    return scenario_from_dict(data)


def bundled_path(name: str) -> Path:
    """Filesystem path of a bundled scenario, e.g. ``bundled_path("test2_fall")``."""
    stem = name[: -len(".scenario")] if name.endswith(".scenario") else name
    if stem not in BUNDLED:
        raise FileNotFoundError(f"no bundled scenario named {name!r}; available: {', '.join(BUNDLED)}")
    return Path(str(resources.files("flywheel_ocs") / "scenarios" / f"{stem}.scenario"))


def load_scenario(name_or_path) -> Scenario:
    """Parse a scenario given either a file path or a bundled scenario name."""
    path = Path(name_or_path)
    if path.exists():
        return parse_scenario(path)
    if path.suffix in ("", ".scenario") and path.parent == Path("."):
        return parse_scenario(bundled_path(str(name_or_path)))
    raise FileNotFoundError(f"scenario file not found: {name_or_path}")
