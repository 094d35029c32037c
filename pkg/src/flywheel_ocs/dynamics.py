"""Ballistic flight of a rigid base carrying two reaction wheels.

The base and the wheel housings form one rigid body with constant inertia
``I_b`` (robot inertia plus the wheels' transverse inertia); each wheel adds
its spin momentum ``I_spin * gamma_dot`` along its axis, where ``gamma_dot``
is the wheel's inertial spin rate. In the body frame:

    H       = I_b omega + I_spin C gamma_dot
    I_spin  gamma_ddot = u
    I_b     omega_dot  = -C u - omega x H + tau_dist

so ``d/dt (R H) = R tau_dist`` and the wheel torques ``u`` only exchange
momentum. The centre of mass follows ``p_ddot = g``.

Flat state layout (17 entries): ``p[0:3] v[3:6] q[6:10] omega[10:13]
gamma_dot[13:15] gamma[15:17]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .design import OcsParams
from .so3 import (
    Quaternion,
    inertia_tensor,
    normalize,
    quat_derivative,
    rotation_matrix,
    unwrap_rpy,
)

STATE_SIZE = 17
P, V, Q, W, GD, G = (slice(0, 3), slice(3, 6), slice(6, 10), slice(10, 13),
                     slice(13, 15), slice(15, 17))

EARTH_GRAVITY = np.array([0.0, 0.0, -9.81])


class SimulationDiverged(RuntimeError):
    """The integrated state became non-finite."""

    def __init__(self, t_last_valid: float):
        super().__init__(f"simulation diverged after t = {t_last_valid:.6g} s")
        self.t_last_valid = t_last_valid


@dataclass(frozen=True)
class BodyState:
    """Base pose and rates plus the two wheel spin states.

    ``p``, ``v`` are world-frame CoM position (m) and velocity (m/s); ``q``
    maps body to world; ``omega_r`` is the base angular velocity in the body
    frame (rad/s). Wheel rates are about the left and right spin axes.
    """

    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: Quaternion = field(default_factory=Quaternion.identity)
    omega_r: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gamma_dot_l: float = 0.0
    gamma_dot_r: float = 0.0
    gamma_l: float = 0.0
    gamma_r: float = 0.0

    def __post_init__(self):
        for name in ("p", "v", "omega_r"):
            a = np.array(getattr(self, name), dtype=float).reshape(3)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not isinstance(self.q, Quaternion):
            object.__setattr__(self, "q", Quaternion.from_array(self.q))

    @property
    def gamma_dot(self) -> np.ndarray:
        return np.array([self.gamma_dot_l, self.gamma_dot_r])

    def to_array(self) -> np.ndarray:
        return np.concatenate((
            self.p, self.v, self.q.as_array(), self.omega_r,
            [self.gamma_dot_l, self.gamma_dot_r, self.gamma_l, self.gamma_r],
        ))

    @classmethod
    def from_array(cls, x: Sequence[float]) -> BodyState:
        x = np.asarray(x, dtype=float)
        return cls(x[P], x[V], Quaternion.from_array(x[Q]), x[W], x[13], x[14], x[15], x[16])


@dataclass(frozen=True)
class RobotParams:
    """Lumped rigid-body parameters of the robot in flight.

    Attributes:
        mass_total: kg.
        I_r: 3x3 body-frame inertia about the CoM, legs frozen, wheels excluded.
        ocs: flywheel parameters.
        g: world-frame gravity, m/s^2.
    """

    mass_total: float
    I_r: np.ndarray
    ocs: OcsParams
    g: np.ndarray = field(default_factory=lambda: EARTH_GRAVITY.copy())
    I_b: np.ndarray = field(init=False, repr=False, compare=False)
    I_b_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.mass_total > 0.0:
            raise ValueError(f"mass must be positive, got {self.mass_total}")
        I_r = inertia_tensor(self.I_r)
        g = np.array(self.g, dtype=float).reshape(3)
        C = self.ocs.C
        I_b = I_r.copy()
        for a in C.T:
            I_b += self.ocs.I_transverse_per_wheel * (np.eye(3) - np.outer(a, a))
        for name, val in (("I_r", I_r), ("g", g), ("I_b", I_b), ("I_b_inv", np.linalg.inv(I_b))):
            val.setflags(write=False)
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class DisturbancePulse:
    """Rectangular body-frame torque on ``[t_start, t_start + duration]``."""

    t_start: float
    duration: float
    torque: np.ndarray

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError(f"pulse duration must be non-negative, got {self.duration}")
        object.__setattr__(self, "torque", np.array(self.torque, dtype=float).reshape(3))

    @property
    def t_end(self) -> float:
        return self.t_start + self.duration

    def torque_at(self, t: float) -> np.ndarray:
        if self.t_start <= t <= self.t_end:
            return self.torque
        return np.zeros(3)

    @property
    def impulse(self) -> np.ndarray:
        return self.torque * self.duration


# Controller: (t, state) -> commanded wheel torques (u_l, u_r), N m.
Controller = Callable[[float, BodyState], Sequence[float]]


def clamp_wheel_torques(u, gamma_dot, ocs: OcsParams) -> tuple[np.ndarray, bool]:
    """Apply torque and spin-rate limits; report whether anything was clipped."""
    u = np.asarray(u, dtype=float)
    out = np.clip(u, -ocs.tau_max, ocs.tau_max)
    for i in range(2):
        if abs(gamma_dot[i]) >= ocs.gamma_dot_max and out[i] * gamma_dot[i] > 0.0:
            out[i] = 0.0
    return out, bool(np.any(out != u))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _derivative(x: np.ndarray, u: np.ndarray, tau: np.ndarray, params: RobotParams) -> np.ndarray:
    ocs = params.ocs
    C = ocs.C
    J = ocs.I_spin_per_wheel
    omega = x[W]
    gd = x[GD]
    H = params.I_b @ omega + J * (C @ gd)
    omega_dot = params.I_b_inv @ (tau - C @ u - _cross(omega, H))
    dx = np.empty(STATE_SIZE)
    dx[P] = x[V]
    dx[V] = params.g
    dx[Q] = quat_derivative(x[Q], omega)
    dx[W] = omega_dot
    dx[GD] = u / J
    dx[G] = gd
    return dx


def dynamics_derivative(s: BodyState, u, dist, params: RobotParams) -> np.ndarray:
    """Time derivative of the flat state for wheel torques ``u`` and body torque ``dist``.

    ``u`` is applied as given; actuator limits are the caller's concern.
    """
    return _derivative(s.to_array(), np.asarray(u, dtype=float), np.asarray(dist, dtype=float), params)


def _array_controller(controller) -> Callable[[float, np.ndarray], np.ndarray]:
    if controller is None:
        return lambda t, x: np.zeros(2)
    fast = getattr(controller, "command_from_array", None)
    if fast is not None:
        return fast
    if callable(controller):
        return lambda t, x: np.asarray(controller(t, BodyState.from_array(x)), dtype=float)
    const = np.asarray(controller, dtype=float).reshape(2)
    return lambda t, x: const


def _applied(ctrl, t, x, params) -> tuple[np.ndarray, bool]:
    return clamp_wheel_torques(ctrl(t, x), x[GD], params.ocs)


def _rk4(x, t, h, params, ctrl, tau) -> np.ndarray:
    half = 0.5 * h

    def stage(ts, xs):
        if not np.all(np.isfinite(xs)):
            return None
        return _derivative(xs, _applied(ctrl, ts, xs, params)[0], tau, params)

    # a None stage means the state blew up; stop before a controller sees it
    nan = np.full_like(x, np.nan)
    if (k1 := stage(t, x)) is None:
        return nan
    if (k2 := stage(t + half, x + half * k1)) is None:
        return nan
    if (k3 := stage(t + half, x + half * k2)) is None:
        return nan
    if (k4 := stage(t + h, x + h * k3)) is None:
        return nan
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[Q] = normalize(out[Q])
    return out


_ZERO3 = np.zeros(3)


def _step(x, t, dt, params, ctrl, disturbance: Optional[DisturbancePulse]):
    """One RK4 step, split at pulse edges so the pulse is integrated exactly.

    Edges within ``1e-9 dt`` of a step boundary count as on the boundary, so
    rounding in ``k * dt`` does not create sliver substeps.
    """
    if disturbance is None or disturbance.duration == 0.0:
        return _rk4(x, t, dt, params, ctrl, _ZERO3), False
    t1 = t + dt
    eps = 1e-9 * dt
    cuts = [t] + [e for e in (disturbance.t_start, disturbance.t_end) if t + eps < e < t1 - eps] + [t1]
    active = False
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        on = disturbance.t_start - eps <= mid <= disturbance.t_end + eps
        active |= on
        x = _rk4(x, a, b - a, params, ctrl, disturbance.torque if on else _ZERO3)
    return x, active


def rk4_step(
    s: BodyState,
    controls,
    dt: float,
    params: RobotParams,
    t: float = 0.0,
    disturbance: Optional[DisturbancePulse] = None,
) -> BodyState:
    """Advance one classical RK4 step.

    ``controls`` is either a fixed pair of wheel torques or a controller
    ``(t, state) -> (u_l, u_r)``; controllers are evaluated at every stage.
    Actuator limits are applied at every stage. The quaternion is
    renormalized after the step.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    x, _ = _step(s.to_array(), t, dt, params, _array_controller(controls), disturbance)
    return BodyState.from_array(x)


def total_angular_momentum_world(s: BodyState, params: RobotParams) -> np.ndarray:
    """Angular momentum about the CoM in the world frame, kg m^2/s."""
    return _momentum_world(s.to_array(), params)


def _momentum_world(x: np.ndarray, params: RobotParams) -> np.ndarray:
    H = params.I_b @ x[W] + params.ocs.I_spin_per_wheel * (params.ocs.C @ x[GD])
    return rotation_matrix(x[Q]) @ H


def rotational_energy(s: BodyState, params: RobotParams) -> float:
    omega = s.omega_r
    return 0.5 * float(omega @ params.I_b @ omega) + 0.5 * params.ocs.I_spin_per_wheel * float(
        s.gamma_dot_l**2 + s.gamma_dot_r**2
    )


def detect_touchdown(s: BodyState, plane_height: float) -> bool:
    """CoM at or below the plane while moving down."""
    return bool(s.p[2] <= plane_height and s.v[2] < 0.0)


def crossing_time(t0: float, z0: float, t1: float, z1: float, plane_height: float) -> float:
    """Linear interpolation of the instant the CoM height crosses the plane."""
    if z0 == z1:
        return t1
    return t0 + (t1 - t0) * (z0 - plane_height) / (z0 - z1)


@dataclass
class Trajectory:
    """Recorded samples of a flight.

    ``x`` holds flat states (see module docstring); ``u`` the wheel torques
    actually applied at each sample; ``saturated`` whether limits clipped the
    command; ``disturbed`` whether a disturbance acted during the step that
    ended at the sample.
    """

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    saturated: np.ndarray
    disturbed: np.ndarray
    L_world: np.ndarray
    touchdown_time: Optional[float] = None

    def __len__(self) -> int:
        return len(self.t)

    def state(self, k: int) -> BodyState:
        return BodyState.from_array(self.x[k])

    @property
    def q(self) -> np.ndarray:
        return self.x[:, Q]

    @property
    def rpy(self) -> np.ndarray:
        return unwrap_rpy(self.x[:, Q]) if len(self) else np.empty((0, 3))


def simulate(
    initial: BodyState,
    params: RobotParams,
    *,
    dt: float,
    t_max: float,
    plane_height: float = -math.inf,
    disturbance: Optional[DisturbancePulse] = None,
    controller=None,
) -> Trajectory:
    """Integrate from ``t = 0`` until touch-down or ``t_max``.

    Samples are recorded at ``k * dt``. The run stops at the first sample that
    satisfies :func:`detect_touchdown`; ``touchdown_time`` is then refined by
    linear interpolation inside the last step.

    Raises:
        SimulationDiverged: if the state becomes non-finite.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_max < dt:
        raise ValueError(f"t_max {t_max} shorter than one step {dt}")
    if initial.p[2] < plane_height:
        raise ValueError("initial CoM is below the touch-down plane")
    ctrl = _array_controller(controller)
    n = int(round(t_max / dt))

    xs = [initial.to_array()]
    ts = [0.0]
    disturbed = [False]
    touchdown = None
    x = xs[0]
    for k in range(n):
        t = k * dt
        # blow-up is reported below, not through floating-point warnings
        with np.errstate(over="ignore", invalid="ignore"):
            x_new, active = _step(x, t, dt, params, ctrl, disturbance)
        if not np.all(np.isfinite(x_new)):
            raise SimulationDiverged(t)
        t_new = (k + 1) * dt
        xs.append(x_new)
        ts.append(t_new)
        disturbed.append(active)
        if x_new[2] <= plane_height and x_new[5] < 0.0:
            touchdown = crossing_time(t, x[2], t_new, x_new[2], plane_height)
            break
        x = x_new

    X = np.array(xs)
    applied = [_applied(ctrl, t, xk, params) for t, xk in zip(ts, X)]
    return Trajectory(
        t=np.array(ts),
        x=X,
        u=np.array([a[0] for a in applied]),
        saturated=np.array([a[1] for a in applied]),
        disturbed=np.array(disturbed),
        L_world=np.array([_momentum_world(xk, params) for xk in X]),
        touchdown_time=touchdown,
    )


def simulate_flight(scenario, controller=None) -> Trajectory:
    """Run :func:`simulate` with the settings of a parsed scenario."""
    return simulate(
        scenario.initial_state(),
        scenario.robot,
        dt=scenario.dt,
        t_max=scenario.t_max,
        plane_height=scenario.plane_height,
        disturbance=scenario.disturbance,
        controller=controller,
    )
