"""Quaternion PD attitude control through the two flywheels.

The law computes the torque the wheels must absorb,

    tau_fb = -I_r (Kp e + Kd e_dot) - omega x (I_r omega),

with ``e`` the body-frame rotation vector from the current to the desired
attitude and ``e_dot = omega_des - omega``, then projects it on the wheel
axes with ``u = C^T tau_fb``. The base feels ``-C u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .design import OcsParams
from .dynamics import GD, Q, W, BodyState, RobotParams, clamp_wheel_torques
from .so3 import Quaternion, error_vector

ALLOCATION_MODES = ("transpose", "pseudoinverse")


@dataclass(frozen=True)
class Gains:
    """Diagonal PD gains: ``kp`` in 1/s^2, ``kd`` in 1/s.

    Entries must be non-negative; a zero yaw entry is the normal setting
    because the wheel axes span no yaw direction.
    """

    kp: np.ndarray
    kd: np.ndarray

    def __post_init__(self):
        for name in ("kp", "kd"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape == (3, 3):
                if np.any(a != np.diag(np.diag(a))):
                    raise ValueError(f"{name} must be diagonal")
                a = np.diag(a).copy()
            if a.shape != (3,):
                raise ValueError(f"{name} must have three diagonal entries")
            if np.any(a < 0.0) or not np.all(np.isfinite(a)):
                raise ValueError(f"{name} entries must be finite and non-negative")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @classmethod
    def default(cls) -> Gains:
        """Gains shipped with the bundled scenarios (pitch/roll only)."""
        return cls(kp=DEFAULT_KP, kd=DEFAULT_KD)


DEFAULT_KP = (300.0, 300.0, 0.0)
DEFAULT_KD = (35.0, 35.0, 0.0)


@dataclass(frozen=True)
class AttitudeReference:
    """Desired attitude and body-frame angular velocity as functions of time.

    Both callables return arrays: ``q_fn(t)`` a ``(w, x, y, z)`` quaternion
    and ``omega_fn(t)`` a body-frame rate in rad/s.
    """

    q_fn: Callable[[float], np.ndarray]
    omega_fn: Callable[[float], np.ndarray]

    def q_des(self, t: float) -> Quaternion:
        return Quaternion.from_array(self.q_fn(t))

    def omega_des(self, t: float) -> np.ndarray:
        return np.asarray(self.omega_fn(t), dtype=float)


def setpoint_reference(q: Quaternion) -> AttitudeReference:
    qa = q.as_array()
    return AttitudeReference(lambda t: qa, lambda t: np.zeros(3))


def backflip_reference(total_angle: float, t_ramp: float, t_start: float = 0.0) -> AttitudeReference:
    """Pitch ramp from 0 to ``total_angle`` (rad) over ``t_ramp`` seconds.

    Uses the quintic smooth step, which starts and ends with zero rate and
    zero angular acceleration. ``omega_des`` is its exact derivative about
    the body y axis.
    """
    if t_ramp <= 0.0:
        raise ValueError(f"ramp duration must be positive, got {t_ramp}")

    def phase(t):
        return min(1.0, max(0.0, (t - t_start) / t_ramp))

    def q_fn(t):
        s = phase(t)
        half = 0.5 * total_angle * s**3 * (10.0 - 15.0 * s + 6.0 * s * s)
        return np.array([math.cos(half), 0.0, math.sin(half), 0.0])

    def omega_fn(t):
        s = phase(t)
        rate = total_angle / t_ramp * 30.0 * s * s * (1.0 - s) ** 2
        return np.array([0.0, rate, 0.0])

    return AttitudeReference(q_fn, omega_fn)


def _feedback(q, omega, q_des, omega_des, gains: Gains, I_r: np.ndarray) -> np.ndarray:
    e = error_vector(q_des, q)
    e_dot = omega_des - omega
    Iw = I_r @ omega
    gyro = np.array([
        omega[1] * Iw[2] - omega[2] * Iw[1],
        omega[2] * Iw[0] - omega[0] * Iw[2],
        omega[0] * Iw[1] - omega[1] * Iw[0],
    ])
    return -I_r @ (gains.kp * e + gains.kd * e_dot) - gyro


def feedback_torque(
    s: BodyState, ref: AttitudeReference, t: float, gains: Gains, params: RobotParams
) -> np.ndarray:
    """Torque (N m, body frame) the wheels should absorb at time ``t``."""
    return _feedback(
        s.q.as_array(), s.omega_r, ref.q_fn(t), ref.omega_des(t), gains, params.I_r
    )


def allocate_to_wheels(tau_fb, C: np.ndarray, mode: str = "transpose") -> np.ndarray:
    """Project a body torque onto the two wheel axes.

    ``"transpose"`` gives ``C^T tau``; the effective roll and pitch gains are
    then scaled by ``2 sin^2(alpha)`` and ``2 cos^2(alpha)``.
    ``"pseudoinverse"`` uses the Moore-Penrose inverse of ``C`` instead.
    """
    tau_fb = np.asarray(tau_fb, dtype=float)
    if mode == "transpose":
        return C.T @ tau_fb
    if mode == "pseudoinverse":
        return np.linalg.pinv(C) @ tau_fb
    raise ValueError(f"unknown allocation mode {mode!r}; expected one of {ALLOCATION_MODES}")


def saturate(u, s: BodyState, params: OcsParams) -> np.ndarray:
    """Clamp each wheel to +-tau_max and drop torque that would spin a saturated wheel faster."""
    return clamp_wheel_torques(u, s.gamma_dot, params)[0]


class AttitudeController:
    """Closed-loop wheel-torque command for a reference attitude.

    Returns the raw (unsaturated) command; the plant applies actuator limits.
    """

    def __init__(
        self,
        gains: Gains,
        reference: AttitudeReference,
        params: RobotParams,
        allocation: str = "transpose",
    ):
        if allocation not in ALLOCATION_MODES:
            raise ValueError(f"unknown allocation mode {allocation!r}")
        self.gains = gains
        self.reference = reference
        self.params = params
        self.allocation = allocation
        C = params.ocs.C
        self._map = C.T if allocation == "transpose" else np.linalg.pinv(C)

    def __call__(self, t: float, s: BodyState) -> np.ndarray:
        return self.command_from_array(t, s.to_array())

    def command_from_array(self, t: float, x: np.ndarray) -> np.ndarray:
        tau = _feedback(
            x[Q], x[W], self.reference.q_fn(t), self.reference.omega_fn(t),
            self.gains, self.params.I_r,
        )
        return self._map @ tau

    def attitude_error(self, t: float, x: np.ndarray) -> np.ndarray:
        return error_vector(self.reference.q_fn(t), x[Q])
