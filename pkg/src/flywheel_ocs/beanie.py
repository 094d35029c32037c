"""Planar two-body (Elroy's Beanie) pitch model.

A carrier of inertia ``I_r`` and a wheel of inertia ``I_f`` share a revolute
joint through their common centre of mass. ``gamma_dot`` is the wheel speed
relative to the carrier, so the total angular momentum is
``(I_r + I_f) theta_dot + I_f gamma_dot``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

TorqueProfile = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class BeanieState:
    theta: float = 0.0
    theta_dot: float = 0.0
    gamma: float = 0.0
    gamma_dot: float = 0.0

    def momentum(self, I_r: float, I_f: float) -> float:
        return (I_r + I_f) * self.theta_dot + I_f * self.gamma_dot

    @property
    def wheel_inertial_rate(self) -> float:
        """Wheel spin rate seen from the inertial frame."""
        return self.theta_dot + self.gamma_dot


@dataclass
class BeanieTrajectory:
    t: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    gamma: np.ndarray
    gamma_dot: np.ndarray

    def momentum(self, I_r: float, I_f: float) -> np.ndarray:
        return (I_r + I_f) * self.theta_dot + I_f * self.gamma_dot

    def state(self, k: int) -> BeanieState:
        return BeanieState(self.theta[k], self.theta_dot[k], self.gamma[k], self.gamma_dot[k])


def beanie_closed_form(L0: float, I_r: float, I_f: float, gamma_dot: float) -> float:
    """Carrier rate implied by conserved momentum ``L0`` at wheel speed ``gamma_dot``."""
    if I_r + I_f <= 0.0:
        raise ValueError("I_r + I_f must be positive")
    return (L0 - I_f * gamma_dot) / (I_r + I_f)


def _rates(x: np.ndarray, tau: float, I_r: float, I_f: float) -> np.ndarray:
    # internal torque tau drives the wheel, -tau acts on the carrier
    theta_ddot = -tau / I_r
    gamma_ddot = tau / I_f - theta_ddot
    return np.array([x[1], theta_ddot, x[3], gamma_ddot])


def beanie_simulate(
    initial: BeanieState,
    I_r: float,
    I_f: float,
    wheel_torque_profile: TorqueProfile,
    dt: float,
    T: float,
) -> BeanieTrajectory:
    """Integrate the two-body model with classical RK4.

    Args:
        initial: state at ``t = 0``.
        I_r, I_f: carrier and wheel inertias, kg m^2.
        wheel_torque_profile: joint torque on the wheel, N m; a constant or a
            function of time.
        dt: step, s.
        T: horizon, s. Samples are taken at ``k * dt`` for ``k = 0..round(T/dt)``.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < dt:
        raise ValueError(f"horizon {T} shorter than one step {dt}")
    if I_r <= 0.0 or I_f <= 0.0:
        raise ValueError("inertias must be positive")
    tau = wheel_torque_profile if callable(wheel_torque_profile) else (lambda _t, c=float(wheel_torque_profile): c)

    n = int(round(T / dt))
    out = np.empty((n + 1, 4))
    x = np.array([initial.theta, initial.theta_dot, initial.gamma, initial.gamma_dot], dtype=float)
    out[0] = x
    for k in range(n):
        t = k * dt
        k1 = _rates(x, tau(t), I_r, I_f)
        k2 = _rates(x + 0.5 * dt * k1, tau(t + 0.5 * dt), I_r, I_f)
        k3 = _rates(x + 0.5 * dt * k2, tau(t + 0.5 * dt), I_r, I_f)
        k4 = _rates(x + dt * k3, tau(t + dt), I_r, I_f)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = x
    t = np.arange(n + 1) * dt
    return BeanieTrajectory(t, out[:, 0], out[:, 1], out[:, 2], out[:, 3])
