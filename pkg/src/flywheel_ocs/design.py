"""Design-time calculators for the two-flywheel orientation control system.

Covers the momentum-exchange sizing bound, the incident angle between the
wheel axes, the hollow-cylinder geometry/inertia map and its inverse, the
torque allocation matrix and the split of the planar wheel inertia between
the two wheels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DesignError(ValueError):
    """Input outside the domain of a design formula."""


class InfeasibleDesignError(DesignError):
    """Requested target cannot be met with the given geometry."""

    def __init__(self, message: str, low: float, high: float):
        super().__init__(f"{message}; feasible interval is ({low:.6g}, {high:.6g})")
        self.low = low
        self.high = high


def min_flywheel_inertia(I_r: float, delta_theta_dot: float, gamma_dot_max: float) -> float:
    """Lower bound on the planar flywheel inertia for a base-rate change.

    ``I_f >= I_r * d / (d + gamma_dot_max)`` with ``d = |delta_theta_dot|``.

    The bound is met with equality when ``I_r`` is the locked inertia of the
    whole robot about the pitch axis (wheels included) and ``gamma_dot_max``
    limits the wheel's inertial spin rate, starting from rest.

    Args:
        I_r: robot pitch inertia, kg m^2.
        delta_theta_dot: base angular-rate change, rad/s (sign ignored).
        gamma_dot_max: wheel speed limit, rad/s.

    Returns:
        Minimum flywheel inertia, kg m^2.
    """
    if I_r <= 0.0:
        raise DesignError(f"robot inertia must be positive, got {I_r}")
    if gamma_dot_max <= 0.0:
        raise DesignError(f"wheel speed limit must be positive, got {gamma_dot_max}")
    d = abs(delta_theta_dot)
    return I_r * d / (d + gamma_dot_max)


def momentum_balance_inertia(I_r: float, delta_theta_dot: float, gamma_dot_max: float) -> float:
    """Flywheel inertia that exactly absorbs the rate change in the relative-speed reading.

    With the carrier inertia ``I_r`` excluding the wheel and ``gamma_dot_max``
    limiting the wheel speed relative to the carrier, conservation of
    ``(I_r + I_f) theta_dot + I_f gamma_dot`` gives
    ``I_f = I_r d / (gamma_dot_max - d)``, which always exceeds
    :func:`min_flywheel_inertia`. Requires ``d < gamma_dot_max``.
    """
    if I_r <= 0.0:
        raise DesignError(f"robot inertia must be positive, got {I_r}")
    d = abs(delta_theta_dot)
    if d >= gamma_dot_max:
        raise InfeasibleDesignError(
            "rate change must be below the wheel speed limit", 0.0, gamma_dot_max
        )
    return I_r * d / (gamma_dot_max - d)


def optimal_incident_angle(I_r_xx: float, I_r_yy: float) -> float:
    """Incident angle (rad) from the roll/pitch inertia ratio: ``atan(I_xx / I_yy)``."""
    if I_r_xx <= 0.0 or I_r_yy <= 0.0:
        raise DesignError(f"inertias must be positive, got ({I_r_xx}, {I_r_yy})")
    return math.atan(I_r_xx / I_r_yy)


@dataclass(frozen=True)
class FlywheelSpec:
    """Hollow-cylinder flywheel geometry with derived mass and principal inertias.

    Lengths in m, density in kg/m^3, mass in kg, inertias in kg m^2. ``I_zz``
    is about the spin axis.
    """

    r: float
    R: float
    h: float
    rho: float
    m: float
    I_xx: float
    I_zz: float

    @property
    def I_yy(self) -> float:
        return self.I_xx


def _check_positive(**values: float) -> None:
    for name, v in values.items():
        if not (v > 0.0 and math.isfinite(v)):
            raise DesignError(f"{name} must be positive and finite, got {v}")


def hollow_cylinder_inertia(r: float, R: float, h: float, rho: float) -> FlywheelSpec:
    """Mass and principal inertias of a hollow cylinder (spokes neglected)."""
    _check_positive(r=r, R=R, h=h, rho=rho)
    if not r < R:
        raise DesignError(f"inner radius {r} must be smaller than outer radius {R}")
    return _cylinder(r, R, h, rho)


def solid_cylinder_inertia(R: float, h: float, rho: float) -> FlywheelSpec:
    """Degenerate ``r = 0`` case of :func:`hollow_cylinder_inertia`."""
    _check_positive(R=R, h=h, rho=rho)
    return _cylinder(0.0, R, h, rho)


def _cylinder(r: float, R: float, h: float, rho: float) -> FlywheelSpec:
    d2 = R**2 - r**2
    d4 = R**4 - r**4
    return FlywheelSpec(
        r=r,
        R=R,
        h=h,
        rho=rho,
        m=math.pi * rho * h * d2,
        I_xx=math.pi * rho * h * (3.0 * d4 + h**2 * d2) / 12.0,
        I_zz=0.5 * math.pi * rho * h * d4,
    )


def solve_inner_radius(R: float, h: float, rho: float, target_I_zz: float) -> float:
    """Inner radius giving a spin inertia of ``target_I_zz`` for fixed ``R, h, rho``."""
    _check_positive(R=R, h=h, rho=rho)
    solid = 0.5 * math.pi * rho * h * R**4
    if not 0.0 < target_I_zz < solid:
        raise InfeasibleDesignError(
            f"target spin inertia {target_I_zz:.6g} kg m^2 not reachable", 0.0, solid
        )
    return (R**4 - 2.0 * target_I_zz / (math.pi * rho * h)) ** 0.25


def split_inertia(I_f_planar: float, alpha: float) -> float:
    """Per-wheel spin inertia ``I_f / (2 cos(alpha))``."""
    if not 0.0 <= alpha < 0.5 * math.pi:
        raise DesignError(
            f"incident angle must lie in [0, pi/2), got {alpha}; at pi/2 pitch is uncontrollable"
        )
    return I_f_planar / (2.0 * math.cos(alpha))


def allocation_matrix(alpha: float) -> np.ndarray:
    """3x2 matrix whose columns are the left and right wheel axes in the base frame."""
    s, c = math.sin(alpha), math.cos(alpha)
    return np.array([[s, -s], [c, c], [0.0, 0.0]])


def wheel_momentum(alpha: float, I_spin: float, speeds) -> np.ndarray:
    """Body-frame angular momentum of both wheels, ``I_spin * C @ speeds``."""
    return I_spin * (allocation_matrix(alpha) @ np.asarray(speeds, dtype=float))


@dataclass(frozen=True)
class OcsParams:
    """Runtime parameters of the two-wheel OCS.

    Attributes:
        alpha: incident angle between each wheel axis and the lateral axis, rad.
        I_spin_per_wheel: wheel inertia about its own spin axis, kg m^2.
        tau_max: per-wheel torque limit, N m.
        gamma_dot_max: per-wheel spin-rate limit, rad/s.
        I_transverse_per_wheel: wheel inertia about a diameter, kg m^2. Defaults
            to half the spin inertia (thin disc).
    """

    alpha: float
    I_spin_per_wheel: float
    tau_max: float
    gamma_dot_max: float
    I_transverse_per_wheel: float | None = None
    C: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 0.5 * math.pi:
            raise DesignError(f"incident angle must lie in [0, pi/2], got {self.alpha}")
        _check_positive(
            I_spin_per_wheel=self.I_spin_per_wheel,
            tau_max=self.tau_max,
            gamma_dot_max=self.gamma_dot_max,
        )
        if self.I_transverse_per_wheel is None:
            object.__setattr__(self, "I_transverse_per_wheel", 0.5 * self.I_spin_per_wheel)
        elif self.I_transverse_per_wheel < 0.0:
            raise DesignError("transverse wheel inertia must be non-negative")
        C = allocation_matrix(self.alpha)
        C.setflags(write=False)
        object.__setattr__(self, "C", C)

    @property
    def full_rank(self) -> bool:
        return 0.0 < self.alpha < 0.5 * math.pi
