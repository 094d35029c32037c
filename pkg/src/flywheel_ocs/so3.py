"""Quaternion and inertia-tensor arithmetic.

Convention: Hamilton product, scalar-first ``(w, x, y, z)``. A quaternion
``q`` maps body-frame vectors to the world frame, ``v_w = q v_b q*``.
Angular velocities are expressed in the body frame, so the kinematics read
``q_dot = 0.5 * q (x) (0, omega)``.

Euler angles only appear at the I/O boundary (ZYX yaw-pitch-roll).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion, normalized on construction.

    Any finite, non-zero 4-tuple is accepted and scaled to unit norm; zero or
    non-finite components raise ``ValueError``.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        comps = (float(self.w), float(self.x), float(self.y), float(self.z))
        if not all(math.isfinite(c) for c in comps):
            raise ValueError(f"non-finite quaternion {comps}")
        n = math.sqrt(sum(c * c for c in comps))
        if n == 0.0:
            raise ValueError("zero quaternion has no rotation")
        if n != 1.0:
            comps = tuple(c / n for c in comps)
        for name, c in zip("wxyz", comps):
            object.__setattr__(self, name, c)

    @classmethod
    def identity(cls) -> Quaternion:
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, a: Sequence[float]) -> Quaternion:
        return cls(*(float(c) for c in a))

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> Quaternion:
        axis = np.asarray(axis, dtype=float)
        n = np.linalg.norm(axis)
        if n == 0.0:
            raise ValueError("rotation axis must be non-zero")
        s = math.sin(0.5 * angle) / n
        return cls(math.cos(0.5 * angle), axis[0] * s, axis[1] * s, axis[2] * s)

    @classmethod
    def from_rpy(cls, roll: float, pitch: float, yaw: float) -> Quaternion:
        """ZYX Euler angles (rad): yaw about z, then pitch about y, then roll about x."""
        cr, sr = math.cos(0.5 * roll), math.sin(0.5 * roll)
        cp, sp = math.cos(0.5 * pitch), math.sin(0.5 * pitch)
        cy, sy = math.cos(0.5 * yaw), math.sin(0.5 * yaw)
        return cls(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def conj(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: Quaternion) -> Quaternion:
        return quat_multiply(self, other)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def to_matrix(self) -> np.ndarray:
        return rotation_matrix(self.as_array())

    def to_rpy(self) -> np.ndarray:
        return rpy_from_array(self.as_array())

    def norm_error(self) -> float:
        return abs(math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2) - 1.0)


# -- array-level kernels, used on the hot simulation path ------------------


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two ``(w, x, y, z)`` arrays (no normalization)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def qconj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def normalize(q: np.ndarray) -> np.ndarray:
    return q / math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def quat_derivative(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """``0.5 * q (x) (0, omega)`` for a body-frame angular velocity."""
    w, x, y, z = q
    ox, oy, oz = omega_body
    return 0.5 * np.array([
        -x * ox - y * oy - z * oz,
        w * ox + y * oz - z * oy,
        w * oy - x * oz + z * ox,
        w * oz + x * oy - y * ox,
    ])


def rotation_matrix(q: np.ndarray) -> np.ndarray:
    """World-from-body rotation matrix of a unit ``(w, x, y, z)`` array."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rpy_from_array(q: np.ndarray) -> np.ndarray:
    """ZYX roll, pitch, yaw (rad) with pitch in [-pi/2, pi/2]."""
    R = rotation_matrix(q)
    roll = math.atan2(R[2, 1], R[2, 2])
    pitch = math.atan2(-R[2, 0], math.hypot(R[0, 0], R[1, 0]))
    yaw = math.atan2(R[1, 0], R[0, 0])
    return np.array([roll, pitch, yaw])


def unwrap_rpy(quats: np.ndarray) -> np.ndarray:
    """Continuous roll/pitch/yaw along a sequence of ``(N, 4)`` quaternions.

    Every ZYX triple ``(r, p, y)`` has the twin ``(r + pi, pi - p, y + pi)``.
    Each sample picks the twin closest to the previous sample after 2*pi
    unwrapping, so a pure pitch rotation through 360 deg reads as a pitch
    ramp with zero roll and yaw instead of jumping at +-90 deg.
    """
    quats = np.atleast_2d(quats)
    out = np.empty((len(quats), 3))
    prev = None
    for i, q in enumerate(quats):
        a = rpy_from_array(q)
        if prev is None:
            out[i] = prev = a
            continue
        b = np.array([a[0] + math.pi, math.pi - a[1], a[2] + math.pi])
        best, best_d = None, math.inf
        for cand in (a, b):
            c = cand - 2 * math.pi * np.round((cand - prev) / (2 * math.pi))
            d = float(np.sum(np.abs(c - prev)))
            if d < best_d:
                best, best_d = c, d
        out[i] = prev = best
    return out


_HALF_TURN_TOL = 1e-12


def error_vector(q_des: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Array form of :func:`attitude_error`."""
    qe = qmul(qconj(q), q_des)
    if qe[0] < 0.0:
        qe = -qe
    v = qe[1:]
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n == 0.0:
        return np.zeros(3)
    angle = 2.0 * math.atan2(n, qe[0])
    if qe[0] < _HALF_TURN_TOL:
        # angle == pi up to rounding: both axis signs are valid; largest component positive
        k = int(np.argmax(np.abs(v)))
        if v[k] < 0.0:
            v = -v
    return v * (angle / n)


# -- public value-level API -------------------------------------------------


def quat_multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a (x) b``, renormalized."""
    return Quaternion.from_array(qmul(a.as_array(), b.as_array()))


def rotate_world_from_body(q: Quaternion, v) -> np.ndarray:
    """Express body-frame vector ``v`` in the world frame."""
    return rotation_matrix(q.as_array()) @ np.asarray(v, dtype=float)


def integrate_attitude(q: Quaternion, omega_body, dt: float) -> Quaternion:
    """Advance ``q`` by a constant body rate over ``dt`` using the exponential map.

    Exact for constant ``omega_body``; step subdivision does not change the
    result beyond rounding.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    omega = np.asarray(omega_body, dtype=float)
    rate = float(np.linalg.norm(omega))
    if rate == 0.0:
        return q
    half = 0.5 * rate * dt
    dq = np.concatenate(([math.cos(half)], omega / rate * math.sin(half)))
    return Quaternion.from_array(qmul(q.as_array(), dq))


def attitude_error(q_des: Quaternion, q: Quaternion) -> np.ndarray:
    """Body-frame rotation vector (rad) carrying ``q`` onto ``q_des``.

    Computed as the logarithm of ``conj(q) (x) q_des`` using the representative
    with non-negative scalar part, so the result has norm in ``[0, pi]`` and is
    invariant under ``q -> -q``. At exactly pi the axis sign is chosen so its
    largest-magnitude component is positive.
    """
    return error_vector(q_des.as_array(), q.as_array())


def rotation_distance(a: Quaternion, b: Quaternion) -> float:
    """Geodesic angle (rad) between two attitudes."""
    qe = qmul(qconj(a.as_array()), b.as_array())
    return 2.0 * math.atan2(float(np.linalg.norm(qe[1:])), abs(qe[0]))


def inertia_tensor(values) -> np.ndarray:
    """Validate and return a 3x3 inertia tensor (kg m^2).

    Accepts a 3-vector of principal moments or a full 3x3 matrix. The result
    must be symmetric to 1e-12 and positive definite.
    """
    a = np.asarray(values, dtype=float)
    if a.shape == (3,):
        a = np.diag(a)
    if a.shape != (3, 3):
        raise ValueError(f"inertia must be a 3-vector or 3x3 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("inertia has non-finite entries")
    if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, float(np.max(np.abs(a)))):
        raise ValueError("inertia tensor is not symmetric")
    if np.min(np.linalg.eigvalsh(a)) <= 0.0:
        raise ValueError("inertia tensor is not positive definite")
    return a
