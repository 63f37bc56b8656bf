"""Rigid-body rotations, poses, wrenches, twists, and 6x6 force transforms.

Conventions used throughout:

* Orientation parameters are fixed-axis X-Y-Z Euler angles, i.e. the
  rotation matrix is ``Rz(ez) @ Ry(ey) @ Rx(ex)``.
* A wrench stacks force over moment, ``[Fx Fy Fz Tx Ty Tz]``; a twist
  stacks linear over angular velocity.
* The spatial force transform of a frame whose rotation is R and whose
  origin sits at p in the target frame is ``[[R, 0], [skew(p) @ R, R]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1.0e-12


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == np.cross(v, u)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _check_finite(a: np.ndarray, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite, got {a}")
    return a


class Rotation:
    """Proper orthonormal 3x3 rotation matrix."""

    __slots__ = ("matrix",)

    def __init__(self, matrix: np.ndarray):
        m = _check_finite(matrix, "rotation matrix")
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got {m.shape}")
        if np.max(np.abs(m.T @ m - np.eye(3))) > 1.0e-9:
            raise ValueError("matrix is not orthonormal")
        if abs(np.linalg.det(m) - 1.0) > 1.0e-9:
            raise ValueError("matrix determinant is not +1")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, *args):  # immutable
        raise AttributeError("Rotation is immutable")

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(np.eye(3))

    def compose(self, other: "Rotation") -> "Rotation":
        return Rotation(self.matrix @ other.matrix)

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)

    def inverse(self) -> "Rotation":
        return Rotation(self.matrix.T.copy())

    def as_fixed_euler(self) -> np.ndarray:
        """Extract fixed-axis X-Y-Z angles (ex, ey, ez), each in (-pi, pi]."""
        m = self.matrix
        ey = np.arctan2(-m[2, 0], np.hypot(m[0, 0], m[1, 0]))
        if abs(abs(ey) - np.pi / 2) < 1.0e-12:
            # Gimbal degeneracy: only ez -/+ ex is observable; pin ez = 0.
            ez = 0.0
            ex = np.arctan2(m[0, 1], m[1, 1]) if ey > 0 else np.arctan2(-m[0, 1], m[1, 1])
        else:
            ex = np.arctan2(m[2, 1], m[2, 2])
            ez = np.arctan2(m[1, 0], m[0, 0])
        return np.array([_wrap_angle(ex), _wrap_angle(ey), _wrap_angle(ez)])

    def __repr__(self) -> str:
        return f"Rotation({self.matrix.tolist()})"


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    if w == -np.pi:
        w = np.pi
    return float(w)


def rotation_from_fixed_euler(ex: float, ey: float, ez: float) -> Rotation:
    """Rotation about fixed axes X then Y then Z: Rz(ez) @ Ry(ey) @ Rx(ex)."""
    for name, val in (("ex", ex), ("ey", ey), ("ez", ez)):
        if not np.isfinite(val):
            raise ValueError(f"{name} must be finite")
    cx, sx = np.cos(ex), np.sin(ex)
    cy, sy = np.cos(ey), np.sin(ey)
    cz, sz = np.cos(ez), np.sin(ez)
    m = np.array(
        [
            [cy * cz, sx * sy * cz - cx * sz, cx * sy * cz + sx * sz],
            [cy * sz, sx * sy * sz + cx * cz, cx * sy * sz - sx * cz],
            [-sy, sx * cy, cx * cy],
        ]
    )
    return Rotation(m)


@dataclass(frozen=True)
class Pose:
    """Position (m) plus fixed-axis X-Y-Z Euler orientation (rad)."""

    position: np.ndarray
    euler: np.ndarray

    def __post_init__(self):
        p = _check_finite(self.position, "position")
        e = _check_finite(self.euler, "euler")
        if p.shape != (3,) or e.shape != (3,):
            raise ValueError("position and euler must be 3-vectors")
        e = np.array([_wrap_angle(a) for a in e])
        p.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "euler", e)

    def rotation(self) -> Rotation:
        return rotation_from_fixed_euler(*self.euler)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.euler])


@dataclass(frozen=True)
class Wrench:
    """Force (N) and moment (N*m) stacked as one 6-vector."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    moment: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        f = _check_finite(self.force, "force")
        m = _check_finite(self.moment, "moment")
        if f.shape != (3,) or m.shape != (3,):
            raise ValueError("force and moment must be 3-vectors")
        f.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "moment", m)

    @staticmethod
    def from_array(a: np.ndarray) -> "Wrench":
        a = np.asarray(a, dtype=float)
        if a.shape != (6,):
            raise ValueError("wrench array must have 6 components")
        return Wrench(a[:3].copy(), a[3:].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.force, self.moment])


@dataclass(frozen=True)
class Twist:
    """Linear (m/s) and angular (rad/s) velocity stacked as one 6-vector."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        v = _check_finite(self.linear, "linear velocity")
        w = _check_finite(self.angular, "angular velocity")
        if v.shape != (3,) or w.shape != (3,):
            raise ValueError("linear and angular must be 3-vectors")
        v.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "linear", v)
        object.__setattr__(self, "angular", w)

    @staticmethod
    def from_array(a: np.ndarray) -> "Twist":
        a = np.asarray(a, dtype=float)
        if a.shape != (6,):
            raise ValueError("twist array must have 6 components")
        return Twist(a[:3].copy(), a[3:].copy())

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


class SpatialTransform:
    """6x6 wrench transform between frames of a rigid assembly."""

    __slots__ = ("rotation", "translation")

    def __init__(self, rotation: Rotation, translation: np.ndarray):
        t = _check_finite(translation, "translation")
        if t.shape != (3,):
            raise ValueError("translation must be a 3-vector")
        t.flags.writeable = False
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", t)

    def __setattr__(self, *args):
        raise AttributeError("SpatialTransform is immutable")

    @staticmethod
    def identity() -> "SpatialTransform":
        return SpatialTransform(Rotation.identity(), np.zeros(3))

    @property
    def matrix(self) -> np.ndarray:
        r = self.rotation.matrix
        out = np.zeros((6, 6))
        out[:3, :3] = r
        out[3:, 3:] = r
        out[3:, :3] = skew(self.translation) @ r
        return out

    def apply(self, w: Wrench) -> Wrench:
        f = self.rotation.matrix @ w.force
        m = self.rotation.matrix @ w.moment + np.cross(self.translation, f)
        return Wrench(f, m)

    def __repr__(self) -> str:
        return f"SpatialTransform(R={self.rotation.matrix.tolist()}, p={self.translation.tolist()})"


def spatial_force_transform(rotation: Rotation, translation: np.ndarray) -> SpatialTransform:
    """Build the wrench transform for a frame at ``translation`` with ``rotation``."""
    return SpatialTransform(rotation, np.asarray(translation, dtype=float).copy())


def transform_wrench(x: SpatialTransform, w: Wrench) -> Wrench:
    """Express a wrench measured in the source frame in the target frame."""
    return x.apply(w)


def compose(a: SpatialTransform, b: SpatialTransform) -> SpatialTransform:
    """Transform composition: compose(a, b).apply(w) == a.apply(b.apply(w))."""
    r = a.rotation.compose(b.rotation)
    p = a.translation + a.rotation.apply(b.translation)
    return SpatialTransform(r, p)
