"""Frames, angular parameterizations, rotations and Plücker lines.

World frame: right-handed, Z up, X forward at azimuth 0.  Every function
accepts stacked inputs with the coordinate axis last, so ``(3,)`` and
``(..., 3)`` arrays are both fine.

Rotations and norms are written out component-wise instead of going through
``@``/BLAS so that a given pixel produces the same bits no matter how the
image is batched.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from omnisynth.errors import DomainError


@dataclass(frozen=True)
class ElevationDir:
    """Azimuth ``theta`` in [-pi, pi] and elevation ``phi`` in [-pi/2, pi/2] (panoramas)."""

    theta: np.ndarray | float
    phi: np.ndarray | float


@dataclass(frozen=True)
class PolarDir:
    """Azimuth ``theta`` and polar angle ``phi`` in [0, pi] measured from the optical axis (+Z)."""

    theta: np.ndarray | float
    phi: np.ndarray | float


def norm(v):
    v = np.asarray(v, dtype=float)
    return np.sqrt(v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1] + v[..., 2] * v[..., 2])


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = norm(v)
    if np.any(n == 0):
        raise DomainError("cannot normalize a zero vector")
    return v / n[..., None]


def dot(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def cross(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def rotate(R, v):
    """Apply the 3x3 matrix ``R`` to every vector in ``v``."""
    R = np.asarray(R, dtype=float)
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.stack(
        [
            R[0, 0] * x + R[0, 1] * y + R[0, 2] * z,
            R[1, 0] * x + R[1, 1] * y + R[1, 2] * z,
            R[2, 0] * x + R[2, 1] * y + R[2, 2] * z,
        ],
        axis=-1,
    )


def spherical_to_dir(s: ElevationDir | PolarDir) -> np.ndarray:
    """Unit vector for a spherical direction.

    Elevation (0, 0) is +X; polar angle 0 is the optical axis +Z.
    """
    theta = np.asarray(s.theta, dtype=float)
    phi = np.asarray(s.phi, dtype=float)
    if isinstance(s, ElevationDir):
        c = np.cos(phi)
        return np.stack([c * np.cos(theta), c * np.sin(theta), np.sin(phi)], axis=-1)
    if isinstance(s, PolarDir):
        sp = np.sin(phi)
        return np.stack([sp * np.cos(theta), sp * np.sin(theta), np.cos(phi)], axis=-1)
    raise TypeError(f"expected ElevationDir or PolarDir, got {type(s).__name__}")


def dir_to_spherical(v, variant: type[ElevationDir] | type[PolarDir]):
    """Inverse of :func:`spherical_to_dir`; azimuth is 0 on the polar axis."""
    v = np.asarray(v, dtype=float)
    n = norm(v)
    if np.any(n == 0):
        raise DomainError("zero vector has no direction")
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    r = np.hypot(x, y)
    theta = np.where(r == 0, 0.0, np.arctan2(y, x))
    if variant is ElevationDir:
        return ElevationDir(theta, np.arctan2(z, r))
    if variant is PolarDir:
        return PolarDir(theta, np.arctan2(r, z))
    raise TypeError("variant must be ElevationDir or PolarDir")


_UE4_FLIP = np.diag([1.0, -1.0, 1.0])


def ue4_to_world(v):
    """Left-handed engine frame to the right-handed world frame (Y negated)."""
    v = np.array(v, dtype=float)
    v[..., 1] = -v[..., 1]
    return v


def world_to_ue4(v):
    return ue4_to_world(v)


def ue4_rotation_to_world(R):
    """Conjugate an engine-frame rotation by the Y flip."""
    return _UE4_FLIP @ np.asarray(R, dtype=float) @ _UE4_FLIP


def rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def ypr_to_matrix(yaw, pitch, roll):
    """Camera-to-world rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)`` (intrinsic z-y'-x'', radians).

    Positive pitch tilts the +X axis downwards (right-hand rule about +Y).
    """
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def is_rotation(R, tol=1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return bool(np.abs(R.T @ R - np.eye(3)).max() <= tol and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True)
class Pose:
    """Camera pose: world position and camera-to-world orientation."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        p = np.array(self.position, dtype=float).reshape(3)
        R = np.array(self.orientation, dtype=float).reshape(3, 3)
        if not is_rotation(R):
            raise DomainError("orientation is not a proper rotation matrix")
        p.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "orientation", R)

    @classmethod
    def from_ypr(cls, position=(0.0, 0.0, 0.0), yaw=0.0, pitch=0.0, roll=0.0) -> Pose:
        return cls(np.asarray(position, dtype=float), ypr_to_matrix(yaw, pitch, roll))

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.position, other.position) and np.array_equal(
            self.orientation, other.orientation
        )

    __hash__ = None


def compose_pose(pose: Pose, camera_ray):
    """Camera-frame ray to world: ``(origin, unit world direction)``."""
    d = rotate(pose.orientation, camera_ray)
    return pose.position.copy(), normalize(d)


@dataclass(frozen=True)
class PluckerRay:
    """Oriented line: unit direction ``xi`` and moment ``xi_bar = p x xi``."""

    xi: np.ndarray
    xi_bar: np.ndarray

    def closest_point_to_origin(self):
        return cross(self.xi, self.xi_bar) / dot(self.xi, self.xi)[..., None]

    def constraint(self):
        """The Plücker side condition ``xi . xi_bar``; zero for a valid line."""
        return dot(self.xi, self.xi_bar)


def plucker_from_point_dir(p, d) -> PluckerRay:
    d = np.asarray(d, dtype=float)
    if np.any(norm(d) == 0):
        raise DomainError("line direction must be non-zero")
    xi = normalize(d)
    p = np.broadcast_to(np.asarray(p, dtype=float), xi.shape)
    return PluckerRay(xi, cross(p, xi))


def point_line_distance(point, ray: PluckerRay):
    """Distance from ``point`` to the line (``xi`` need not be unit)."""
    point = np.asarray(point, dtype=float)
    m = cross(point, ray.xi) - ray.xi_bar
    return norm(m) / norm(ray.xi)


def transform_plucker(pose: Pose, ray: PluckerRay) -> PluckerRay:
    """Express a camera-frame line in world coordinates."""
    xi = rotate(pose.orientation, ray.xi)
    xi_bar = rotate(pose.orientation, ray.xi_bar) + cross(pose.position, xi)
    return PluckerRay(xi, xi_bar)
