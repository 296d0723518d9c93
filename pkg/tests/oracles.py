"""Independent reference implementations used by the tests.

Nothing here imports the library's casting or projection code: these are
plain scalar re-derivations kept deliberately naive.
"""
from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------- ray casting


def _ray_plane_t(o, d, axis, value):
    if d[axis] == 0.0:
        return math.inf
    t = (value - o[axis]) / d[axis]
    return t if t > 0 else math.inf


def _ray_box_ts(o, d, lo, hi):
    """All positive hits of a ray with the six face rectangles of a box."""
    hits = []
    for axis in range(3):
        for value in (lo[axis], hi[axis]):
            t = _ray_plane_t(o, d, axis, value)
            if not math.isfinite(t):
                continue
            p = [o[k] + t * d[k] for k in range(3)]
            others = [k for k in range(3) if k != axis]
            eps = 1e-12
            if all(lo[k] - eps <= p[k] <= hi[k] + eps for k in others):
                hits.append(t)
    return hits


def _ray_sphere_ts(o, d, c, r):
    oc = [o[k] - c[k] for k in range(3)]
    b = sum(oc[k] * d[k] for k in range(3))
    cc = sum(x * x for x in oc) - r * r
    disc = b * b - cc
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return [t for t in (-b - s, -b + s) if t > 0]


def brute_force_hit(scene, origin, direction):
    """``(t, label name)`` of the nearest surface by testing every primitive."""
    from omnisynth.environment.scene import Box

    o = [float(x) for x in origin]
    d = [float(x) for x in direction]
    hx, hy, hz = scene.width / 2, scene.depth / 2, scene.height / 2
    best = (math.inf, None)
    walls = ((0, hx, "wall_+X"), (0, -hx, "wall_-X"), (1, hy, "wall_+Y"), (1, -hy, "wall_-Y"), (2, hz, "ceiling"), (2, -hz, "floor"))
    for axis, value, name in walls:
        t = _ray_plane_t(o, d, axis, value)
        if t < best[0]:
            best = (t, name)
    for obj in scene.objects:
        if isinstance(obj, Box):
            lo = [obj.center[k] - obj.size[k] / 2 for k in range(3)]
            hi = [obj.center[k] + obj.size[k] / 2 for k in range(3)]
            ts = _ray_box_ts(o, d, lo, hi)
        else:
            ts = _ray_sphere_ts(o, d, obj.center, obj.radius)
        for t in ts:
            if t < best[0]:
                best = (t, obj.label)
    return best


# ---------------------------------------------------------------- catadioptric forward model


def table_psi(mirror, d, p):
    """Mirror parameter from the (xi, Psi) table form of the sphere model."""
    if mirror == "parabolic":
        return 1.0 + 2.0 * p
    return (d + 2.0 * p) / math.sqrt(d * d + 4.0 * p * p)


def table_xi(mirror, d, p):
    if mirror == "parabolic":
        return 1.0
    return d / math.sqrt(d * d + 4.0 * p * p)


def sphere_model_project(point, mirror, d, p, K, R=None):
    """Forward sphere model: point -> unit sphere -> h -> K R M (Psi form).

    ``point`` is in the model's image-aligned frame (x right, y down, z out).
    Returns pixel ``(u, v)`` or None when the point is behind the mirror.
    """
    x, y, z = (float(c) for c in point)
    n = math.sqrt(x * x + y * y + z * z)
    xs, ys, zs = x / n, y / n, z / n
    xi = table_xi(mirror, d, p)
    psi = table_psi(mirror, d, p)
    w = zs + xi
    if w <= 0:
        return None
    xb, yb = xs / w, ys / w
    mx, my = (psi - xi) * xb, (xi - psi) * yb
    R = np.eye(3) if R is None else np.asarray(R)
    q = R @ np.array([mx, my, 1.0])
    fx, fy, u0, v0 = K
    return fx * q[0] / q[2] + u0 * 1.0, fy * q[1] / q[2] + v0


# ---------------------------------------------------------------- spherical mirror


def reflect_off_sphere(view_dir, Z_s, R_s):
    """Trace a camera ray from the origin to the sphere (center on +Z) and
    reflect it.  Returns ``(hit point, reflected unit direction)``."""
    v = np.asarray(view_dir, dtype=float)
    v = v / np.linalg.norm(v)
    C = np.array([0.0, 0.0, Z_s])
    b = v @ C
    disc = b * b - (C @ C - R_s * R_s)
    if disc < 0:
        return None
    t = b - math.sqrt(disc)
    P = t * v
    nrm = (P - C) / R_s
    out = v - 2 * (v @ nrm) * nrm
    return P, out / np.linalg.norm(out)


# ---------------------------------------------------------------- misc


def angle_between(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))


def ypr(yaw, pitch, roll):
    """Independent Rz Ry Rx builder."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    return Rz @ Ry @ Rx


class CountingOracle:
    """Wraps an oracle and counts acquisitions."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = []

    @property
    def label_names(self):
        return self.inner.label_names

    def acquire(self, center, modes):
        self.calls.append(np.array(center, dtype=float))
        return self.inner.acquire(center, modes)
