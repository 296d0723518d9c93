"""Non-central camera models as Plücker lines, their optical-center groups,
and the composer that acquires the environment once per group.

Models
------
NCPanorama
    Circle of optical centers of radius ``R_c`` about ``center``, tilted by
    ``pitch`` about +Y.  One center per image column.
ConicalCat
    Perspective camera on the axis of a conical mirror.  Rays of one image
    ring cross the axis at the same height ``Z_r``.
SphericalCat
    Perspective camera at the origin looking along +Z at a spherical mirror
    of radius ``R_s`` whose near surface is ``Z_m`` away.  Rays of one ring
    cross the axis at a common point.

The two catadioptric models index pixels by ring ``k = round(r_hat)`` around
the image centre and evaluate every ray of a ring at radius exactly ``k``
(with the pixel's own azimuth), so each ring has one optical center.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from omnisynth.central import ImageGrid, _modes_tuple, build_images
from omnisynth.environment.oracle import DirectAcquisition
from omnisynth.environment.scene import RaySample, cast_chunked
from omnisynth.errors import DomainError
from omnisynth.geometry import PluckerRay, Pose, cross, norm, rotate


@dataclass(frozen=True)
class NCPanorama:
    R_c: float = 0.5
    center: tuple = (0.0, 0.0, 0.0)
    pitch: float = 0.0

    def __post_init__(self):
        # R_c = 0 is kept legal: it is the central limit
        if not self.R_c >= 0:
            raise DomainError("R_c must be non-negative")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


@dataclass(frozen=True)
class ConicalCat:
    Z_c: float
    R_c: float
    tau: float
    host_half_fov: float = np.radians(28.0)

    def __post_init__(self):
        if not 0 < self.tau < np.pi / 4:
            raise DomainError("tau must be in (0, pi/4)")
        if not self.R_c > 0:
            raise DomainError("R_c must be positive")
        if not 0 < self.host_half_fov < np.pi / 2:
            raise DomainError("host_half_fov must be in (0, pi/2)")

    @classmethod
    def from_apex(cls, apex_distance=0.1, tau=np.radians(30.0), host_half_fov=np.radians(28.0)):
        """Geometry of a camera at the origin looking at a cone apex
        ``apex_distance`` away: the camera's mirror images sit on a circle of
        radius ``a sin 2tau`` at height ``a (1 - cos 2tau)``."""
        a = apex_distance
        return cls(a * (1.0 - np.cos(2 * tau)), a * np.sin(2 * tau), tau, host_half_fov)


@dataclass(frozen=True)
class SphericalCat:
    Z_m: float = 0.1
    R_s: float = 0.05
    host_half_fov: float | None = None

    def __post_init__(self):
        if not self.R_s > 0:
            raise DomainError("R_s must be positive")
        if not self.Z_m > 0:
            raise DomainError("Z_m must be positive")

    @property
    def Z_s(self):
        return self.Z_m + self.R_s

    @property
    def Z_rel(self):
        return self.Z_s / self.R_s

    @property
    def half_fov(self):
        """Host camera half field of view; defaults to the mirror silhouette."""
        if self.host_half_fov is not None:
            return self.host_half_fov
        return np.arctan(1.0 / np.sqrt(self.Z_rel**2 - 1.0))


NONCENTRAL_MODELS = (NCPanorama, ConicalCat, SphericalCat)


@dataclass
class OpticalCenterGroup:
    key: int
    center: np.ndarray
    pixels: np.ndarray  # flat pixel indices
    n_valid: int


# ---------------------------------------------------------------- panorama


def _tilt(pitch):
    c, s = np.cos(pitch), np.sin(pitch)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def nc_panorama_theta(u, grid: ImageGrid):
    return (2.0 * np.asarray(u, dtype=float) / grid.width - 1.0) * np.pi


def nc_panorama_center(u, grid: ImageGrid, model: NCPanorama):
    """Optical center of the column through ``u``."""
    theta = nc_panorama_theta(u, grid)
    c, s = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(model.pitch), np.sin(model.pitch)
    offset = np.stack([c * cp, s, c * sp], axis=-1)
    return np.asarray(model.center) + model.R_c * offset


def nc_panorama_ray(u, v, grid: ImageGrid, model: NCPanorama) -> PluckerRay:
    """Plücker line of pixel ``(u, v)``: direction at elevation
    ``(1/2 - v/v_max) pi`` through the column's optical center."""
    theta = nc_panorama_theta(u, grid)
    phi = (0.5 - np.asarray(v, dtype=float) / grid.height) * np.pi
    cphi = np.cos(phi)
    xi = np.stack(np.broadcast_arrays(cphi * np.cos(theta), cphi * np.sin(theta), np.sin(phi)), axis=-1)
    if model.pitch != 0:
        xi = rotate(_tilt(model.pitch), xi)
    center = nc_panorama_center(u, grid, model)
    center = np.broadcast_to(center, xi.shape)
    return PluckerRay(xi, cross(center, xi))


# ---------------------------------------------------------------- catadioptric rings


def ring_coordinates(u, v, grid: ImageGrid):
    """``(r_hat, theta)`` about the image centre, ``theta`` counter-clockwise
    from the +u axis with image rows growing downwards."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0, v0 = grid.width / 2.0, grid.height / 2.0
    return np.hypot(u - u0, v - v0), np.arctan2(v0 - v, u - u0)


def ring_to_pixel(r_hat, theta, grid: ImageGrid):
    return grid.width / 2.0 + r_hat * np.cos(theta), grid.height / 2.0 - r_hat * np.sin(theta)


def conical_cot_phi(r, tau):
    t = np.tan(2 * tau)
    return (1.0 + r * t) / (t - r)


def conical_ray(u, v, grid: ImageGrid, model: ConicalCat, r_hat=None):
    """Plücker line, axis height ``Z_r`` and validity per pixel.

    ``r_hat`` overrides the pixel radius (the composer passes the ring
    radius).  The image radius is mapped linearly to the host camera's
    tangent plane: ``r = r_hat tan(host_half_fov) / r_hat_max``.
    """
    rh, theta = ring_coordinates(u, v, grid)
    if r_hat is not None:
        rh = np.broadcast_to(np.asarray(r_hat, dtype=float), rh.shape)
    r = rh * np.tan(model.host_half_fov) / grid.r_max
    t = np.tan(2 * model.tau)
    phi = np.arctan2(t - r, 1.0 + r * t)
    valid = (t - r > 0) & (rh <= grid.r_max)
    cot = np.where(valid, (1.0 + r * t) / np.where(valid, t - r, 1.0), 0.0)
    Z_r = model.Z_c + model.R_c * cot
    sp, cp = np.sin(phi), np.cos(phi)
    ct, st = np.cos(theta), np.sin(theta)
    xi = np.stack([sp * ct, sp * st, cp], axis=-1)
    xi_bar = np.stack([-Z_r * sp * st, Z_r * sp * ct, np.zeros_like(sp)], axis=-1)
    return PluckerRay(xi, xi_bar), Z_r, valid


def spherical_terms(x, y, z, Z_rel):
    """``(gamma, delta, epsilon, zeta)`` of the spherical mirror model."""
    r2 = x * x + y * y
    rho2 = r2 + z * z
    Zr2 = Z_rel * Z_rel
    gamma = (-r2 * Zr2 + rho2) * Zr2
    sg = np.sqrt(np.maximum(gamma, 0.0))
    delta = 2 * r2 * Zr2 * Zr2 - 2 * z * sg * Zr2 - 3 * rho2 * Zr2 + rho2
    eps = (-r2 + z * z) * Zr2 + 2 * sg * z + rho2
    zeta = 2 * r2 * z * Zr2 * Zr2 - z * rho2 * Zr2 - 2 * sg * (-r2 * Zr2 + rho2) - z * rho2
    return gamma, delta, eps, zeta


# the model's own frame sits at the sphere centre with y and z reversed
_SPHERE_FLIP = np.diag([1.0, -1.0, -1.0])


def spherical_cat_ray(u, v, grid: ImageGrid, model: SphericalCat, r_hat=None):
    """Plücker line (camera frame), axis crossing height and validity.

    The pixel is lifted to the host viewing direction ``(r cos t, r sin t, 1)``
    with ``r = r_hat tan(half_fov) / r_hat_max``; the reflected line is built
    in the mirror frame and moved to the camera frame.
    """
    rh, theta = ring_coordinates(u, v, grid)
    if r_hat is not None:
        rh = np.broadcast_to(np.asarray(r_hat, dtype=float), rh.shape)
    r = rh * np.tan(model.half_fov) / grid.r_max
    x, y = r * np.cos(theta), r * np.sin(theta)
    z = np.ones_like(x)
    gamma, delta, eps, zeta = spherical_terms(x, y, z, model.Z_rel)
    Zs = model.Z_s
    xi = np.stack([-x * delta, y * delta, -zeta], axis=-1)
    xi_bar = np.stack([eps * y * Zs, eps * x * Zs, np.zeros_like(x)], axis=-1)
    n = norm(xi)
    valid = (gamma >= 0) & (rh <= grid.r_max) & (n > 0) & (delta != 0)
    n = np.where(n > 0, n, 1.0)[..., None]
    xi, xi_bar = xi / n, xi_bar / n
    xi_c = rotate(_SPHERE_FLIP, xi)
    # the crossing height depends on r alone; evaluating it off-azimuth keeps
    # every pixel of a ring on one bit-identical center near the silhouette,
    # where delta is small and the reflected moment is ill-conditioned
    _, d0, e0, _ = spherical_terms(r, np.zeros_like(r), z, model.Z_rel)
    with np.errstate(divide="ignore", invalid="ignore"):
        z_cross = np.where(valid, Zs * (d0 + e0) / d0, 0.0)
    center = np.stack([np.zeros_like(z_cross), np.zeros_like(z_cross), z_cross], axis=-1)
    xi_bar_c = np.where(valid[..., None], cross(center, xi_c), rotate(_SPHERE_FLIP, xi_bar) + cross(np.array([0.0, 0.0, Zs]), xi_c))
    return PluckerRay(xi_c, xi_bar_c), z_cross, valid


def spherical_alt_axis_height(u, v, grid: ImageGrid, model: SphericalCat):
    """Alternative axis height ``-zeta / delta``, kept for diagnostics; the
    composer does not use it."""
    rh, theta = ring_coordinates(u, v, grid)
    r = rh * np.tan(model.half_fov) / grid.r_max
    _, delta, _, zeta = spherical_terms(r * np.cos(theta), r * np.sin(theta), np.ones_like(r), model.Z_rel)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -zeta / delta


# ---------------------------------------------------------------- shared entry points


def noncentral_pixel_rays(model, grid: ImageGrid, u=None, v=None):
    """Per-pixel ``(PluckerRay, group key, optical center, valid)`` in the
    camera frame.  Rays are snapped to their group (column centre or ring
    radius) so that each passes exactly through its group's center."""
    if u is None:
        u, v = grid.pixel_centers()
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(model, NCPanorama):
        key = np.clip(np.floor(u), 0, grid.width - 1).astype(np.int64)
        uc = key + 0.5
        ray = nc_panorama_ray(uc, v, grid, model)
        center = np.broadcast_to(nc_panorama_center(uc, grid, model), ray.xi.shape)
        valid = np.ones(u.shape, dtype=bool)
        return ray, key, np.array(center), valid
    rh, _ = ring_coordinates(u, v, grid)
    key = np.rint(rh).astype(np.int64)
    if isinstance(model, ConicalCat):
        ray, z_axis, valid = conical_ray(u, v, grid, model, r_hat=key)
    elif isinstance(model, SphericalCat):
        ray, z_axis, valid = spherical_cat_ray(u, v, grid, model, r_hat=key)
    else:
        raise TypeError(f"not a non-central model: {model!r}")
    valid = valid & (rh <= grid.r_max)
    center = np.stack([np.zeros_like(z_axis), np.zeros_like(z_axis), z_axis], axis=-1)
    return ray, key, center, valid


def optical_center_groups(model, grid: ImageGrid):
    """Partition of every pixel into optical-center groups, ordered by key
    (columns left to right, rings from the centre outwards)."""
    ray, key, center, valid = noncentral_pixel_rays(model, grid)
    flat_key = key.ravel()
    flat_valid = valid.ravel()
    order = np.argsort(flat_key, kind="stable")
    keys, starts = np.unique(flat_key[order], return_index=True)
    bounds = list(starts[1:]) + [len(order)]
    groups = []
    flat_center = center.reshape(-1, 3)
    for k, s, e in zip(keys, starts, bounds):
        pix = order[s:e]
        ok = pix[flat_valid[pix]]
        c = flat_center[ok[0]] if ok.size else flat_center[pix[0]]
        groups.append(OpticalCenterGroup(int(k), c.copy(), pix, int(ok.size)))
    return groups


def compose_noncentral(model, pose: Pose, grid: ImageGrid, mode, oracle, return_groups=False):
    """Render a non-central model.

    Every group with at least one in-FOV pixel triggers exactly one
    ``oracle.acquire`` at its world-frame optical center; its pixels are then
    resolved by casting their lines from that center.
    """
    modes, single = _modes_tuple(mode)
    ray, key, center, valid = noncentral_pixel_rays(model, grid)
    groups = optical_center_groups(model, grid)
    xi = ray.xi.reshape(-1, 3)
    world_dirs = rotate(pose.orientation, xi)
    world_dirs = world_dirs / norm(world_dirs)[:, None]
    flat_valid = valid.ravel()

    acquisitions = []
    for g in groups:
        if g.n_valid == 0:
            continue
        world_center = pose.position + rotate(pose.orientation, g.center)
        acq = oracle.acquire(world_center, modes)
        acquisitions.append((g, acq, g.pixels[flat_valid[g.pixels]]))

    n = grid.width * grid.height
    color = np.zeros((n, 3), dtype=np.uint8)
    label = np.zeros(n, dtype=np.int64)
    depth = np.full(n, np.nan)
    direct = [a for _, a, _ in acquisitions]
    if direct and all(isinstance(a, DirectAcquisition) and a.scene is direct[0].scene for a in direct):
        # exact casting is per ray, so one batched call gives the same bits
        idx = np.concatenate([p for _, _, p in acquisitions])
        origins = np.concatenate([np.broadcast_to(a.center, (len(p), 3)) for _, a, p in acquisitions])
        s = cast_chunked(direct[0].scene, origins, world_dirs[idx], workers=direct[0].workers)
        color[idx], label[idx], depth[idx] = s.color, s.label, s.depth
    else:
        for _, acq, pix in acquisitions:
            s = acq.sample(world_dirs[pix], modes)
            if s.color is not None:
                color[pix] = s.color
            if s.label is not None:
                label[pix] = s.label
            if s.depth is not None:
                depth[pix] = s.depth
    vmask = flat_valid
    sample = RaySample(color=color[vmask], label=label[vmask], depth=depth[vmask])
    images = build_images(grid.shape, valid, sample, modes)
    result = images[modes[0]] if single else images
    if return_groups:
        world = [
            (g.key, pose.position + rotate(pose.orientation, g.center), g.n_valid) for g, _, _ in acquisitions
        ]
        return result, world
    return result


def write_centers_json(path, model, group_centers):
    """Sidecar listing each acquired group's world-frame optical center."""
    doc = {
        "model": type(model).__name__,
        "groups": [
            {"key": int(k), "center": [float(x) for x in c], "pixels": int(n)} for k, c, n in group_centers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
