"""Central camera models: pixel -> ray back-projection, ray -> pixel forward
maps, and the composer that paints an image from an environment oracle.

Camera frame conventions.  Panoramic models (equirectangular, cylindrical)
use the world-style frame: +X forward, +Z up.  Revolution-symmetric models
look down +Z; a pixel below the image centre sees towards +X and a pixel to
the right of it towards -Y.  Kannala-Brandt, Scaramuzza and the central
catadioptric model are naturally written in the image frame (x right, y down,
z forward); :data:`IMAGE_TO_CAMERA` takes their rays into the camera frame.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from omnisynth.errors import DomainError, NumericError
from omnisynth.geometry import (
    ElevationDir,
    PolarDir,
    Pose,
    dir_to_spherical,
    is_rotation,
    normalize,
    rotate,
    spherical_to_dir,
)
from omnisynth.imaging import Image, RenderMode, label_color

IMAGE_TO_CAMERA = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class ImageGrid:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise DomainError("image size must be integral")
        if self.width < 1 or self.height < 1:
            raise DomainError("image size must be at least 1x1")

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def r_max(self):
        """Radius of the rendered disc for revolution-symmetric models."""
        return min(self.width, self.height) / 2.0

    def pixel_centers(self):
        """``(u, v)`` arrays of shape ``(H, W)`` at half-integer pixel centres."""
        u = np.arange(self.width) + 0.5
        v = np.arange(self.height) + 0.5
        vv, uu = np.meshgrid(v, u, indexing="ij")
        return uu, vv


class Lens(enum.Enum):
    EQUIANGULAR = "equiangular"
    STEREOGRAPHIC = "stereographic"
    ORTHOGONAL = "orthogonal"
    EQUISOLID = "equisolid"


class Mirror(enum.Enum):
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class Equirect:
    pass


@dataclass(frozen=True)
class Cylindrical:
    fov_h: float = 2 * np.pi
    fov_v: float = np.pi / 2
    true_cylinder: bool = False

    def __post_init__(self):
        if not 0 < self.fov_h <= 2 * np.pi:
            raise DomainError("fov_h must be in (0, 2pi]")
        if not 0 < self.fov_v < np.pi:
            raise DomainError("fov_v must be in (0, pi)")


@dataclass(frozen=True)
class FishEye:
    lens: Lens
    f: float
    flip_azimuth: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lens", Lens(self.lens))
        if not self.f > 0:
            raise DomainError("focal length must be positive")


@dataclass(frozen=True)
class Catadioptric:
    """Unified sphere model.  ``K`` is ``(f_x, f_y, u_0, v_0)`` in pixels and
    ``R_c`` a rotation given as nested tuples."""

    mirror: Mirror
    d: float
    p: float
    K: tuple
    R_c: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        object.__setattr__(self, "mirror", Mirror(self.mirror))
        if not (self.d > 0 and self.p > 0):
            raise DomainError("mirror parameters d and p must be positive")
        if len(self.K) != 4 or not (self.K[0] > 0 and self.K[1] > 0):
            raise DomainError("K must be (f_x, f_y, u_0, v_0) with positive focal lengths")
        R = np.asarray(self.R_c, dtype=float)
        if not is_rotation(R):
            raise DomainError("R_c is not a rotation")
        object.__setattr__(self, "K", tuple(float(k) for k in self.K))
        object.__setattr__(self, "R_c", tuple(tuple(float(x) for x in row) for row in R))

    @property
    def xi(self):
        if self.mirror is Mirror.PARABOLIC:
            return 1.0
        return self.d / np.sqrt(self.d**2 + 4 * self.p**2)

    @property
    def eta(self):
        if self.mirror is Mirror.PARABOLIC:
            return -2.0 * self.p
        return -2.0 * self.p / np.sqrt(self.d**2 + 4 * self.p**2)

    def H(self):
        """``K_c R_c M_c`` with ``M_c = diag(-eta, eta, 1)``."""
        fx, fy, u0, v0 = self.K
        K = np.array([[fx, 0.0, u0], [0.0, fy, v0], [0.0, 0.0, 1.0]])
        M = np.diag([-self.eta, self.eta, 1.0])
        return K @ np.asarray(self.R_c) @ M


@dataclass(frozen=True)
class Scaramuzza:
    a: tuple
    center: tuple | None = None

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        if not a or a[0] == 0:
            raise DomainError("a_0 must be non-zero")
        object.__setattr__(self, "a", a)
        if self.center is not None:
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def principal_point(self, grid):
        if self.center is None:
            return grid.width / 2.0, grid.height / 2.0
        return self.center


@dataclass(frozen=True)
class KannalaBrandt:
    fx: float
    fy: float
    cx: float
    cy: float
    k: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError("focal lengths must be positive")
        k = tuple(float(x) for x in self.k)
        if len(k) != 4:
            raise DomainError("Kannala-Brandt needs exactly four coefficients k1..k4")
        object.__setattr__(self, "k", k)


CENTRAL_MODELS = (Equirect, Cylindrical, FishEye, Catadioptric, Scaramuzza, KannalaBrandt)
DISC_MODELS = (FishEye, Catadioptric, Scaramuzza, KannalaBrandt)


# ---------------------------------------------------------------- defaults


def fisheye_for_fov(lens, grid: ImageGrid, fov=np.radians(185.0), flip_azimuth=False) -> FishEye:
    """Fish-eye whose disc edge sees the polar angle ``fov / 2``."""
    lens = Lens(lens)
    half = fov / 2.0
    r = grid.r_max
    if lens is Lens.EQUIANGULAR:
        f = r / half
    elif lens is Lens.STEREOGRAPHIC:
        f = r / (2.0 * np.tan(half / 2.0))
    elif lens is Lens.ORTHOGONAL:
        f = r / np.sin(min(half, np.pi / 2))
    else:
        f = r / np.sin(min(half, np.pi) / 2.0)
    return FishEye(lens, float(f), flip_azimuth)


def catadioptric_for_fov(mirror, grid: ImageGrid, d=1.0, p=0.25, fov=np.radians(200.0)) -> Catadioptric:
    """Catadioptric camera with K chosen so the disc edge sees ``fov / 2``."""
    proto = Catadioptric(mirror, d, p, (1.0, 1.0, 0.0, 0.0))
    xi = proto.xi
    half = fov / 2.0
    if np.cos(half) + xi <= 0:
        raise DomainError("requested field of view exceeds what the mirror can see")
    rbar = np.sin(half) / (np.cos(half) + xi)
    f = grid.r_max / (-proto.eta * rbar)
    return Catadioptric(mirror, d, p, (f, f, grid.width / 2.0, grid.height / 2.0))


def scaramuzza_fit_equiangular(r_max, fov=np.radians(190.0), degree=4, samples=2000):
    """Least-squares polynomial for an equiangular fish-eye of the given disc
    radius and field of view, in the usual negative-``a_0`` convention."""
    f = r_max / (fov / 2.0)
    rho = np.linspace(0.0, r_max, samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        target = np.where(rho == 0, -f, -rho / np.tan(rho / f))
    A = np.vander(rho, degree + 1, increasing=True)
    a, *_ = np.linalg.lstsq(A, target, rcond=None)
    return tuple(float(x) for x in a)


def scaramuzza_for_fov(grid: ImageGrid, fov=np.radians(190.0), degree=4) -> Scaramuzza:
    return Scaramuzza(scaramuzza_fit_equiangular(grid.r_max, fov, degree), None)


def kannala_brandt_for_fov(grid: ImageGrid, fov=np.radians(190.0), k=(0.0, 0.0, 0.0, 0.0)) -> KannalaBrandt:
    f = grid.r_max / (fov / 2.0)
    return KannalaBrandt(f, f, grid.width / 2.0, grid.height / 2.0, k)


# ---------------------------------------------------------------- back-projection


def equirect_pixel_to_angles(u, v, grid: ImageGrid) -> ElevationDir:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return ElevationDir((2.0 * u / grid.width - 1.0) * np.pi, (0.5 - v / grid.height) * np.pi)


def cylindrical_pixel_to_angles(u, v, grid: ImageGrid, fov_h, fov_v, true_cylinder=False) -> ElevationDir:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = (2.0 * u / grid.width - 1.0) * fov_h / 2.0
    s = 1.0 - 2.0 * v / grid.height
    if true_cylinder:
        # height on the cylinder wall is linear in v
        phi = np.arctan(s * np.tan(fov_v / 2.0))
    else:
        phi = s * fov_v / 2.0
    return ElevationDir(theta, phi)


def fisheye_polar_angle(r_hat, lens, f):
    """Polar angle for image radius ``r_hat``; NaN where the lens cannot reach."""
    r_hat = np.asarray(r_hat, dtype=float)
    lens = Lens(lens)
    x = r_hat / f
    if lens is Lens.EQUIANGULAR:
        return x
    if lens is Lens.STEREOGRAPHIC:
        return 2.0 * np.arctan(x / 2.0)
    with np.errstate(invalid="ignore"):
        s = np.where(x <= 1.0, np.arcsin(np.minimum(x, 1.0)), np.nan)
    return s if lens is Lens.ORTHOGONAL else 2.0 * s


def fisheye_pixel_to_ray(u, v, grid: ImageGrid, lens, f, flip_azimuth=False):
    """Rays ``(..., 3)`` and a validity mask for a fish-eye camera."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0, v0 = grid.width / 2.0, grid.height / 2.0
    r_hat = np.hypot(u - u0, v - v0)
    theta = np.arctan2(u0 - u, v - v0)
    if flip_azimuth:
        theta = -theta
    phi = fisheye_polar_angle(r_hat, lens, f)
    valid = (r_hat <= grid.r_max) & np.isfinite(phi)
    ray = spherical_to_dir(PolarDir(theta, np.where(valid, phi, 0.0)))
    return ray, valid


def unified_sphere_lift(vbar, xi):
    """Inverse of the sphere-model map ``h``: normalized-plane point to unit
    ray.  Invalid where the square-root argument is negative."""
    vbar = np.asarray(vbar, dtype=float)
    x, y, z = vbar[..., 0], vbar[..., 1], vbar[..., 2]
    rad = z * z + (1.0 - xi * xi) * (x * x + y * y)
    valid = rad >= 0
    lam = (z * xi + np.sqrt(np.where(valid, rad, 0.0))) / (x * x + y * y + z * z)
    ray = np.stack([lam * x, lam * y, lam * z - xi], axis=-1)
    n = np.sqrt(ray[..., 0] ** 2 + ray[..., 1] ** 2 + ray[..., 2] ** 2)
    valid &= n > 0
    ray = ray / np.where(n > 0, n, 1.0)[..., None]
    return ray, valid


def catadioptric_pixel_to_ray(u, v, model: Catadioptric):
    """Image-frame rays for a central catadioptric camera (no disc mask)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    Hinv = np.linalg.inv(model.H())
    vhat = np.stack([u, v, np.ones_like(u)], axis=-1)
    vbar = rotate(Hinv, vhat)
    return unified_sphere_lift(vbar, model.xi)


def scaramuzza_poly(a, rho):
    return np.polynomial.polynomial.polyval(rho, np.asarray(a))


def scaramuzza_pixel_to_ray(u, v, model: Scaramuzza, grid: ImageGrid):
    """``normalize(u'', v'', f(rho))`` in the model's own image frame."""
    u0, v0 = model.principal_point(grid)
    du = np.asarray(u, dtype=float) - u0
    dv = np.asarray(v, dtype=float) - v0
    rho = np.hypot(du, dv)
    return normalize(np.stack([du, dv, scaramuzza_poly(model.a, rho)], axis=-1))


def kb_distortion(theta, k):
    t2 = theta * theta
    return theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))))


def kb_distortion_derivative(theta, k):
    t2 = theta * theta
    return 1.0 + t2 * (3 * k[0] + t2 * (5 * k[1] + t2 * (7 * k[2] + t2 * 9 * k[3])))


def kb_solve_theta(target, k, iterations=50, scan=512, tol=1e-15):
    """Solve ``d(theta) = target`` on [0, pi]; NaN where there is no root.

    Newton from ``theta = target``; entries that fail to converge inside the
    interval fall back to bisection on the first sign change of a scan.
    """
    target = np.asarray(target, dtype=float)
    theta = target.copy()
    converged = np.zeros(target.shape, dtype=bool)
    for _ in range(iterations):
        g = kb_distortion(theta, k) - target
        dg = kb_distortion_derivative(theta, k)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(converged | (dg == 0), 0.0, g / dg)
        theta = theta - step
        converged |= np.abs(step) <= tol * np.maximum(1.0, np.abs(theta))
    ok = converged & (theta >= 0) & (theta <= np.pi) & np.isfinite(theta)
    ok &= np.abs(kb_distortion(theta, k) - target) <= 1e-12 * np.maximum(1.0, np.abs(target))
    if ok.all():
        return theta
    bad = np.flatnonzero(~ok.ravel())
    tb = target.ravel()[bad]
    grid = np.linspace(0.0, np.pi, scan + 1)
    vals = kb_distortion(grid, k)[None, :] - tb[:, None]
    sign_change = (vals[:, :-1] <= 0) & (vals[:, 1:] >= 0) | (vals[:, :-1] >= 0) & (vals[:, 1:] <= 0)
    has = sign_change.any(axis=1)
    first = np.argmax(sign_change, axis=1)
    lo = grid[first]
    hi = grid[first + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = kb_distortion(mid, k) - tb
        flo = kb_distortion(lo, k) - tb
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(1.0, hi)):
            break
    else:
        if np.any(has & (hi - lo > 1e-9)):
            raise NumericError("Kannala-Brandt inversion did not converge")
    out = theta.ravel().copy()
    out[bad] = np.where(has, 0.5 * (lo + hi), np.nan)
    return out.reshape(target.shape)


def kannala_brandt_pixel_to_ray(u, v, model: KannalaBrandt):
    """Image-frame rays and validity (no disc mask)."""
    x = (np.asarray(u, dtype=float) - model.cx) / model.fx
    y = (np.asarray(v, dtype=float) - model.cy) / model.fy
    d = np.hypot(x, y)
    theta = kb_solve_theta(d, model.k)
    valid = np.isfinite(theta)
    psi = np.arctan2(y, x)
    ray = spherical_to_dir(PolarDir(psi, np.where(valid, theta, 0.0)))
    return ray, valid


def disc_mask(u, v, grid: ImageGrid):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.hypot(u - grid.width / 2.0, v - grid.height / 2.0) <= grid.r_max


def back_project(model, grid: ImageGrid, u=None, v=None):
    """Camera-frame unit rays ``(..., 3)`` and validity mask.

    Without ``u, v`` the whole grid is back-projected at pixel centres.
    Invalid rays are set to the optical axis so downstream math stays finite.
    """
    if u is None:
        u, v = grid.pixel_centers()
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(model, Equirect):
        ray = spherical_to_dir(equirect_pixel_to_angles(u, v, grid))
        valid = np.ones(u.shape, dtype=bool)
    elif isinstance(model, Cylindrical):
        ray = spherical_to_dir(cylindrical_pixel_to_angles(u, v, grid, model.fov_h, model.fov_v, model.true_cylinder))
        valid = np.ones(u.shape, dtype=bool)
    elif isinstance(model, FishEye):
        ray, valid = fisheye_pixel_to_ray(u, v, grid, model.lens, model.f, model.flip_azimuth)
    elif isinstance(model, Catadioptric):
        ray, valid = catadioptric_pixel_to_ray(u, v, model)
        ray = rotate(IMAGE_TO_CAMERA, ray)
        valid &= disc_mask(u, v, grid)
    elif isinstance(model, Scaramuzza):
        ray = scaramuzza_pixel_to_ray(u, v, model, grid)
        # look down +Z at the principal point whatever the sign of a_0
        ray[..., 2] *= np.sign(model.a[0])
        ray = rotate(IMAGE_TO_CAMERA, ray)
        valid = disc_mask(u, v, grid)
    elif isinstance(model, KannalaBrandt):
        ray, valid = kannala_brandt_pixel_to_ray(u, v, model)
        ray = rotate(IMAGE_TO_CAMERA, ray)
        valid &= disc_mask(u, v, grid)
    else:
        raise TypeError(f"not a central model: {model!r}")
    ray = np.where(valid[..., None], ray, np.array([0.0, 0.0, 1.0]))
    return ray, valid


# ---------------------------------------------------------------- forward maps


def project(model, grid: ImageGrid, rays):
    """Camera-frame directions to continuous pixel coordinates.

    Returns ``(u, v, valid)``; ``valid`` is False where the model cannot see
    the direction or the pixel falls outside the rendered area.
    """
    rays = normalize(rays)
    W, H = grid.width, grid.height
    if isinstance(model, Equirect):
        s = dir_to_spherical(rays, ElevationDir)
        u = (s.theta / np.pi + 1.0) * 0.5 * W
        v = (0.5 - s.phi / np.pi) * H
        return u, v, np.ones(u.shape, dtype=bool)
    if isinstance(model, Cylindrical):
        s = dir_to_spherical(rays, ElevationDir)
        half_h, half_v = model.fov_h / 2.0, model.fov_v / 2.0
        u = (s.theta / half_h + 1.0) * 0.5 * W
        if model.true_cylinder:
            t = np.tan(s.phi) / np.tan(half_v)
        else:
            t = s.phi / half_v
        v = (1.0 - t) * 0.5 * H
        valid = (np.abs(s.theta) <= half_h) & (np.abs(t) <= 1.0)
        return u, v, valid
    if isinstance(model, FishEye):
        s = dir_to_spherical(rays, PolarDir)
        theta = -s.theta if model.flip_azimuth else s.theta
        phi, f = s.phi, model.f
        valid = np.ones(phi.shape, dtype=bool)
        if model.lens is Lens.EQUIANGULAR:
            r_hat = f * phi
        elif model.lens is Lens.STEREOGRAPHIC:
            valid = phi < np.pi
            r_hat = 2.0 * f * np.tan(np.where(valid, phi, 0.0) / 2.0)
        elif model.lens is Lens.ORTHOGONAL:
            valid = phi <= np.pi / 2
            r_hat = f * np.sin(phi)
        else:
            r_hat = f * np.sin(phi / 2.0)
        u = W / 2.0 - r_hat * np.sin(theta)
        v = H / 2.0 + r_hat * np.cos(theta)
        return u, v, valid & (r_hat <= grid.r_max)
    if isinstance(model, Catadioptric):
        native = rotate(IMAGE_TO_CAMERA.T, rays)
        denom = native[..., 2] + model.xi
        valid = denom > 0
        safe = np.where(valid, denom, 1.0)
        vbar = np.stack([native[..., 0] / safe, native[..., 1] / safe, np.ones_like(safe)], axis=-1)
        vhat = rotate(model.H(), vbar)
        u = vhat[..., 0] / vhat[..., 2]
        v = vhat[..., 1] / vhat[..., 2]
        return u, v, valid & disc_mask(u, v, grid)
    if isinstance(model, Scaramuzza):
        native = rotate(IMAGE_TO_CAMERA.T, rays)
        native[..., 2] *= np.sign(model.a[0])
        rho = _scaramuzza_radius(model.a, native)
        valid = np.isfinite(rho)
        rxy = np.hypot(native[..., 0], native[..., 1])
        scale = np.where(rxy > 0, np.where(valid, rho, 0.0) / np.where(rxy > 0, rxy, 1.0), 0.0)
        u0, v0 = model.principal_point(grid)
        u = u0 + native[..., 0] * scale
        v = v0 + native[..., 1] * scale
        return u, v, valid & disc_mask(u, v, grid)
    if isinstance(model, KannalaBrandt):
        native = rotate(IMAGE_TO_CAMERA.T, rays)
        x, y, z = native[..., 0], native[..., 1], native[..., 2]
        r = np.hypot(x, y)
        theta = np.arctan2(r, z)
        d = kb_distortion(theta, model.k)
        cos_psi = np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
        sin_psi = np.where(r > 0, y / np.where(r > 0, r, 1.0), 0.0)
        u = model.fx * d * cos_psi + model.cx
        v = model.fy * d * sin_psi + model.cy
        return u, v, disc_mask(u, v, grid)
    raise TypeError(f"not a central model: {model!r}")


def _scaramuzza_radius(a, native):
    """Smallest positive rho with ``r_xy f(rho) = z rho``; NaN if none."""
    x, y, z = native[..., 0].ravel(), native[..., 1].ravel(), native[..., 2].ravel()
    rxy = np.hypot(x, y)
    a = np.asarray(a, dtype=float)
    n = len(a)
    out = np.full(x.shape, np.nan)
    axial = rxy <= 1e-15 * np.abs(z)
    out[axial & (np.sign(z) == np.sign(a[0]))] = 0.0
    idx = np.flatnonzero(~axial)
    if idx.size:
        # coefficients of rxy*a(rho) - z*rho, lowest order first
        c = np.broadcast_to(a, (idx.size, n)) * rxy[idx, None]
        c = np.array(c)
        if n < 2:
            c = np.concatenate([c, np.zeros((idx.size, 1))], axis=1)
        c[:, 1] -= z[idx]
        while c.shape[1] > 1 and np.all(c[:, -1] == 0):
            c = c[:, :-1]
        deg = c.shape[1] - 1
        if deg >= 1:
            comp = np.zeros((idx.size, deg, deg))
            comp[:, 1:, :-1] = np.eye(deg - 1)
            lead = c[:, -1]
            comp[:, :, -1] = -c[:, :-1] / lead[:, None]
            roots = np.linalg.eigvals(comp)
            real = np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots.real))
            cand = np.where(real & (roots.real > 0), roots.real, np.inf)
            rho = cand.min(axis=1)
            # polish with Newton on the original polynomial
            for _ in range(3):
                fin = np.isfinite(rho)
                r0 = np.where(fin, rho, 0.0)
                val = _rowpolyval(c, r0)
                der = _rowpolyval(c[:, 1:] * np.arange(1, deg + 1), r0)
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = np.where(fin & (der != 0), val / der, 0.0)
                rho = rho - step
            out[idx] = np.where(np.isfinite(rho) & (rho > 0), rho, np.nan)
    return out.reshape(native.shape[:-1])


def _rowpolyval(c, x):
    acc = np.zeros_like(x)
    for j in range(c.shape[1] - 1, -1, -1):
        acc = acc * x + c[:, j]
    return acc


# ---------------------------------------------------------------- composition


def build_images(shape, valid, sample, modes):
    """Assemble per-mode :class:`Image` objects from samples of the valid pixels."""
    out = {}
    labels_full = np.zeros(shape, dtype=np.int64)
    if sample.label is not None:
        labels_full[valid] = sample.label
    for mode in modes:
        if mode is RenderMode.LIT:
            data = np.zeros(shape + (3,), dtype=np.uint8)
            data[valid] = sample.color
        elif mode is RenderMode.SEMANTIC:
            data = np.zeros(shape + (3,), dtype=np.uint8)
            data[valid] = label_color(sample.label)
        else:
            data = np.full(shape, np.nan)
            data[valid] = sample.depth
        out[mode] = Image(mode, data, valid.copy(), labels_full.copy() if sample.label is not None else None)
    return out


def _modes_tuple(mode):
    if isinstance(mode, RenderMode):
        return (mode,), True
    return tuple(RenderMode(m) for m in mode), False


def compose_central(model, pose: Pose, grid: ImageGrid, mode, oracle):
    """Render a central model.

    One acquisition is made at the pose position; every in-FOV pixel's ray is
    rotated into the world and looked up.  ``mode`` may be a single
    :class:`RenderMode` (returns an :class:`Image`) or a sequence (returns a
    dict keyed by mode).
    """
    modes, single = _modes_tuple(mode)
    rays, valid = back_project(model, grid)
    acq = oracle.acquire(pose.position, modes)
    world = normalize(rotate(pose.orientation, rays[valid]))
    sample = acq.sample(world, modes)
    images = build_images(grid.shape, valid, sample, modes)
    return images[modes[0]] if single else images
