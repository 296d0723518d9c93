"""The 13 supported camera models, their parameters and how to build them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from omnisynth import central as C
from omnisynth import noncentral as N


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str
    fixed: tuple  # (key, value) pairs implied by the entry
    params: tuple  # (key, default text, meaning)
    formula: str
    disc: bool
    central: bool
    default_size: tuple

    def describe(self):
        lines = [f"{self.name}  ({'central' if self.central else 'non-central'}; default {self.default_size[0]}x{self.default_size[1]})"]
        lines.append(f"    model = {self.family}" + "".join(f", {k} = {v}" for k, v in self.fixed))
        lines.append(f"    projection: {self.formula}")
        for key, default, meaning in self.params:
            lines.append(f"    {key:<14} default {default:<22} {meaning}")
        return "\n".join(lines)


_FISHEYE_PARAMS = (
    ("fov", "185", "field of view in degrees (sets f)"),
    ("f", "from fov", "focal length in pixels, overrides fov"),
    ("flip_azimuth", "false", "mirror the azimuth convention"),
)
_CAT_PARAMS = (
    ("d", "1.0", "camera to mirror distance in metres"),
    ("p", "0.25", "half the semi-latus rectum in metres"),
    ("fov", "200", "field of view in degrees (sets fx, fy)"),
    ("fx, fy", "from fov", "focal lengths in pixels"),
    ("u0, v0", "image centre", "principal point in pixels"),
)

CATALOG = (
    CatalogEntry(
        "equirectangular", "equirectangular", (), (),
        "theta = (2u/u_max - 1) pi, phi = (1/2 - v/v_max) pi", False, True, (1920, 960),
    ),
    CatalogEntry(
        "cylindrical", "cylindrical", (),
        (
            ("fov_h", "360", "horizontal field of view in degrees, (0, 360]"),
            ("fov_v", "90", "vertical field of view in degrees, (0, 180)"),
            ("true_cylinder", "false", "make tan(phi), not phi, linear in v"),
        ),
        "theta = (2u/u_max - 1) fov_h/2, phi = (1 - 2v/v_max) fov_v/2", False, True, (1920, 960),
    ),
    CatalogEntry(
        "fisheye-equiangular", "fisheye", (("lens", "equiangular"),), _FISHEYE_PARAMS,
        "polar coordinates about the image centre, phi = r/f", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "fisheye-stereographic", "fisheye", (("lens", "stereographic"),), _FISHEYE_PARAMS,
        "polar coordinates about the image centre, phi = 2 atan(r/2f)", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "fisheye-orthogonal", "fisheye", (("lens", "orthogonal"),), _FISHEYE_PARAMS,
        "polar coordinates about the image centre, phi = asin(r/f)", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "fisheye-equisolid", "fisheye", (("lens", "equisolid"),), _FISHEYE_PARAMS,
        "polar coordinates about the image centre, phi = 2 asin(r/f)", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "catadioptric-parabolic", "catadioptric", (("mirror", "parabolic"),), _CAT_PARAMS,
        "sphere model, xi = 1, eta = -2p, lifted through H_c = K_c R_c M_c", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "catadioptric-hyperbolic", "catadioptric", (("mirror", "hyperbolic"),), _CAT_PARAMS,
        "sphere model, xi = d/sqrt(d^2+4p^2), eta = -2p/sqrt(d^2+4p^2)", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "scaramuzza", "scaramuzza", (),
        (
            ("a", "fit to fov", "comma-separated a_0..a_N"),
            ("degree", "4", "polynomial degree when fitting"),
            ("fov", "190", "field of view in degrees used for the default fit"),
            ("u0, v0", "image centre", "principal point in pixels"),
        ),
        "ray = (u'', v'', a_0 + a_1 rho + ... + a_N rho^N)", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "kannala_brandt", "kannala_brandt", (),
        (
            ("fov", "190", "field of view in degrees (sets fx, fy)"),
            ("fx, fy", "from fov", "focal lengths in pixels"),
            ("cx, cy", "image centre", "principal point in pixels"),
            ("k1..k4", "0", "odd polynomial coefficients"),
        ),
        "r_d = d(theta) = theta + k1 theta^3 + k2 theta^5 + k3 theta^7 + k4 theta^9", True, True, (1024, 1024),
    ),
    CatalogEntry(
        "noncentral_panorama", "noncentral_panorama", (),
        (
            ("radius", "0.5", "radius R_c of the circle of optical centers, metres"),
            ("pitch", "0", "tilt of the circle about +Y, degrees"),
            ("center", "0, 0, 0", "circle center in the camera frame, metres"),
        ),
        "Plucker lines through the column center c = R_c (cos t cos p, sin t, cos t sin p)", False, False, (2048, 1024),
    ),
    CatalogEntry(
        "catadioptric-conical", "catadioptric", (("mirror", "conical"),),
        (
            ("tau", "30", "cone aperture angle in degrees, (0, 45)"),
            ("apex_distance", "0.1", "camera to cone apex, metres (sets z_c, r_c)"),
            ("z_c, r_c", "from apex_distance", "viewpoint circle height and radius, metres"),
            ("host_fov", "56", "perspective camera field of view in degrees"),
        ),
        "Plucker lines through (0, 0, Z_r), Z_r = Z_c + R_c cot(phi), cot(phi) = (1 + r tan 2tau)/(tan 2tau - r)",
        True, False, (1024, 1024),
    ),
    CatalogEntry(
        "catadioptric-spherical", "catadioptric", (("mirror", "spherical"),),
        (
            ("z_m", "0.1", "camera to mirror surface, metres"),
            ("r_s", "0.05", "mirror radius, metres"),
            ("host_fov", "mirror silhouette", "perspective camera field of view in degrees"),
        ),
        "reflected Plucker line (-x delta, y delta, -zeta, eps y Z_s, eps x Z_s, 0)", True, False, (1024, 1024),
    ),
)

FAMILIES = ("equirectangular", "cylindrical", "fisheye", "catadioptric", "scaramuzza", "kannala_brandt", "noncentral_panorama")
LENSES = tuple(lens.value for lens in C.Lens)
MIRRORS = ("parabolic", "hyperbolic", "conical", "spherical")

# keys each family accepts beyond width/height/model
FAMILY_KEYS = {
    "equirectangular": set(),
    "cylindrical": {"fov_h", "fov_v", "true_cylinder"},
    "fisheye": {"lens", "fov", "f", "flip_azimuth"},
    "catadioptric": {
        "mirror", "d", "p", "fov", "fx", "fy", "u0", "v0",
        "tau", "apex_distance", "z_c", "r_c", "host_fov", "z_m", "r_s",
    },
    "scaramuzza": {"a", "degree", "fov", "u0", "v0"},
    "kannala_brandt": {"fov", "fx", "fy", "cx", "cy", "k1", "k2", "k3", "k4"},
    "noncentral_panorama": {"radius", "pitch", "center"},
}
MIRROR_KEYS = {
    "parabolic": {"d", "p", "fov", "fx", "fy", "u0", "v0"},
    "hyperbolic": {"d", "p", "fov", "fx", "fy", "u0", "v0"},
    "conical": {"tau", "apex_distance", "z_c", "r_c", "host_fov"},
    "spherical": {"z_m", "r_s", "host_fov"},
}


def entry_for(family, params) -> CatalogEntry:
    for e in CATALOG:
        if e.family == family and all(params.get(k) == v for k, v in e.fixed):
            return e
    raise KeyError(family)


def catalog_text():
    lines = [f"{len(CATALOG)} camera models, each rendered as lit, semantic and depth images:", ""]
    for e in CATALOG:
        lines.append(e.describe())
        lines.append("")
    return "\n".join(lines)


def build_model(family, params, grid: C.ImageGrid):
    """Instantiate a camera model from validated config values (degrees,
    metres and pixels)."""
    g = params.get
    rad = np.radians
    if family == "equirectangular":
        return C.Equirect()
    if family == "cylindrical":
        return C.Cylindrical(rad(g("fov_h", 360.0)), rad(g("fov_v", 90.0)), g("true_cylinder", False))
    if family == "fisheye":
        if "f" in params:
            return C.FishEye(C.Lens(params["lens"]), g("f"), g("flip_azimuth", False))
        return C.fisheye_for_fov(params["lens"], grid, rad(g("fov", 185.0)), g("flip_azimuth", False))
    if family == "catadioptric":
        mirror = params["mirror"]
        if mirror in ("parabolic", "hyperbolic"):
            base = C.catadioptric_for_fov(mirror, grid, g("d", 1.0), g("p", 0.25), rad(g("fov", 200.0)))
            fx, fy, u0, v0 = base.K
            K = (g("fx", fx), g("fy", g("fx", fy)), g("u0", u0), g("v0", v0))
            return C.Catadioptric(mirror, base.d, base.p, K)
        if mirror == "conical":
            tau = rad(g("tau", 30.0))
            host = rad(g("host_fov", 56.0)) / 2.0
            if "z_c" in params or "r_c" in params:
                ref = N.ConicalCat.from_apex(g("apex_distance", 0.1), tau, host)
                return N.ConicalCat(g("z_c", ref.Z_c), g("r_c", ref.R_c), tau, host)
            return N.ConicalCat.from_apex(g("apex_distance", 0.1), tau, host)
        host = g("host_fov")
        return N.SphericalCat(g("z_m", 0.1), g("r_s", 0.05), None if host is None else rad(host) / 2.0)
    if family == "scaramuzza":
        center = None
        if "u0" in params or "v0" in params:
            center = (g("u0", grid.width / 2.0), g("v0", grid.height / 2.0))
        if "a" in params:
            return C.Scaramuzza(params["a"], center)
        a = C.scaramuzza_fit_equiangular(grid.r_max, rad(g("fov", 190.0)), int(g("degree", 4)))
        return C.Scaramuzza(a, center)
    if family == "kannala_brandt":
        base = C.kannala_brandt_for_fov(grid, rad(g("fov", 190.0)))
        k = tuple(g(f"k{i}", 0.0) for i in range(1, 5))
        return C.KannalaBrandt(
            g("fx", base.fx), g("fy", g("fx", base.fy)), g("cx", base.cx), g("cy", base.cy), k
        )
    if family == "noncentral_panorama":
        return N.NCPanorama(g("radius", 0.5), tuple(g("center", (0.0, 0.0, 0.0))), rad(g("pitch", 0.0)))
    raise KeyError(family)
