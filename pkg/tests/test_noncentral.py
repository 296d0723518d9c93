import json
import math

import numpy as np
import pytest

from omnisynth.central import ImageGrid
from omnisynth.environment import SceneOracle, reference_scene
from omnisynth.environment.scene import Scene
from omnisynth.errors import DomainError
from omnisynth.geometry import Pose, point_line_distance
from omnisynth.imaging import ALL_MODES, RenderMode
from omnisynth.noncentral import (
    ConicalCat,
    NCPanorama,
    SphericalCat,
    compose_noncentral,
    conical_cot_phi,
    conical_ray,
    nc_panorama_center,
    nc_panorama_ray,
    noncentral_pixel_rays,
    optical_center_groups,
    spherical_cat_ray,
    write_centers_json,
)

from oracles import CountingOracle, angle_between, reflect_off_sphere, ypr

PANO = ImageGrid(64, 32)


def test_panorama_center_examples():
    m = NCPanorama(1.0)
    assert np.allclose(nc_panorama_center(32.0, PANO, m), [1, 0, 0], atol=1e-15)
    assert np.allclose(nc_panorama_center(48.0, PANO, m), [0, 1, 0], atol=1e-15)


def test_panorama_ray_directions():
    m = NCPanorama(0.7)
    # azimuth pi/2 on the horizon
    r = nc_panorama_ray(48.0, 16.0, PANO, m)
    assert np.allclose(r.xi, [0, 1, 0], atol=1e-15)
    assert abs(float(np.dot(r.xi, r.xi_bar))) < 1e-15
    # the pole is straight up whatever the column
    r = nc_panorama_ray(np.array([3.0, 40.0]), np.array([0.0, 0.0]), PANO, m)
    assert np.allclose(r.xi, [[0, 0, 1], [0, 0, 1]], atol=1e-15)


def test_panorama_rays_pass_through_column_center():
    rng = np.random.default_rng(8)
    grid = ImageGrid(512, 256)
    m = NCPanorama(0.4, (0.1, -0.2, 0.05), math.radians(15))
    u = rng.uniform(0, 512, 20000)
    v = rng.uniform(0, 256, 20000)
    ray = nc_panorama_ray(u, v, grid, m)
    assert point_line_distance(nc_panorama_center(u, grid, m), ray).max() < 1e-10
    assert np.abs(ray.constraint()).max() < 1e-10


def test_conical_centre_ring_example():
    tau = math.radians(30)
    m = ConicalCat.from_apex(0.1, tau)
    grid = ImageGrid(65, 65)
    ray, Z_r, valid = conical_ray(np.array([32.5]), np.array([32.5]), grid, m)
    assert valid[0]
    assert conical_cot_phi(0.0, tau) == pytest.approx(1 / math.tan(2 * tau))
    assert Z_r[0] == pytest.approx(m.Z_c + m.R_c / math.tan(2 * tau), abs=1e-15)


def test_conical_line_meets_axis_at_Z_r():
    rng = np.random.default_rng(21)
    grid = ImageGrid(256, 256)
    m = ConicalCat.from_apex()
    u = rng.uniform(0, 256, 5000)
    v = rng.uniform(0, 256, 5000)
    ray, Z_r, valid = conical_ray(u, v, grid, m)
    xi, xb = ray.xi[valid], ray.xi_bar[valid]
    p0 = np.cross(xi, xb)  # closest point to the origin
    t = -np.sum(p0[:, :2] * xi[:, :2], axis=1) / np.sum(xi[:, :2] ** 2, axis=1)
    q = p0 + t[:, None] * xi
    assert np.abs(q[:, :2]).max() < 1e-10
    assert np.abs(q[:, 2] - Z_r[valid]).max() < 1e-10
    assert np.abs(ray.constraint()).max() < 1e-15


def test_conical_singular_ring_is_masked():
    # a host wide enough to reach r = tan 2tau
    m = ConicalCat.from_apex(0.1, math.radians(30), math.radians(70))
    grid = ImageGrid(128, 128)
    u, v = grid.pixel_centers()
    ray, key, center, valid = noncentral_pixel_rays(m, grid)
    r = np.hypot(u - 64, v - 64) * math.tan(math.radians(70)) / 64
    assert not valid[r > math.tan(math.radians(60)) + 0.05].any()
    assert np.isfinite(center[valid]).all() and np.isfinite(ray.xi_bar[valid]).all()


def test_conical_parameter_checks():
    with pytest.raises(DomainError):
        ConicalCat(0.1, 0.1, math.radians(50))
    with pytest.raises(DomainError):
        ConicalCat(0.1, 0.0, math.radians(30))


def test_spherical_axial_pixel_is_central():
    grid = ImageGrid(65, 65)
    ray, _, valid = spherical_cat_ray(np.array([32.5]), np.array([32.5]), grid, SphericalCat())
    assert valid[0]
    assert np.allclose(ray.xi_bar[0], 0.0, atol=1e-15)
    assert abs(abs(ray.xi[0, 2]) - 1.0) < 1e-15


def _sphere_hits(ray, Z_s, R_s):
    """Both intersections of a Plücker line with the mirror sphere."""
    p0 = np.cross(ray[0], ray[1])
    d = ray[0]
    c = np.array([0.0, 0.0, Z_s])
    b = d @ (p0 - c)
    disc = b * b - ((p0 - c) @ (p0 - c) - R_s * R_s)
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return [p0 + t * d for t in (-b - s, -b + s)]


def test_spherical_reflection_law():
    rng = np.random.default_rng(31)
    m = SphericalCat(0.1, 0.05)
    grid = ImageGrid(512, 512)
    u = rng.uniform(0, 512, 4000)
    v = rng.uniform(0, 512, 4000)
    ray, _, valid = spherical_cat_ray(u, v, grid, m)
    checked = 0
    for i in np.flatnonzero(valid)[:1000]:
        hits = _sphere_hits((ray.xi[i], ray.xi_bar[i]), m.Z_s, m.R_s)
        assert hits, "line misses the mirror"
        # a chord can cross the visible cap twice; one crossing must be the
        # physical reflection of the camera ray through it
        ok = False
        for P in hits:
            traced = reflect_off_sphere(P, m.Z_s, m.R_s)
            if traced is None or np.linalg.norm(traced[0] - P) > 1e-9:
                continue
            _, out = traced
            n = (P - np.array([0, 0, m.Z_s])) / m.R_s
            inc = P / np.linalg.norm(P)
            a_in = math.acos(min(1.0, abs(float(inc @ n))))
            a_out = math.acos(min(1.0, abs(float(ray.xi[i] @ n))))
            if abs(a_in - a_out) < 1e-8 and angle_between(out, ray.xi[i]) < 1e-8:
                ok = True
        assert ok, f"pixel ({u[i]}, {v[i]}) violates the reflection law"
        checked += 1
    assert checked == 1000


def test_spherical_azimuth_matches_pixel():
    # the reflection point seen by the host lies in the pixel's azimuth plane
    m = SphericalCat()
    grid = ImageGrid(256, 256)
    u = np.array([200.5, 128.5, 60.5])
    v = np.array([128.5, 40.5, 200.5])
    ray, _, valid = spherical_cat_ray(u, v, grid, m)
    assert valid.all()
    theta_pix = np.arctan2(128 - v, u - 128)
    for i in range(3):
        P = min(_sphere_hits((ray.xi[i], ray.xi_bar[i]), m.Z_s, m.R_s), key=lambda p: p[2])
        phi_P = math.atan2(P[1], P[0])
        d = (phi_P - theta_pix[i] + math.pi) % (2 * math.pi) - math.pi
        assert min(abs(d), abs(abs(d) - math.pi)) < 1e-9


def test_spherical_silhouette_default():
    m = SphericalCat(0.1, 0.05)
    assert math.sin(m.half_fov) == pytest.approx(m.R_s / m.Z_s)


@pytest.mark.parametrize(
    "model,grid",
    [
        (NCPanorama(0.3), ImageGrid(48, 24)),
        (ConicalCat.from_apex(), ImageGrid(40, 40)),
        (SphericalCat(), ImageGrid(40, 40)),
    ],
)
def test_groups_partition_and_single_acquisition(model, grid):
    groups = optical_center_groups(model, grid)
    allpix = np.concatenate([g.pixels for g in groups])
    assert len(allpix) == grid.width * grid.height
    assert len(np.unique(allpix)) == len(allpix)
    keys = [g.key for g in groups]
    assert keys == sorted(keys)
    oracle = CountingOracle(SceneOracle(reference_scene()))
    img, acquired = compose_noncentral(model, Pose(), grid, RenderMode.SEMANTIC, oracle, return_groups=True)
    with_valid = [g for g in groups if g.n_valid > 0]
    assert len(oracle.calls) == len(with_valid) == len(acquired)
    for call, g in zip(oracle.calls, with_valid):
        assert np.array_equal(call, g.center)
    if isinstance(model, NCPanorama):
        assert len(oracle.calls) == grid.width


def test_cubemap_oracle_per_group():
    model = ConicalCat.from_apex()
    grid = ImageGrid(24, 24)
    inner = SceneOracle(reference_scene(), via="cubemap", face_res=8)
    oracle = CountingOracle(inner)
    img = compose_noncentral(model, Pose(), grid, RenderMode.DEPTH, oracle)
    n = sum(g.n_valid > 0 for g in optical_center_groups(model, grid))
    assert len(oracle.calls) == n
    direct = compose_noncentral(model, Pose(), grid, RenderMode.DEPTH, SceneOracle(reference_scene()))
    assert np.array_equal(img.valid, direct.valid)
    rel = np.abs(img.data - direct.data)[img.valid] / direct.data[img.valid]
    assert np.median(rel) < 0.05


def test_panorama_depth_against_analytic_box():
    scene = Scene()
    m = NCPanorama(0.5)
    grid = ImageGrid(64, 32)
    depth = compose_noncentral(m, Pose(), grid, RenderMode.DEPTH, SceneOracle(scene))
    ray, key, center, valid = noncentral_pixel_rays(m, grid)
    d = ray.xi / np.linalg.norm(ray.xi, axis=-1, keepdims=True)
    with np.errstate(divide="ignore"):
        t = np.where(d != 0, (np.sign(d) * 1.0 - center) / d, np.inf)
    t = np.where(t > 0, t, np.inf).min(axis=-1)
    assert np.abs(depth.data - t).max() <= 1e-9 * t.max()


def test_pose_moves_group_centers():
    m = NCPanorama(0.25)
    grid = ImageGrid(16, 8)
    pose = Pose([0.1, 0.2, -0.1], ypr(0.5, 0.1, -0.2))
    _, acquired = compose_noncentral(m, pose, grid, ALL_MODES, SceneOracle(reference_scene()), return_groups=True)
    for key, c, _ in acquired:
        local = nc_panorama_center(key + 0.5, grid, m)
        assert np.allclose(c, pose.position + pose.orientation @ local, atol=1e-15)


def test_zero_radius_panorama_is_equirect():
    from omnisynth.central import Equirect, compose_central

    grid = ImageGrid(64, 32)
    oracle = SceneOracle(reference_scene())
    a = compose_central(Equirect(), Pose(), grid, ALL_MODES, oracle)
    b = compose_noncentral(NCPanorama(0.0), Pose(), grid, ALL_MODES, oracle)
    for mode in ALL_MODES:
        assert np.array_equal(a[mode].data, b[mode].data, equal_nan=True)


def test_centers_json(tmp_path):
    m = SphericalCat()
    grid = ImageGrid(16, 16)
    _, acquired = compose_noncentral(m, Pose(), grid, RenderMode.LIT, SceneOracle(reference_scene()), return_groups=True)
    path = tmp_path / "c.json"
    write_centers_json(path, m, acquired)
    doc = json.loads(path.read_text())
    assert doc["model"] == "SphericalCat"
    assert len(doc["groups"]) == len(acquired)
    assert sum(g["pixels"] for g in doc["groups"]) == int(np.sum([n for _, _, n in acquired]))


@pytest.mark.parametrize("model", [ConicalCat.from_apex(), SphericalCat()])
def test_ring_models_rotate_with_yaw(model):
    # yawing about the mirror axis by 90 degrees turns the image by a quarter
    grid = ImageGrid(96, 96)
    oracle = SceneOracle(reference_scene())
    base = Pose([0.05, -0.05, 0.1], np.eye(3))
    a = compose_noncentral(model, base, grid, RenderMode.SEMANTIC, oracle)
    b = compose_noncentral(model, Pose(base.position, ypr(math.pi / 2, 0, 0)), grid, RenderMode.SEMANTIC, oracle)
    # pixel azimuth is counter-clockwise with rows growing downwards, so the
    # content seen at azimuth t + 90 deg moves to t: a clockwise array turn
    turned = np.rot90(a.labels, k=-1)
    both = a.valid & np.rot90(a.valid, k=-1)
    assert np.mean(b.labels[both] == turned[both]) >= 0.99
