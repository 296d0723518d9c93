import math

import numpy as np
import pytest

from omnisynth.errors import DomainError
from omnisynth.geometry import (
    ElevationDir,
    PolarDir,
    Pose,
    compose_pose,
    dir_to_spherical,
    is_rotation,
    plucker_from_point_dir,
    point_line_distance,
    spherical_to_dir,
    transform_plucker,
    ue4_to_world,
    world_to_ue4,
    ypr_to_matrix,
)

from oracles import ypr


def test_spherical_axes():
    assert np.allclose(spherical_to_dir(ElevationDir(0.0, 0.0)), [1, 0, 0], atol=1e-15)
    assert np.allclose(spherical_to_dir(ElevationDir(math.pi / 2, 0.0)), [0, 1, 0], atol=1e-15)
    assert np.allclose(spherical_to_dir(ElevationDir(0.0, math.pi / 2)), [0, 0, 1], atol=1e-15)


def test_spherical_round_trip_scalar():
    s = dir_to_spherical(spherical_to_dir(ElevationDir(0.3, 0.7)), ElevationDir)
    assert abs(s.theta - 0.3) < 1e-12 and abs(s.phi - 0.7) < 1e-12


def test_dir_to_spherical_conventions():
    s = dir_to_spherical([1.0, 0, 0], ElevationDir)
    assert s.theta == 0.0 and s.phi == 0.0
    pole = dir_to_spherical([0, 0, 1.0], ElevationDir)
    assert pole.theta == 0.0 and pole.phi == pytest.approx(math.pi / 2)
    polar = dir_to_spherical([0, 0, 1.0], PolarDir)
    assert polar.phi == 0.0


def test_dir_to_spherical_zero_vector():
    with pytest.raises(DomainError):
        dir_to_spherical([0.0, 0.0, 0.0], ElevationDir)


@pytest.mark.parametrize("variant", [ElevationDir, PolarDir])
def test_spherical_round_trip_random(variant):
    rng = np.random.default_rng(3)
    v = rng.normal(size=(10_000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    back = spherical_to_dir(dir_to_spherical(v, variant))
    assert np.abs(back - v).max() < 1e-12


def test_ue4_axis_flip():
    assert np.array_equal(ue4_to_world([1.0, 2.0, 3.0]), [1.0, -2.0, 3.0])
    v = np.array([0.4, -1.5, 2.0])
    assert np.array_equal(world_to_ue4(ue4_to_world(v)), v)


def test_plucker_examples():
    r = plucker_from_point_dir([0, 0, 0], [0, 0, 1])
    assert np.array_equal(r.xi, [0, 0, 1]) and np.array_equal(r.xi_bar, [0, 0, 0])
    r = plucker_from_point_dir([1, 0, 0], [0, 1, 0])
    assert np.array_equal(r.xi, [0, 1, 0]) and np.array_equal(r.xi_bar, [0, 0, 1])


def test_plucker_zero_direction():
    with pytest.raises(DomainError):
        plucker_from_point_dir([1, 2, 3], [0, 0, 0])


def test_plucker_closest_point_on_line():
    rng = np.random.default_rng(5)
    p = rng.normal(size=(1000, 3)) * 3
    d = rng.normal(size=(1000, 3))
    r = plucker_from_point_dir(p, d)
    q = r.closest_point_to_origin()
    assert point_line_distance(q, r).max() < 1e-10
    assert point_line_distance(p, r).max() < 1e-10
    assert np.abs(r.constraint()).max() < 1e-12
    # closest point is orthogonal to the direction
    assert np.abs(np.sum(q * r.xi, axis=1)).max() < 1e-10


def test_compose_pose_examples():
    o, d = compose_pose(Pose(), [1.0, 0, 0])
    assert np.array_equal(o, [0, 0, 0]) and np.allclose(d, [1, 0, 0])
    o, d = compose_pose(Pose.from_ypr(yaw=math.pi / 2), [1.0, 0, 0])
    assert np.allclose(d, [0, 1, 0], atol=1e-15)


def test_pose_rejects_non_rotation():
    with pytest.raises(DomainError):
        Pose(np.zeros(3), np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(DomainError):
        Pose(np.zeros(3), 2 * np.eye(3))


def test_ypr_matches_independent_builder():
    rng = np.random.default_rng(9)
    for a in rng.uniform(-math.pi, math.pi, (50, 3)):
        R = ypr_to_matrix(*a)
        assert is_rotation(R)
        assert np.abs(R - ypr(*a)).max() < 1e-14


def test_transform_plucker_matches_transformed_points():
    rng = np.random.default_rng(11)
    pose = Pose(rng.normal(size=3), ypr(0.3, -0.2, 1.1))
    p = rng.normal(size=(100, 3))
    d = rng.normal(size=(100, 3))
    world = transform_plucker(pose, plucker_from_point_dir(p, d))
    pw = p @ pose.orientation.T + pose.position
    assert point_line_distance(pw, world).max() < 1e-12
