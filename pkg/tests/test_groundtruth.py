import math

import numpy as np
import pytest

from omnisynth.central import Cylindrical, Equirect, ImageGrid, Lens, fisheye_for_fov
from omnisynth.environment import SceneOracle, reference_scene
from omnisynth.environment.scene import Scene
from omnisynth.errors import DomainError, UnsupportedModelError
from omnisynth.geometry import Pose
from omnisynth.groundtruth import (
    METRICS_HEADER,
    TrajectoryRecord,
    count_blobs,
    format_trajectory,
    layout_gt,
    layout_metrics,
    parse_trajectory,
    project_room_corners,
    read_trajectory,
    room_edges,
    rotation_error_deg,
    sequence_generate,
    trajectory_errors,
    translation_error_deg,
    write_trajectory,
)
from omnisynth.imaging import RenderMode
from omnisynth.noncentral import NCPanorama

from oracles import ypr


def test_room_has_twelve_edges():
    edges = room_edges(Scene(2, 3, 4))
    assert len(edges) == 12
    lengths = sorted(round(float(np.linalg.norm(a - b)), 9) for a, b in edges)
    assert lengths == [2.0] * 4 + [3.0] * 4 + [4.0] * 4


def test_equirect_layout_has_eight_corner_blobs():
    grid = ImageGrid(256, 128)
    gt = layout_gt(Scene(), Equirect(), Pose(), grid)
    assert count_blobs(gt.corners, wraps=True) == 8
    assert not np.any(gt.corners & ~gt.edges)
    # the four vertical wall edges and the eight horizontal ones form one connected frame
    assert count_blobs(gt.edges, wraps=True) == 1


def test_corner_rows_match_analytic_elevation():
    grid = ImageGrid(512, 256)
    u, v, ok = project_room_corners(Scene(), Equirect(), Pose(), grid)
    e = math.atan(1 / math.sqrt(2))
    assert ok.all()
    assert np.allclose(v[:4], (0.5 - e / math.pi) * 256, atol=1e-9)
    assert np.allclose(v[4:], (0.5 + e / math.pi) * 256, atol=1e-9)
    # azimuths of the corners are odd multiples of 45 degrees
    theta = (u / 512 * 2 - 1) * 180
    assert np.allclose(np.sort(theta[:4]), [-135, -45, 45, 135], atol=1e-9)


def test_corner_seam_blob_merges():
    # yaw so that a corner sits exactly on the seam; the blob is split in two
    grid = ImageGrid(256, 128)
    gt = layout_gt(Scene(), Equirect(), Pose.from_ypr(yaw=math.radians(-135)), grid)
    assert count_blobs(gt.corners, wraps=True) == 8
    assert count_blobs(gt.corners, wraps=False) > 8


def test_fisheye_layout_is_inside_disc():
    grid = ImageGrid(128, 128)
    model = fisheye_for_fov(Lens.EQUIANGULAR, grid, math.radians(190))
    gt = layout_gt(Scene(), model, Pose.from_ypr(pitch=-math.pi / 2), grid)
    u, v = grid.pixel_centers()
    outside = np.hypot(u - 64, v - 64) > 64 + 1.0
    assert gt.edges.any() and not gt.edges[outside].any()


def test_layout_dilation_grows_masks():
    grid = ImageGrid(128, 64)
    thin = layout_gt(Scene(), Equirect(), Pose(), grid, dilation=0.5)
    thick = layout_gt(Scene(), Equirect(), Pose(), grid, dilation=3.0)
    assert np.all(thick.edges >= thin.edges) and thick.edges.sum() > thin.edges.sum()


def test_layout_rejects_noncentral_and_outside_pose():
    grid = ImageGrid(32, 16)
    with pytest.raises(UnsupportedModelError):
        layout_gt(Scene(), NCPanorama(0.5), Pose(), grid)
    with pytest.raises(DomainError):
        layout_gt(Scene(), Equirect(), Pose.from_ypr((3.0, 0, 0)), grid)


def test_cylinder_layout_wraps_only_at_full_circle():
    grid = ImageGrid(128, 64)
    full = layout_gt(Scene(), Cylindrical(), Pose(), grid)
    assert full.edges.any()
    part = layout_gt(Scene(), Cylindrical(math.radians(200), math.radians(120)), Pose(), grid)
    assert part.edges.any()


# ---------------------------------------------------------------- metrics


def _random_mask(rng, shape=(40, 60), p=0.3):
    return rng.random(shape) < p


def test_metrics_examples():
    rng = np.random.default_rng(0)
    gt = _random_mask(rng)
    m = layout_metrics(gt, gt)
    assert (m.iou, m.acc, m.precision, m.recall, m.f1) == (1.0,) * 5
    m = layout_metrics(~gt, gt)
    assert m.iou == 0 and m.precision == 0 and m.recall == 0 and m.f1 == 0
    # cover gt plus an equal-sized disjoint region
    gt = np.zeros((10, 10), bool)
    gt[:, :3] = True
    pred = gt.copy()
    pred[:, 5:8] = True
    m = layout_metrics(pred, gt)
    assert (m.recall, m.precision, m.iou) == (1.0, 0.5, 0.5)
    assert m.acc == pytest.approx(0.7)


def test_metrics_empty_and_mismatch():
    z = np.zeros((4, 4), bool)
    assert layout_metrics(z, z).f1 == 1.0
    with pytest.raises(DomainError):
        layout_metrics(z, np.zeros((4, 5), bool))


def test_metrics_csv():
    m = layout_metrics(np.eye(4, dtype=bool), np.eye(4, dtype=bool))
    assert METRICS_HEADER == "IoU,Acc,P,R,F1"
    assert m.csv_row() == "1.0,1.0,1.0,1.0,1.0"


# ---------------------------------------------------------------- trajectories


def test_rotation_error_examples():
    assert rotation_error_deg(np.eye(3), np.eye(3)) == 0.0
    for axis in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)):
        from scipy.spatial.transform import Rotation

        R = Rotation.from_rotvec(np.array(axis) / np.linalg.norm(axis) * math.pi / 2).as_matrix()
        assert abs(rotation_error_deg(np.eye(3), R) - 90.0) < 1e-9
    R = ypr(0.3, 0.2, -0.4)
    assert abs(rotation_error_deg(R, R @ ypr(0.0, 0.0, math.radians(7))) - 7.0) < 1e-9


def test_rotation_error_matches_trace_formula():
    rng = np.random.default_rng(6)
    for _ in range(200):
        A, B = ypr(*rng.uniform(-3, 3, 3)), ypr(*rng.uniform(-3, 3, 3))
        c = (np.trace(A.T @ B) - 1) / 2
        ref = math.degrees(math.acos(max(-1.0, min(1.0, c))))
        assert abs(rotation_error_deg(A, B) - ref) < 1e-6


def test_translation_error_examples():
    t = np.array([0.3, -1.2, 0.5])
    assert translation_error_deg(t, 2 * t) == 0.0
    assert translation_error_deg([1, 0, 0], [0, 1, 0]) == pytest.approx(90.0)
    assert translation_error_deg([1, 0, 0], [-1, 0, 0]) == pytest.approx(180.0)
    with pytest.raises(DomainError):
        translation_error_deg([0, 0, 0], [1, 0, 0])


def test_trajectory_errors_skip_zero_translation():
    gt = [TrajectoryRecord(0, np.zeros(3), np.eye(3)), TrajectoryRecord(1, np.array([1.0, 0, 0]), np.eye(3))]
    est = [TrajectoryRecord(0, np.zeros(3), np.eye(3)), TrajectoryRecord(1, np.array([0, 2.0, 0]), np.eye(3))]
    res = trajectory_errors(gt, est)
    assert res.skipped == [0]
    assert math.isnan(res.eps_t[0]) and res.eps_t[1] == pytest.approx(90.0)
    with pytest.raises(DomainError):
        trajectory_errors(gt, est[:1])


def test_trajectory_file_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    recs = [TrajectoryRecord(k, rng.normal(size=3), ypr(*rng.uniform(-3, 3, 3))) for k in (0, 2, 5)]
    write_trajectory(tmp_path / "t.txt", recs)
    back = read_trajectory(tmp_path / "t.txt")
    assert [r.frame_id for r in back] == [0, 2, 5]
    for a, b in zip(recs, back):
        assert np.array_equal(a.position, b.position)
        assert rotation_error_deg(a.rotation, b.rotation) < 1e-6
    with pytest.raises(DomainError):
        format_trajectory([recs[1], recs[0]])
    with pytest.raises(DomainError):
        parse_trajectory("0 0 0 0 0 0 0 2\n")


def test_sequence_generate_records_and_determinism():
    grid = ImageGrid(32, 16)
    oracle = SceneOracle(reference_scene())
    poses = [Pose.from_ypr((0.1 * k, 0, 0), yaw=0.2 * k) for k in range(3)]
    frames, records = sequence_generate(oracle, Equirect(), poses, grid, (RenderMode.DEPTH,))
    assert [r.frame_id for r in records] == [0, 1, 2]
    assert len(frames) == 3
    still, _ = sequence_generate(oracle, Equirect(), [poses[1]] * 3, grid, (RenderMode.SEMANTIC,))
    for f in still[1:]:
        assert np.array_equal(f[RenderMode.SEMANTIC].data, still[0][RenderMode.SEMANTIC].data)


def test_layout_yaw_equivariance():
    grid = ImageGrid(128, 64)
    scene = Scene(2.0, 3.0, 2.5)
    pose = Pose.from_ypr((0.2, -0.3, 0.1))
    a = layout_gt(scene, Equirect(), pose, grid)
    shift = 8  # pixels; yaw by a whole number of pixel pitches
    alpha = shift * 2 * math.pi / grid.width
    b = layout_gt(scene, Equirect(), Pose.from_ypr(pose.position, yaw=alpha), grid)
    assert np.mean(b.edges == np.roll(a.edges, -shift, axis=1)) > 0.999
    assert np.mean(b.corners == np.roll(a.corners, -shift, axis=1)) > 0.999


def test_metric_inequalities_on_random_masks():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        shape = tuple(rng.integers(1, 24, 2))
        a = rng.random(shape) < rng.uniform(0.05, 0.9)
        b = rng.random(shape) < rng.uniform(0.05, 0.9)
        m = layout_metrics(a, b)
        eps = 1e-12
        assert m.iou <= min(m.precision, m.recall) + eps
        assert min(m.precision, m.recall) <= m.f1 + eps
        assert m.f1 <= max(m.precision, m.recall) + eps
