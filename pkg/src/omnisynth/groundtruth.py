"""Ground truth: room-layout edge/corner maps, pose trajectories and the
metrics used to score predictions against them."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.spatial.transform import Rotation

from omnisynth.central import CENTRAL_MODELS, Cylindrical, Equirect, ImageGrid, project
from omnisynth.errors import DomainError, UnsupportedModelError
from omnisynth.geometry import Pose, cross, dot, is_rotation, norm, rotate
from omnisynth.imaging import ALL_MODES
from omnisynth.render import render

# ---------------------------------------------------------------- layout


@dataclass
class LayoutGT:
    edges: np.ndarray
    corners: np.ndarray


def room_corners(scene):
    hx, hy, hz = scene.half_extent
    return np.array([[sx * hx, sy * hy, sz * hz] for sz in (1, -1) for sy in (1, -1) for sx in (1, -1)])


def room_edges(scene):
    """The 12 room edges as ``(start, end)`` corner pairs."""
    c = room_corners(scene)
    pairs = []
    for i in range(8):
        for j in range(i + 1, 8):
            # corners sharing two coordinates are joined by an edge
            if np.count_nonzero(c[i] != c[j]) == 1:
                pairs.append((c[i], c[j]))
    return pairs


def default_dilation(grid: ImageGrid) -> float:
    return 4.0 * grid.width / 1024.0


def _wraps(model):
    return isinstance(model, Equirect) or (isinstance(model, Cylindrical) and np.isclose(model.fov_h, 2 * np.pi))


def _project_world(model, pose: Pose, grid, points):
    cam = rotate(pose.orientation.T, np.asarray(points, dtype=float) - pose.position)
    return project(model, grid, cam)


def project_room_corners(scene, model, pose: Pose, grid: ImageGrid):
    """Continuous pixel coordinates and visibility of the 8 room corners."""
    _check_layout_inputs(scene, model, pose)
    return _project_world(model, pose, grid, room_corners(scene))


def _check_layout_inputs(scene, model, pose):
    if not isinstance(model, CENTRAL_MODELS):
        raise UnsupportedModelError("layout ground truth is only defined for central models")
    if not scene.contains(pose.position):
        raise DomainError("camera must be inside the room")


def _sample_edge(model, pose, grid, a, b, max_step=0.25, max_samples=1 << 20):
    n = 64
    wraps = _wraps(model)
    while True:
        s = np.linspace(0.0, 1.0, n)
        pts = a + s[:, None] * (b - a)
        u, v, ok = _project_world(model, pose, grid, pts)
        du = np.diff(u)
        if wraps:
            jump = np.abs(du) > grid.width / 2.0
            du = np.where(jump, 0.0, du)
        step = np.hypot(du, np.diff(v))
        both = ok[1:] & ok[:-1]
        worst = step[both].max() if both.any() else 0.0
        if worst <= max_step or n >= max_samples:
            return u[ok], v[ok]
        n *= 2


def _rasterize(grid, u, v, wraps):
    img = np.zeros(grid.shape, dtype=bool)
    i = np.floor(u).astype(np.int64)
    j = np.floor(v).astype(np.int64)
    if wraps:
        i = i % grid.width
    inside = (i >= 0) & (i < grid.width) & (j >= 0) & (j < grid.height)
    img[j[inside], i[inside]] = True
    return img


def _dilate(img, radius, wraps):
    r = int(np.floor(radius))
    if r <= 0:
        return img.copy()
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    footprint = x * x + y * y <= radius * radius
    if not wraps:
        return ndimage.maximum_filter(img, footprint=footprint, mode="constant", cval=0)
    # columns wrap around the panorama seam, rows do not
    padded = np.pad(img, ((0, 0), (r, r)), mode="wrap")
    out = ndimage.maximum_filter(padded, footprint=footprint, mode="constant", cval=0)
    return out[:, r:-r]


def layout_gt(scene, model, pose: Pose, grid: ImageGrid, dilation=None) -> LayoutGT:
    """Binary edge and corner maps of the room box as seen by a central camera."""
    _check_layout_inputs(scene, model, pose)
    radius = default_dilation(grid) if dilation is None else float(dilation)
    wraps = _wraps(model)
    edges = np.zeros(grid.shape, dtype=bool)
    for a, b in room_edges(scene):
        u, v = _sample_edge(model, pose, grid, a, b)
        edges |= _rasterize(grid, u, v, wraps)
    cu, cv, cok = _project_world(model, pose, grid, room_corners(scene))
    corners = _rasterize(grid, cu[cok], cv[cok], wraps)
    return LayoutGT(_dilate(edges, radius, wraps), _dilate(corners, radius, wraps))


def count_blobs(mask, wraps=False):
    """Number of 8-connected blobs, joining blobs across the seam when ``wraps``."""
    labels, n = ndimage.label(mask, structure=np.ones((3, 3)))
    if wraps and n:
        parent = list(range(n + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        left, right = labels[:, 0], labels[:, -1]
        for j in range(mask.shape[0]):
            for dj in (-1, 0, 1):
                k = j + dj
                if 0 <= k < mask.shape[0] and left[j] and right[k]:
                    parent[find(left[j])] = find(right[k])
        n = len({find(a) for a in range(1, n + 1)})
    return n


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True)
class LayoutMetrics:
    iou: float
    acc: float
    precision: float
    recall: float
    f1: float

    def csv_row(self):
        return ",".join(repr(float(x)) for x in (self.iou, self.acc, self.precision, self.recall, self.f1))


METRICS_HEADER = "IoU,Acc,P,R,F1"


def layout_metrics(pred, gt) -> LayoutMetrics:
    """Pixelwise IoU, accuracy, precision, recall and F1 of a binary map.

    Two empty maps agree perfectly (all ones).  Otherwise an undefined
    precision or recall counts as 0, as does F1 when both are 0.
    """
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DomainError(f"grid mismatch: {pred.shape} vs {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = int(pred.size - tp - fp - fn)
    if tp + fp + fn == 0:
        return LayoutMetrics(1.0, 1.0, 1.0, 1.0, 1.0)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return LayoutMetrics(tp / (tp + fp + fn), (tp + tn) / pred.size, p, r, f1)


# ---------------------------------------------------------------- trajectories


@dataclass(frozen=True)
class TrajectoryRecord:
    frame_id: int
    position: np.ndarray
    rotation: np.ndarray

    @classmethod
    def from_pose(cls, frame_id, pose: Pose):
        return cls(int(frame_id), np.array(pose.position), np.array(pose.orientation))


def format_trajectory(records) -> str:
    lines = []
    last = None
    for rec in records:
        if last is not None and rec.frame_id <= last:
            raise DomainError("frame ids must increase monotonically")
        last = rec.frame_id
        q = Rotation.from_matrix(rec.rotation).as_quat()  # x y z w
        nums = " ".join(repr(float(x)) for x in (*rec.position, *q))
        lines.append(f"{rec.frame_id} {nums}")
    return "\n".join(lines) + ("\n" if lines else "")


def write_trajectory(path, records):
    Path(path).write_text(format_trajectory(records))


def parse_trajectory(text, source="<trajectory>"):
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 8:
            raise DomainError(f"{source}:{lineno}: expected 'id tx ty tz qx qy qz qw'")
        try:
            fid = int(parts[0])
            vals = [float(x) for x in parts[1:]]
        except ValueError as exc:
            raise DomainError(f"{source}:{lineno}: {exc}") from None
        q = np.array(vals[3:])
        if not np.isclose(np.linalg.norm(q), 1.0, atol=1e-6):
            raise DomainError(f"{source}:{lineno}: quaternion is not unit length")
        if records and fid <= records[-1].frame_id:
            raise DomainError(f"{source}:{lineno}: frame ids must increase monotonically")
        records.append(TrajectoryRecord(fid, np.array(vals[:3]), Rotation.from_quat(q).as_matrix()))
    return records


def read_trajectory(path):
    path = Path(path)
    return parse_trajectory(path.read_text(), str(path))


def rotation_error_deg(R_gt, R_est):
    """Geodesic angle between two rotations, in degrees.

    Same angle as ``2 asin(|R_gt - R_est|_F / (2 sqrt 2))``, evaluated as
    ``atan2(sin, cos)`` of the relative rotation so it is exact at zero and
    well conditioned near 180 degrees as well.
    """
    m = np.asarray(R_gt, dtype=float).T @ np.asarray(R_est, dtype=float)
    axis = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])
    return float(np.degrees(np.arctan2(0.5 * np.linalg.norm(axis), 0.5 * (np.trace(m) - 1.0))))


def translation_error_deg(t_gt, t_est):
    """Angle between two translation directions, in degrees (scale-free)."""
    a = np.asarray(t_gt, dtype=float)
    b = np.asarray(t_est, dtype=float)
    if norm(a) == 0 or norm(b) == 0:
        raise DomainError("translation direction undefined for a zero vector")
    return float(np.degrees(np.arctan2(norm(cross(a, b)), dot(a, b))))


@dataclass
class TrajectoryErrors:
    frame_ids: list
    eps_t: np.ndarray  # NaN where skipped
    eps_theta: np.ndarray
    skipped: list


def trajectory_errors(gt, est) -> TrajectoryErrors:
    """Per-frame translation-direction and rotation errors in degrees."""
    gt_ids = [r.frame_id for r in gt]
    est_ids = [r.frame_id for r in est]
    if gt_ids != est_ids:
        raise DomainError("ground truth and estimate must list the same frame ids")
    eps_t = np.full(len(gt), np.nan)
    eps_r = np.zeros(len(gt))
    skipped = []
    for k, (g, e) in enumerate(zip(gt, est)):
        eps_r[k] = rotation_error_deg(g.rotation, e.rotation)
        if norm(g.position) == 0 or norm(e.position) == 0:
            skipped.append(g.frame_id)
        else:
            eps_t[k] = translation_error_deg(g.position, e.position)
    return TrajectoryErrors(gt_ids, eps_t, eps_r, skipped)


# ---------------------------------------------------------------- sequences


def sequence_generate(oracle, model, trajectory, grid: ImageGrid, modes=ALL_MODES):
    """Render one frame per pose.  Returns ``(frames, records)`` where each
    frame is ``{mode: Image}``."""
    frames = []
    records = []
    for k, pose in enumerate(trajectory):
        if not is_rotation(pose.orientation):
            raise DomainError(f"pose {k} has an invalid orientation")
        frames.append(render(model, pose, grid, oracle, modes))
        records.append(TrajectoryRecord.from_pose(k, pose))
    return frames, records
