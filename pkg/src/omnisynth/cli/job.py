"""Run a validated job: build scene, model and poses, render, write artifacts
and a content-hash manifest."""
from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from omnisynth.central import ImageGrid
from omnisynth.cli.catalog import build_model
from omnisynth.cli.config import JobConfig
from omnisynth.environment import CubeMapOracle, SceneOracle, load_cubemap, load_scene, reference_scene
from omnisynth.geometry import Pose
from omnisynth.groundtruth import TrajectoryRecord, layout_gt, write_trajectory
from omnisynth.imaging import RenderMode, label_color, write_depth, write_depth_preview, write_mask_png, write_png
from omnisynth.noncentral import write_centers_json
from omnisynth.render import is_central, render

MANIFEST = "manifest.txt"


def build_oracle(cfg: JobConfig):
    workers = cfg.effective_workers()
    if cfg.cubemaps:
        maps = [load_cubemap(cfg.resolve(p), planar_depth=cfg.planar_depth) for p in cfg.cubemaps]
        return None, CubeMapOracle(maps)
    scene = load_scene(cfg.resolve(cfg.scene_file)) if cfg.scene_file else reference_scene()
    return scene, SceneOracle(scene, via=cfg.via, face_res=cfg.face_res, workers=workers)


def build_poses(cfg: JobConfig):
    r = np.radians
    return [Pose.from_ypr(p[:3], r(p[3]), r(p[4]), r(p[5])) for p in cfg.poses]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir: Path, files):
    rel = sorted({Path(f).resolve().relative_to(out_dir.resolve()).as_posix() for f in files})
    lines = [f"{sha256_file(out_dir / r)}  {r}" for r in rel]
    path = out_dir / MANIFEST
    path.write_text("\n".join(lines) + "\n")
    return path


def run_job(cfg: JobConfig, log=None):
    """Render every frame of ``cfg``; returns ``(exit status, manifest path)``."""
    grid = ImageGrid(cfg.width, cfg.height)
    model = build_model(cfg.model, cfg.camera_params, grid)
    scene, oracle = build_oracle(cfg)
    poses = build_poses(cfg)
    modes = tuple(RenderMode(m) for m in cfg.modes)
    out = cfg.resolve(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    records = []
    for k, pose in enumerate(poses):
        stem = out / f"frame_{k:04d}"
        images, groups = render(model, pose, grid, oracle, modes, return_groups=True)
        for mode in modes:
            img = images[mode]
            if mode is RenderMode.DEPTH:
                p = Path(f"{stem}_depth.depth")
                write_depth(p, img.data)
                written.append(p)
                if cfg.depth_preview:
                    p = Path(f"{stem}_depth_preview.png")
                    write_depth_preview(p, img.data)
                    written += [p, p.with_suffix(".txt")]
            else:
                p = Path(f"{stem}_{mode.value}.png")
                write_png(p, img)
                written.append(p)
        if groups is not None:
            p = Path(f"{stem}_centers.json")
            write_centers_json(p, model, groups)
            written.append(p)
        if cfg.layout and is_central(model) and scene is not None:
            gt = layout_gt(scene, model, pose, grid, cfg.dilation)
            for name, mask in (("edges", gt.edges), ("corners", gt.corners)):
                p = Path(f"{stem}_layout_{name}.png")
                write_mask_png(p, mask)
                written.append(p)
        records.append(TrajectoryRecord.from_pose(k, pose))
        if log:
            log(f"frame {k}: {', '.join(m.value for m in modes)} written")
    p = out / "trajectory.txt"
    write_trajectory(p, records)
    written.append(p)
    names = scene.label_names if scene is not None else oracle.label_names
    p = out / "palette.txt"
    p.write_text("".join(f"{i} {' '.join(str(int(c)) for c in label_color(i))} {n}\n" for i, n in sorted(names.items())))
    written.append(p)
    missing = [f for f in written if not Path(f).exists()]
    manifest = write_manifest(out, written)
    return (0 if not missing else 1), manifest
