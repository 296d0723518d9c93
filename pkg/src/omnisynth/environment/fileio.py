"""Cube-map import and export.

A cube map with prefix ``P`` is stored as::

    P_lit_px.png ... P_lit_nz.png         8-bit RGB lit faces
    P_semantic_px.png ... P_semantic_nz.png  palette-coloured label faces
    P_px.depth ... P_nz.depth             float32 depth faces
    P.txt                                 sidecar

The sidecar holds ``center x y z``, ``orientation`` followed by nine
row-major numbers, ``face_res F``, ``frame world|ue4`` and one
``label id r g b name`` line per label.  Missing modes are simply absent.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from omnisynth.environment.cubemap import FACE_NAMES, CubeMap
from omnisynth.errors import DomainError
from omnisynth.geometry import ue4_rotation_to_world, ue4_to_world
from omnisynth.imaging import color_to_label, label_color, read_depth, read_rgb_png, write_depth, write_rgb_png


def _paths(prefix):
    prefix = Path(prefix)
    return prefix.parent, prefix.name


def save_cubemap(prefix, cm: CubeMap):
    folder, name = _paths(prefix)
    folder.mkdir(parents=True, exist_ok=True)
    written = []
    for k, face in enumerate(FACE_NAMES):
        if cm.lit is not None:
            p = folder / f"{name}_lit_{face}.png"
            write_rgb_png(p, cm.lit[k])
            written.append(p)
        if cm.labels is not None:
            p = folder / f"{name}_semantic_{face}.png"
            write_rgb_png(p, label_color(cm.labels[k]))
            written.append(p)
        if cm.depth is not None:
            p = folder / f"{name}_{face}.depth"
            write_depth(p, cm.depth[k])
            written.append(p)
    lines = [
        "center " + " ".join(repr(float(x)) for x in cm.center),
        "orientation " + " ".join(repr(float(x)) for x in cm.orientation.ravel()),
        f"face_res {cm.face_res}",
        "frame world",
    ]
    ids = set(cm.label_names)
    if cm.labels is not None:
        ids |= {int(i) for i in np.unique(cm.labels)}
    for i in sorted(ids):
        r, g, b = (int(c) for c in label_color(i))
        lines.append(f"label {i} {r} {g} {b} {cm.label_names.get(i, f'id{i}')}")
    side = folder / f"{name}.txt"
    side.write_text("\n".join(lines) + "\n")
    written.append(side)
    return written


def load_cubemap(prefix, planar_depth=False) -> CubeMap:
    """Read a cube map written by :func:`save_cubemap` or an external tool.

    With ``planar_depth`` the depth faces are taken to hold distance along the
    face axis and are converted to ray length.  A ``frame ue4`` sidecar has
    its center and orientation converted to the world frame.
    """
    folder, name = _paths(prefix)
    side = folder / f"{name}.txt"
    center = orientation = face_res = None
    frame = "world"
    palette = {}
    names = {}
    for lineno, raw in enumerate(side.read_text().splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        key, args = parts[0], parts[1:]
        try:
            if key == "center":
                center = np.array([float(x) for x in args])
            elif key == "orientation":
                orientation = np.array([float(x) for x in args]).reshape(3, 3)
            elif key == "face_res":
                face_res = int(args[0])
            elif key == "frame":
                frame = args[0]
            elif key == "label":
                i, r, g, b = (int(x) for x in args[:4])
                palette[(r, g, b)] = i
                names[i] = " ".join(args[4:]) or f"id{i}"
            else:
                raise ValueError(f"unknown key {key!r}")
        except (ValueError, IndexError) as exc:
            raise DomainError(f"{side}:{lineno}: {exc}") from None
    if center is None or orientation is None or face_res is None:
        raise DomainError(f"{side}: center, orientation and face_res are required")
    if frame == "ue4":
        center = ue4_to_world(center)
        orientation = ue4_rotation_to_world(orientation)
    elif frame != "world":
        raise DomainError(f"{side}: frame must be 'world' or 'ue4'")

    def faces(pattern, reader):
        paths = [folder / pattern.format(name=name, face=f) for f in FACE_NAMES]
        if not all(p.exists() for p in paths):
            return None
        return np.stack([reader(p) for p in paths])

    lit = faces("{name}_lit_{face}.png", read_rgb_png)
    sem = faces("{name}_semantic_{face}.png", read_rgb_png)
    labels = None
    if sem is not None:
        flat = sem.reshape(-1, 3)
        colors, inverse = np.unique(flat, axis=0, return_inverse=True)
        ids = np.array([palette.get(tuple(int(c) for c in col), -1) for col in colors])
        unknown = ids < 0
        ids[unknown] = color_to_label(colors[unknown])
        labels = ids[inverse.reshape(-1)].reshape(sem.shape[:3])
    depth = faces("{name}_{face}.depth", read_depth)
    if depth is not None:
        depth = depth.astype(float)
        if planar_depth:
            t = 2.0 * (np.arange(face_res) + 0.5) / face_res - 1.0
            b, a = np.meshgrid(t, t, indexing="ij")
            depth = depth * np.sqrt(1.0 + a * a + b * b)
    return CubeMap(center, orientation, face_res, lit, labels, depth, names)
