"""Procedural indoor scene and its analytic ray caster.

The room is an axis-aligned cuboid centred on the world origin; objects are
axis-aligned boxes and spheres.  A ray is answered with the first surface it
meets: Lambert-shaded colour, semantic label and Euclidean hit distance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from omnisynth.errors import DomainError
from omnisynth.geometry import norm

ROOM_LABELS = ("wall_+X", "wall_-X", "wall_+Y", "wall_-Y", "floor", "ceiling")
ROOM_COLORS = {
    "wall_+X": (200, 190, 170),
    "wall_-X": (180, 185, 200),
    "wall_+Y": (200, 175, 160),
    "wall_-Y": (170, 200, 180),
    "floor": (120, 90, 60),
    "ceiling": (235, 235, 230),
}
# (positive face, negative face) per axis
_ROOM_FACES = (("wall_+X", "wall_-X"), ("wall_+Y", "wall_-Y"), ("ceiling", "floor"))
AMBIENT = 0.2
CHECKER_SIZE = 0.25
CHECKER_DARK = 0.6
DEFAULT_LIGHT = (0.3, 0.5, 1.0)


@dataclass(frozen=True)
class Box:
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    label: str
    color: tuple[int, int, int] = (160, 160, 160)

    @property
    def lo(self):
        return np.asarray(self.center, float) - 0.5 * np.asarray(self.size, float)

    @property
    def hi(self):
        return np.asarray(self.center, float) + 0.5 * np.asarray(self.size, float)


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float
    label: str
    color: tuple[int, int, int] = (160, 160, 160)


@dataclass(frozen=True)
class RaySample:
    """Per-ray answers: ``color`` (N, 3) uint8, ``label`` (N,) ids, ``depth`` (N,) metres.

    A field is ``None`` when its mode was not requested from a cube map.
    """

    color: np.ndarray
    label: np.ndarray
    depth: np.ndarray


@dataclass(frozen=True)
class Scene:
    width: float = 2.0
    depth: float = 2.0
    height: float = 2.0
    objects: tuple = ()
    light: tuple[float, float, float] | None = DEFAULT_LIGHT
    checker: bool = False
    label_ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if min(self.width, self.depth, self.height) <= 0:
            raise DomainError("room dimensions must be positive")
        object.__setattr__(self, "objects", tuple(self.objects))
        half = self.half_extent
        ids = {name: i + 1 for i, name in enumerate(ROOM_LABELS)}
        for obj in self.objects:
            if obj.label in ROOM_LABELS:
                raise DomainError(f"object label {obj.label!r} is reserved for the room")
            if isinstance(obj, Box):
                if np.any(np.asarray(obj.size) <= 0):
                    raise DomainError(f"box {obj.label!r} has a non-positive size")
                lo, hi = obj.lo, obj.hi
            elif isinstance(obj, Sphere):
                if obj.radius <= 0:
                    raise DomainError(f"sphere {obj.label!r} has a non-positive radius")
                c = np.asarray(obj.center, float)
                lo, hi = c - obj.radius, c + obj.radius
            else:
                raise TypeError(f"unsupported scene object {obj!r}")
            if np.any(lo < -half) or np.any(hi > half):
                raise DomainError(f"object {obj.label!r} is not inside the room")
            ids.setdefault(obj.label, len(ids) + 1)
        object.__setattr__(self, "label_ids", ids)

    @property
    def half_extent(self):
        return 0.5 * np.array([self.width, self.depth, self.height])

    @property
    def label_names(self):
        return {i: name for name, i in self.label_ids.items()}

    def contains(self, points):
        points = np.asarray(points, dtype=float)
        return np.all(np.abs(points) < self.half_extent, axis=-1)

    def cast(self, origin, dirs):
        return scene_cast(self, origin, dirs)

    def albedo_table(self):
        """``(n_labels + 1, 3)`` albedo in [0, 1] indexed by label id."""
        table = np.zeros((len(self.label_ids) + 1, 3))
        for name, color in ROOM_COLORS.items():
            table[self.label_ids[name]] = np.asarray(color) / 255.0
        return table


def reference_scene() -> Scene:
    """The 2 m cube used throughout the tests, with three objects kept clear of
    the origin and of the 0.5 m optical-center circle at z = 0."""
    return Scene(
        objects=(
            Sphere((0.5, 0.5, -0.6), 0.3, "ball", (200, 60, 50)),
            Box((-0.5, -0.4, -0.725), (0.6, 0.5, 0.45), "table", (90, 140, 200)),
            Box((0.7, -0.7, 0.0), (0.2, 0.2, 1.6), "column", (220, 200, 80)),
        )
    )


CAST_CHUNK = 1 << 18


def cast_chunked(oracle, origin, dirs, workers=1, chunk=CAST_CHUNK) -> RaySample:
    """``oracle.cast`` over fixed-size chunks, optionally on a thread pool.

    Chunk boundaries do not depend on ``workers`` and every ray is computed
    independently, so the result is the same for any worker count.
    """
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
    origin = np.asarray(origin, dtype=float)
    per_ray = origin.ndim == 2
    starts = range(0, max(len(dirs), 1), chunk)

    def run(s):
        o = origin[s : s + chunk] if per_ray else origin
        return oracle.cast(o, dirs[s : s + chunk])

    if workers > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return RaySample(
        color=np.concatenate([p.color for p in parts]),
        label=np.concatenate([p.label for p in parts]),
        depth=np.concatenate([p.depth for p in parts]),
    )


def _object_albedo(obj):
    return np.asarray(obj.color, dtype=float) / 255.0


def scene_cast(scene: Scene, origin, dirs) -> RaySample:
    """Nearest positive hit for every ray ``origin + t * dirs``.

    ``origin`` is one point or one point per ray and must lie strictly inside
    the room; ``dirs`` must be unit vectors.
    """
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    origin = np.asarray(origin, dtype=float)
    if not np.all(scene.contains(origin)):
        raise DomainError("ray origin must lie strictly inside the room")
    if dirs.size and np.abs(norm(dirs) - 1.0).max() > 1e-9:
        raise DomainError("ray directions must be unit vectors")
    o = np.broadcast_to(origin, dirs.shape)
    n_rays = dirs.shape[0]
    half = scene.half_extent

    t_best = np.full(n_rays, np.inf)
    label = np.zeros(n_rays, dtype=np.int32)
    axis_hit = np.zeros(n_rays, dtype=np.int8)
    normal = np.zeros((n_rays, 3))
    albedo = np.zeros((n_rays, 3))
    room_albedo = scene.albedo_table()

    with np.errstate(divide="ignore", invalid="ignore"):
        # room: exit face per axis
        for a in range(3):
            da = dirs[:, a]
            t = np.where(da > 0, (half[a] - o[:, a]) / da, np.where(da < 0, (-half[a] - o[:, a]) / da, np.inf))
            better = t < t_best
            pos, neg = _ROOM_FACES[a]
            lab = np.where(da > 0, scene.label_ids[pos], scene.label_ids[neg])
            t_best = np.where(better, t, t_best)
            label = np.where(better, lab, label)
            axis_hit = np.where(better, a, axis_hit)
        for a in range(3):
            normal[:, a] = np.where(axis_hit == a, -np.sign(dirs[:, a]), 0.0)
        albedo[:] = room_albedo[label]

        for obj in scene.objects:
            oid = scene.label_ids[obj.label]
            if isinstance(obj, Box):
                t, n = _box_hit(obj, o, dirs)
            else:
                t, n = _sphere_hit(obj, o, dirs)
            better = t < t_best
            if not better.any():
                continue
            t_best = np.where(better, t, t_best)
            label = np.where(better, oid, label)
            normal = np.where(better[:, None], n, normal)
            albedo = np.where(better[:, None], _object_albedo(obj), albedo)

    if scene.checker:
        hit = o + t_best[:, None] * dirs
        cells = np.floor(hit / CHECKER_SIZE)
        # parity from the two in-surface coordinates only
        dominant = np.argmax(np.abs(normal), axis=1)
        parity = (cells.sum(axis=1) - np.take_along_axis(cells, dominant[:, None], axis=1)[:, 0]) % 2
        albedo = albedo * np.where(parity == 1, CHECKER_DARK, 1.0)[:, None]

    if scene.light is None:
        shade = np.ones(n_rays)
    else:
        light = np.asarray(scene.light, dtype=float)
        light = light / np.sqrt(light @ light)
        lambert = normal[:, 0] * light[0] + normal[:, 1] * light[1] + normal[:, 2] * light[2]
        shade = np.minimum(1.0, np.maximum(0.0, lambert) + AMBIENT)
    color = np.clip(np.rint(albedo * shade[:, None] * 255.0), 0, 255).astype(np.uint8)
    return RaySample(color=color, label=label, depth=t_best)


def _box_hit(box: Box, o, d):
    lo, hi = box.lo, box.hi
    tmin = np.full(d.shape[0], -np.inf)
    tmax = np.full(d.shape[0], np.inf)
    enter_axis = np.zeros(d.shape[0], dtype=np.int8)
    exit_axis = np.zeros(d.shape[0], dtype=np.int8)
    for a in range(3):
        da, oa = d[:, a], o[:, a]
        parallel = da == 0
        inside_slab = (oa >= lo[a]) & (oa <= hi[a])
        t1 = (lo[a] - oa) / da
        t2 = (hi[a] - oa) / da
        # a ray parallel to the slab is either always or never inside it
        near = np.where(parallel, np.where(inside_slab, -np.inf, np.inf), np.minimum(t1, t2))
        far = np.where(parallel, np.where(inside_slab, np.inf, -np.inf), np.maximum(t1, t2))
        enter_axis = np.where(near > tmin, a, enter_axis)
        exit_axis = np.where(far < tmax, a, exit_axis)
        tmin = np.maximum(tmin, near)
        tmax = np.minimum(tmax, far)
    hit = (tmax >= tmin) & (tmax > 0)
    from_inside = tmin <= 0
    t = np.where(hit, np.where(from_inside, tmax, tmin), np.inf)
    axis = np.where(from_inside, exit_axis, enter_axis)
    n = np.zeros_like(d)
    for a in range(3):
        n[:, a] = np.where(axis == a, -np.sign(d[:, a]), 0.0)
    return t, n


def _sphere_hit(sph: Sphere, o, d):
    c = np.asarray(sph.center, dtype=float)
    oc = o - c
    b = oc[:, 0] * d[:, 0] + oc[:, 1] * d[:, 1] + oc[:, 2] * d[:, 2]
    cc = oc[:, 0] * oc[:, 0] + oc[:, 1] * oc[:, 1] + oc[:, 2] * oc[:, 2] - sph.radius * sph.radius
    disc = b * b - cc
    root = np.sqrt(np.maximum(disc, 0.0))
    t_near = -b - root
    t_far = -b + root
    t = np.where(t_near > 0, t_near, t_far)
    t = np.where((disc >= 0) & (t > 0), t, np.inf)
    p = o + np.where(np.isfinite(t), t, 0.0)[:, None] * d
    n = (p - c) / sph.radius
    facing = n[:, 0] * d[:, 0] + n[:, 1] * d[:, 1] + n[:, 2] * d[:, 2]
    n = np.where((facing > 0)[:, None], -n, n)
    return t, n


def parse_scene(text: str, source: str = "<scene>") -> Scene:
    """Parse the line-oriented scene format (see README)."""
    room = (2.0, 2.0, 2.0)
    objects = []
    light = DEFAULT_LIGHT
    checker = False
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        try:
            if head == "room":
                room = tuple(float(x) for x in _arity(args, 3))
            elif head == "box":
                a = _arity(args, 10)
                objects.append(
                    Box(tuple(map(float, a[0:3])), tuple(map(float, a[3:6])), a[6], _rgb(a[7:10]))
                )
            elif head == "sphere":
                a = _arity(args, 8)
                objects.append(Sphere(tuple(map(float, a[0:3])), float(a[3]), a[4], _rgb(a[5:8])))
            elif head == "light":
                light = tuple(float(x) for x in _arity(args, 3))
                if not any(light):
                    light = None
            elif head == "checker":
                (flag,) = _arity(args, 1)
                if flag not in ("on", "off"):
                    raise ValueError("checker expects 'on' or 'off'")
                checker = flag == "on"
            else:
                raise ValueError(f"unknown directive {head!r}")
        except ValueError as exc:
            errors.append(f"{source}:{lineno}: {exc}")
    if errors:
        raise DomainError("\n".join(errors))
    return Scene(*room, objects=tuple(objects), light=light, checker=checker)


def load_scene(path) -> Scene:
    path = Path(path)
    return parse_scene(path.read_text(encoding="utf-8"), str(path))


def format_scene(scene: Scene) -> str:
    lines = [f"room {scene.width!r} {scene.depth!r} {scene.height!r}"]
    for obj in scene.objects:
        rgb = " ".join(str(int(c)) for c in obj.color)
        if isinstance(obj, Box):
            nums = " ".join(repr(float(x)) for x in (*obj.center, *obj.size))
            lines.append(f"box {nums} {obj.label} {rgb}")
        else:
            nums = " ".join(repr(float(x)) for x in (*obj.center, obj.radius))
            lines.append(f"sphere {nums} {obj.label} {rgb}")
    if scene.light is None:
        lines.append("light 0 0 0")
    else:
        lines.append("light " + " ".join(repr(float(x)) for x in scene.light))
    lines.append(f"checker {'on' if scene.checker else 'off'}")
    return "\n".join(lines) + "\n"


def _arity(args, n):
    if len(args) != n:
        raise ValueError(f"expected {n} fields, got {len(args)}")
    return args


def _rgb(fields):
    rgb = tuple(int(x) for x in fields)
    if any(c < 0 or c > 255 for c in rgb):
        raise ValueError("colour components must be in 0..255")
    return rgb
