"""Job configuration files.

Format: ``[section]`` headers followed by ``key = value`` lines; ``#`` starts
a comment.  Sections are ``[scene]``, ``[camera]``, ``[pose]`` and
``[output]``.  Angles are in degrees, lengths in metres, sizes in pixels.
Every problem found is reported at once, each with its line number.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from omnisynth.cli.catalog import FAMILIES, FAMILY_KEYS, LENSES, MIRROR_KEYS, MIRRORS, entry_for
from omnisynth.errors import ConfigError

MODES = ("lit", "semantic", "depth")
WORKERS_ENV = "OMNISYNTH_WORKERS"


def _real(text):
    x = float(text)
    if not math.isfinite(x):
        raise ValueError(f"{text!r} is not a finite number")
    return x


def _int(text):
    return int(text)


def _bool(text):
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _reals(text):
    return tuple(_real(x) for x in _list(text))


def _vec3(text):
    v = _reals(text)
    if len(v) != 3:
        raise ValueError("expected three comma-separated numbers")
    return v


def _str(text):
    if not text:
        raise ValueError("value is empty")
    return text


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"{text!r} is not one of {', '.join(options)}")
        return text

    return parse


def _modes(text):
    modes = _list(text)
    if not modes:
        raise ValueError("at least one mode is required")
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}; choose from {', '.join(MODES)}")
    if len(set(modes)) != len(modes):
        raise ValueError("modes are listed more than once")
    return modes


# (parser, range check or None, range description)
def _open(lo, hi):
    return (lambda x: lo < x < hi), f"({lo:g}, {hi:g})"


def _half_open(lo, hi):
    return (lambda x: lo < x <= hi), f"({lo:g}, {hi:g}]"


_POS = ((lambda x: x > 0), "(0, inf)")
_NONNEG = ((lambda x: x >= 0), "[0, inf)")
_ANY = (None, "")

SCHEMA = {
    "scene": {
        "file": (_str, *_ANY),
        "cubemaps": (_list, *_ANY),
        "planar_depth": (_bool, *_ANY),
        "via": (_choice(("direct", "cubemap")), *_ANY),
        "face_res": (_int, (lambda x: x >= 1), "[1, inf)"),
    },
    "camera": {
        "model": (_choice(FAMILIES), *_ANY),
        "width": (_int, (lambda x: x >= 1), "[1, inf)"),
        "height": (_int, (lambda x: x >= 1), "[1, inf)"),
        "fov_h": (_real, *_half_open(0, 360)),
        "fov_v": (_real, *_open(0, 180)),
        "true_cylinder": (_bool, *_ANY),
        "lens": (_choice(LENSES), *_ANY),
        "fov": (_real, *_half_open(0, 360)),
        "f": (_real, *_POS),
        "flip_azimuth": (_bool, *_ANY),
        "mirror": (_choice(MIRRORS), *_ANY),
        "d": (_real, *_POS),
        "p": (_real, *_POS),
        "fx": (_real, *_POS),
        "fy": (_real, *_POS),
        "u0": (_real, *_ANY),
        "v0": (_real, *_ANY),
        "tau": (_real, *_open(0, 45)),
        "apex_distance": (_real, *_POS),
        "z_c": (_real, *_ANY),
        "r_c": (_real, *_POS),
        "host_fov": (_real, *_open(0, 180)),
        "z_m": (_real, *_POS),
        "r_s": (_real, *_POS),
        "a": (_reals, (lambda a: len(a) >= 1 and a[0] != 0), "a non-empty list with a_0 != 0"),
        "degree": (_int, (lambda x: 1 <= x <= 12), "[1, 12]"),
        "cx": (_real, *_ANY),
        "cy": (_real, *_ANY),
        "k1": (_real, *_ANY),
        "k2": (_real, *_ANY),
        "k3": (_real, *_ANY),
        "k4": (_real, *_ANY),
        "radius": (_real, *_NONNEG),
        "pitch": (_real, *_ANY),
        "center": (_vec3, *_ANY),
    },
    "pose": {
        "position": (_vec3, *_ANY),
        "yaw": (_real, *_ANY),
        "pitch": (_real, *_ANY),
        "roll": (_real, *_ANY),
        "trajectory": (_str, *_ANY),
    },
    "output": {
        "dir": (_str, *_ANY),
        "modes": (_modes, *_ANY),
        "layout": (_bool, *_ANY),
        "dilation": (_real, *_NONNEG),
        "depth_preview": (_bool, *_ANY),
        "workers": (_int, (lambda x: x >= 1), "[1, inf)"),
    },
}


@dataclass(frozen=True)
class JobConfig:
    model: str
    width: int
    height: int
    camera: tuple  # sorted (key, value) pairs of model parameters
    scene_file: str | None = None
    cubemaps: tuple = ()
    planar_depth: bool = False
    via: str = "direct"
    face_res: int = 1024
    position: tuple = (0.0, 0.0, 0.0)
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0
    trajectory: str | None = None
    poses: tuple = ()  # (x, y, z, yaw, pitch, roll) per frame
    out_dir: str = "out"
    modes: tuple = MODES
    layout: bool = False
    dilation: float | None = None
    depth_preview: bool = True
    workers: int | None = None
    base_dir: str = field(default=".", compare=False)

    @property
    def camera_params(self):
        return dict(self.camera)

    def resolve(self, path):
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def effective_workers(self):
        if self.workers is not None:
            return self.workers
        env = os.environ.get(WORKERS_ENV)
        try:
            return max(1, int(env)) if env else 1
        except ValueError:
            return 1


def parse_trajectory_poses(text, source):
    """Pose list file: one ``x y z yaw pitch roll`` line per frame (degrees)."""
    poses, errors = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            if len(parts) != 6:
                raise ValueError("expected 'x y z yaw pitch roll'")
            poses.append(tuple(_real(x) for x in parts))
        except ValueError as exc:
            errors.append(f"{source}:{lineno}: {exc}")
    if not poses and not errors:
        errors.append(f"{source}: trajectory has no poses")
    return tuple(poses), errors


def parse_config(text, base_dir=".", source="<config>") -> JobConfig:
    values = {s: {} for s in SCHEMA}
    lines = {s: {} for s in SCHEMA}
    errors = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            name = line.strip("[]").strip()
            if not line.endswith("]") or name not in SCHEMA:
                errors.append(f"line {lineno}: unknown section {line!r}")
                section = None
            else:
                section = name
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (x.strip() for x in line.split("=", 1))
        if section is None:
            errors.append(f"line {lineno}: {key!r} appears outside a known section")
            continue
        rule = SCHEMA[section].get(key)
        if rule is None:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        if key in values[section]:
            errors.append(f"line {lineno}: {key!r} is set twice in [{section}]")
            continue
        parser, check, desc = rule
        try:
            parsed = parser(value)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
            continue
        if check is not None and not check(parsed):
            errors.append(f"line {lineno}: {key} = {value} is out of range {desc}")
            continue
        values[section][key] = parsed
        lines[section][key] = lineno

    cam = dict(values["camera"])
    cam_lines = lines["camera"]
    family = cam.pop("model", None)
    width = cam.pop("width", None)
    height = cam.pop("height", None)
    if family is None:
        if "model" not in cam_lines:
            errors.append("[camera]: missing required key 'model'")
    else:
        where = f"line {cam_lines['model']}"
        allowed = FAMILY_KEYS[family]
        for key in sorted(cam):
            if key not in allowed:
                errors.append(f"line {cam_lines[key]}: {key!r} does not apply to model = {family}")
        if family == "fisheye" and "lens" not in cam:
            errors.append(f"{where}: model = fisheye requires 'lens' ({', '.join(LENSES)})")
        if family == "catadioptric":
            mirror = cam.get("mirror")
            if mirror is None:
                errors.append(f"{where}: model = catadioptric requires 'mirror' ({', '.join(MIRRORS)})")
            else:
                for key in sorted(cam):
                    if key != "mirror" and key in allowed and key not in MIRROR_KEYS[mirror]:
                        errors.append(f"line {cam_lines[key]}: {key!r} does not apply to mirror = {mirror}")
                if mirror == "hyperbolic" and "fov" in cam:
                    d, p = cam.get("d", 1.0), cam.get("p", 0.25)
                    if math.cos(math.radians(cam["fov"]) / 2) + d / math.hypot(d, 2 * p) <= 0:
                        errors.append(f"line {cam_lines['fov']}: fov exceeds what this hyperbolic mirror can see")
        if family == "scaramuzza" and "a" in cam and "degree" in cam:
            errors.append(f"line {cam_lines['degree']}: 'degree' only applies when 'a' is not given")
        if family == "fisheye" and cam.get("lens") == "orthogonal" and cam.get("fov", 0) > 180:
            errors.append(f"line {cam_lines['fov']}: an orthogonal fisheye sees at most 180 degrees")

    scene = values["scene"]
    if "file" in scene and "cubemaps" in scene:
        errors.append(f"line {lines['scene']['cubemaps']}: give either 'file' or 'cubemaps', not both")
    cubemaps = scene.get("cubemaps", ())
    if cubemaps and scene.get("via", "cubemap") != "cubemap":
        errors.append(f"line {lines['scene']['via']}: ingested cube maps are sampled via = cubemap")

    pose = values["pose"]
    poses = ()
    if "trajectory" in pose:
        for key in ("position", "yaw", "pitch", "roll"):
            if key in pose:
                errors.append(f"line {lines['pose'][key]}: {key!r} conflicts with 'trajectory'")
        path = Path(pose["trajectory"])
        path = path if path.is_absolute() else Path(base_dir) / path
        try:
            poses, perr = parse_trajectory_poses(path.read_text(encoding="utf-8"), str(path))
            errors.extend(perr)
        except OSError as exc:
            errors.append(f"line {lines['pose']['trajectory']}: cannot read trajectory: {exc.strerror}")
    else:
        p = pose.get("position", (0.0, 0.0, 0.0))
        poses = ((*p, pose.get("yaw", 0.0), pose.get("pitch", 0.0), pose.get("roll", 0.0)),)

    out = values["output"]
    noncentral = family == "noncentral_panorama" or cam.get("mirror") in ("conical", "spherical")
    if out.get("layout") and noncentral:
        errors.append(f"line {lines['output']['layout']}: layout ground truth is only available for central models")

    if errors:
        raise ConfigError(errors)

    entry = entry_for(family, cam)
    return JobConfig(
        model=family,
        width=width if width is not None else entry.default_size[0],
        height=height if height is not None else entry.default_size[1],
        camera=tuple(sorted(cam.items())),
        scene_file=scene.get("file"),
        cubemaps=tuple(cubemaps),
        planar_depth=scene.get("planar_depth", False),
        via=scene.get("via", "cubemap" if cubemaps else "direct"),
        face_res=scene.get("face_res", 1024),
        position=pose.get("position", (0.0, 0.0, 0.0)),
        yaw=pose.get("yaw", 0.0),
        pitch=pose.get("pitch", 0.0),
        roll=pose.get("roll", 0.0),
        trajectory=pose.get("trajectory"),
        poses=poses,
        out_dir=out.get("dir", "out"),
        modes=out.get("modes", MODES),
        layout=out.get("layout", False),
        dilation=out.get("dilation"),
        depth_preview=out.get("depth_preview", True),
        workers=out.get("workers"),
        base_dir=str(base_dir),
    )


def load_config(path) -> JobConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent, source=str(path))


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def serialize(cfg: JobConfig) -> str:
    """Config text that parses back to an equal :class:`JobConfig`."""
    out = ["[scene]"]
    if cfg.scene_file is not None:
        out.append(f"file = {cfg.scene_file}")
    if cfg.cubemaps:
        out.append(f"cubemaps = {_fmt(cfg.cubemaps)}")
    out.append(f"planar_depth = {_fmt(cfg.planar_depth)}")
    out.append(f"via = {cfg.via}")
    out.append(f"face_res = {cfg.face_res}")
    out += ["", "[camera]", f"model = {cfg.model}", f"width = {cfg.width}", f"height = {cfg.height}"]
    out += [f"{k} = {_fmt(v)}" for k, v in cfg.camera]
    out += ["", "[pose]"]
    if cfg.trajectory is not None:
        out.append(f"trajectory = {cfg.trajectory}")
    else:
        out.append(f"position = {_fmt(tuple(cfg.position))}")
        out += [f"yaw = {_fmt(cfg.yaw)}", f"pitch = {_fmt(cfg.pitch)}", f"roll = {_fmt(cfg.roll)}"]
    out += ["", "[output]", f"dir = {cfg.out_dir}", f"modes = {_fmt(tuple(cfg.modes))}"]
    out.append(f"layout = {_fmt(cfg.layout)}")
    if cfg.dilation is not None:
        out.append(f"dilation = {_fmt(cfg.dilation)}")
    out.append(f"depth_preview = {_fmt(cfg.depth_preview)}")
    if cfg.workers is not None:
        out.append(f"workers = {cfg.workers}")
    return "\n".join(out) + "\n"
