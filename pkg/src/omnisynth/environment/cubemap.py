"""Cube maps: six 90 degree pinhole faces around one point, and sampling them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from omnisynth.environment.scene import RaySample, cast_chunked
from omnisynth.errors import DomainError
from omnisynth.geometry import is_rotation, normalize, rotate
from omnisynth.imaging import ALL_MODES, RenderMode

FACE_NAMES = ("px", "nx", "py", "ny", "pz", "nz")

# rows: forward, right, down.  right x down = forward for every face.
FACE_BASES = np.array(
    [
        [[1, 0, 0], [0, -1, 0], [0, 0, -1]],
        [[-1, 0, 0], [0, 1, 0], [0, 0, -1]],
        [[0, 1, 0], [1, 0, 0], [0, 0, -1]],
        [[0, -1, 0], [-1, 0, 0], [0, 0, -1]],
        [[0, 0, 1], [0, 1, 0], [-1, 0, 0]],
        [[0, 0, -1], [0, -1, 0], [-1, 0, 0]],
    ],
    dtype=float,
)


def face_texel_dirs(face: int, face_res: int) -> np.ndarray:
    """Unit cube-local directions through the texel centres of one face, ``(F, F, 3)``."""
    f, r, d = FACE_BASES[face]
    t = 2.0 * (np.arange(face_res) + 0.5) / face_res - 1.0
    b, a = np.meshgrid(t, t, indexing="ij")  # row index j -> b, column i -> a
    dirs = f + a[..., None] * r + b[..., None] * d
    return normalize(dirs)


def select_face(local_dirs):
    """Face index and in-face coordinates ``(a, b)`` in [-1, 1] per direction.

    The face is the axis of largest magnitude; ties go to the earlier axis,
    which reproduces the order +X, -X, +Y, -Y, +Z, -Z.
    """
    local_dirs = np.asarray(local_dirs, dtype=float)
    mag = np.abs(local_dirs)
    axis = np.argmax(mag, axis=-1)
    major = np.take_along_axis(local_dirs, axis[..., None], axis=-1)[..., 0]
    face = 2 * axis + (major < 0)
    basis = FACE_BASES[face]
    m = np.abs(major)
    a = (basis[..., 1, 0] * local_dirs[..., 0] + basis[..., 1, 1] * local_dirs[..., 1] + basis[..., 1, 2] * local_dirs[..., 2]) / m
    b = (basis[..., 2, 0] * local_dirs[..., 0] + basis[..., 2, 1] * local_dirs[..., 1] + basis[..., 2, 2] * local_dirs[..., 2]) / m
    return face, a, b


@dataclass(frozen=True)
class CubeMap:
    """Six ``F x F`` faces per captured mode, in :data:`FACE_NAMES` order.

    ``lit`` is ``(6, F, F, 3)`` uint8, ``labels`` ``(6, F, F)`` int, ``depth``
    ``(6, F, F)`` float.  Modes that were not captured are ``None``.
    """

    center: np.ndarray
    orientation: np.ndarray
    face_res: int
    lit: np.ndarray | None = None
    labels: np.ndarray | None = None
    depth: np.ndarray | None = None
    label_names: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.array(self.center, dtype=float).reshape(3)
        R = np.array(self.orientation, dtype=float).reshape(3, 3)
        if not is_rotation(R):
            raise DomainError("cube-map orientation is not a rotation")
        if self.face_res < 1:
            raise DomainError("face_res must be at least 1")
        F = self.face_res
        for name, arr, tail in (("lit", self.lit, (3,)), ("labels", self.labels, ()), ("depth", self.depth, ())):
            if arr is not None and arr.shape != (6, F, F) + tail:
                raise DomainError(f"{name} faces must have shape {(6, F, F) + tail}, got {arr.shape}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "orientation", R)

    @property
    def modes(self):
        have = {RenderMode.LIT: self.lit, RenderMode.SEMANTIC: self.labels, RenderMode.DEPTH: self.depth}
        return tuple(m for m in ALL_MODES if have[m] is not None)

    def sample(self, dirs, modes=ALL_MODES):
        return cubemap_sample(self, dirs, modes)


def acquire_cubemap(oracle, center, orientation=None, face_res=256, modes=ALL_MODES, workers=1) -> CubeMap:
    """Render the six faces at ``center`` by casting through every texel centre.

    ``oracle`` is anything with ``cast(origin, dirs) -> RaySample``, such as a
    :class:`~omnisynth.environment.scene.Scene`.
    """
    if isinstance(modes, RenderMode):
        modes = (modes,)
    if face_res < 1:
        raise DomainError("face_res must be at least 1")
    R = np.eye(3) if orientation is None else np.asarray(orientation, dtype=float)
    F = face_res
    dirs = np.stack([face_texel_dirs(k, F) for k in range(6)]).reshape(-1, 3)
    world = rotate(R, dirs)
    # renormalize after rotation so the caster's unit-norm check is exact
    world = normalize(world)
    sample = cast_chunked(oracle, np.asarray(center, dtype=float), world, workers=workers)
    lit = sample.color.reshape(6, F, F, 3) if RenderMode.LIT in modes else None
    labels = sample.label.reshape(6, F, F) if RenderMode.SEMANTIC in modes else None
    depth = sample.depth.reshape(6, F, F) if RenderMode.DEPTH in modes else None
    names = dict(getattr(oracle, "label_names", {}) or {})
    return CubeMap(center, R, F, lit, labels, depth, names)


def cubemap_sample(cm: CubeMap, dirs, modes=ALL_MODES):
    """Look up world directions in a cube map.

    Lit uses bilinear filtering with clamped face edges; semantic and depth
    use the nearest texel.
    """
    if isinstance(modes, RenderMode):
        modes = (modes,)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    local = rotate(cm.orientation.T, dirs)
    face, a, b = select_face(local)
    F = cm.face_res
    x = (a + 1.0) * 0.5 * F
    y = (b + 1.0) * 0.5 * F
    i = np.clip(np.floor(x).astype(np.int64), 0, F - 1)
    j = np.clip(np.floor(y).astype(np.int64), 0, F - 1)

    color = label = depth = None
    if RenderMode.LIT in modes:
        if cm.lit is None:
            raise DomainError("cube map has no lit faces")
        xs = np.clip(x - 0.5, 0.0, F - 1.0)
        ys = np.clip(y - 0.5, 0.0, F - 1.0)
        i0 = np.minimum(np.floor(xs).astype(np.int64), F - 1)
        j0 = np.minimum(np.floor(ys).astype(np.int64), F - 1)
        i1 = np.minimum(i0 + 1, F - 1)
        j1 = np.minimum(j0 + 1, F - 1)
        wx = (xs - i0)[:, None]
        wy = (ys - j0)[:, None]
        lit = cm.lit
        top = lit[face, j0, i0] * (1 - wx) + lit[face, j0, i1] * wx
        bot = lit[face, j1, i0] * (1 - wx) + lit[face, j1, i1] * wx
        color = np.clip(np.rint(top * (1 - wy) + bot * wy), 0, 255).astype(np.uint8)
    if RenderMode.SEMANTIC in modes:
        if cm.labels is None:
            raise DomainError("cube map has no semantic faces")
        label = cm.labels[face, j, i]
    if RenderMode.DEPTH in modes:
        if cm.depth is None:
            raise DomainError("cube map has no depth faces")
        depth = cm.depth[face, j, i].astype(float)
    return RaySample(color=color, label=label, depth=depth)
