"""Environment oracles: where the composers get their samples from.

An oracle hands out *acquisitions*.  ``oracle.acquire(center, modes)`` returns
an object with ``center`` and ``sample(dirs, modes) -> RaySample`` that answers
rays starting at ``center``.  Non-central composers acquire once per optical
center group, central composers once per image.
"""
from __future__ import annotations

import numpy as np

from omnisynth.environment.cubemap import CubeMap, acquire_cubemap
from omnisynth.environment.scene import RaySample, Scene, cast_chunked
from omnisynth.errors import DomainError
from omnisynth.imaging import ALL_MODES


class DirectAcquisition:
    """Exact ray casting into the procedural scene from a fixed point."""

    def __init__(self, scene: Scene, center, workers=1):
        self.scene = scene
        self.center = np.array(center, dtype=float).reshape(3)
        self.workers = workers
        if not scene.contains(self.center):
            raise DomainError("acquisition center must lie strictly inside the room")

    def sample(self, dirs, modes=ALL_MODES) -> RaySample:
        return cast_chunked(self.scene, self.center, dirs, workers=self.workers)


class SceneOracle:
    """Acquisitions from a :class:`Scene`, either cast directly or through a
    freshly rendered cube map of ``face_res`` texels per side."""

    def __init__(self, scene: Scene, via="direct", face_res=512, orientation=None, workers=1):
        if via not in ("direct", "cubemap"):
            raise ValueError("via must be 'direct' or 'cubemap'")
        self.scene = scene
        self.via = via
        self.face_res = int(face_res)
        self.orientation = np.eye(3) if orientation is None else np.asarray(orientation, dtype=float)
        self.workers = workers

    @property
    def label_names(self):
        return self.scene.label_names

    def acquire(self, center, modes=ALL_MODES):
        if self.via == "direct":
            return DirectAcquisition(self.scene, center, self.workers)
        if not self.scene.contains(np.asarray(center, dtype=float)):
            raise DomainError("acquisition center must lie strictly inside the room")
        return acquire_cubemap(self.scene, center, self.orientation, self.face_res, modes, self.workers)


class CubeMapOracle:
    """Pre-captured cube maps (for example imported from disk), looked up by
    acquisition center."""

    def __init__(self, cubemaps, tol=1e-9):
        self.cubemaps = list(cubemaps)
        if not self.cubemaps:
            raise DomainError("at least one cube map is required")
        self.tol = tol

    @property
    def label_names(self):
        names = {}
        for cm in self.cubemaps:
            names.update(cm.label_names)
        return names

    def acquire(self, center, modes=ALL_MODES) -> CubeMap:
        center = np.asarray(center, dtype=float)
        for cm in self.cubemaps:
            if np.abs(cm.center - center).max() <= self.tol:
                missing = [m for m in modes if m not in cm.modes]
                if missing:
                    raise DomainError(f"cube map at {cm.center} lacks modes {[m.value for m in missing]}")
                return cm
        raise DomainError(f"no cube map was captured at {center.tolist()}")
