"""Render modes, composed images, the label palette and image file formats."""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

DEPTH_MAGIC = b"OMNIDPT0"


class RenderMode(enum.Enum):
    LIT = "lit"
    SEMANTIC = "semantic"
    DEPTH = "depth"


ALL_MODES = (RenderMode.LIT, RenderMode.SEMANTIC, RenderMode.DEPTH)


def label_color(label_id):
    """Palette colour for a label id.

    Multiplication by an odd constant is a bijection modulo 2**24, so distinct
    ids below 2**24 always get distinct colours; id 0 is black.
    """
    code = (np.asarray(label_id, dtype=np.int64) * 2654435761) % (1 << 24)
    return np.stack([(code >> 16) & 255, (code >> 8) & 255, code & 255], axis=-1).astype(np.uint8)


def color_to_label(rgb):
    """Inverse of :func:`label_color` for colours it produced."""
    rgb = np.asarray(rgb, dtype=np.int64)
    code = (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]
    # modular inverse of the palette multiplier
    inv = pow(2654435761, -1, 1 << 24)
    return ((code * inv) % (1 << 24)).astype(np.int64)


@dataclass
class Image:
    """A composed image.

    ``data`` is ``(H, W, 3)`` uint8 for lit and semantic modes and ``(H, W)``
    float64 metres for depth (NaN outside the field of view).  ``labels``
    carries semantic ids (0 outside the field of view).
    """

    mode: RenderMode
    data: np.ndarray
    valid: np.ndarray
    labels: np.ndarray | None = None

    @property
    def shape(self):
        return self.valid.shape


def write_png(path, image: Image):
    """Write a lit or semantic image; out-of-FOV pixels get alpha 0."""
    if image.mode is RenderMode.DEPTH:
        raise ValueError("depth images are written with write_depth")
    if image.valid.all():
        PILImage.fromarray(np.ascontiguousarray(image.data, dtype=np.uint8)).save(path)
    else:
        alpha = np.where(image.valid, 255, 0).astype(np.uint8)
        rgba = np.concatenate([image.data, alpha[..., None]], axis=-1)
        PILImage.fromarray(rgba).save(path)


def write_mask_png(path, mask):
    PILImage.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path)


def read_mask_png(path):
    arr = np.asarray(PILImage.open(path).convert("L"))
    return arr > 127


def write_rgb_png(path, rgb):
    PILImage.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8)).save(path)


def read_rgb_png(path):
    return np.asarray(PILImage.open(path).convert("RGB"))


def write_depth(path, depth):
    """Little-endian float32 row-major payload behind a 16-byte header."""
    depth = np.asarray(depth)
    h, w = depth.shape
    with open(path, "wb") as fh:
        fh.write(DEPTH_MAGIC + struct.pack("<II", w, h))
        fh.write(depth.astype("<f4").tobytes(order="C"))


def read_depth(path):
    raw = Path(path).read_bytes()
    if raw[:8] != DEPTH_MAGIC:
        raise ValueError(f"{path}: not an OMNIDPT0 depth file")
    w, h = struct.unpack("<II", raw[8:16])
    payload = np.frombuffer(raw, dtype="<f4", offset=16)
    if payload.size != w * h:
        raise ValueError(f"{path}: expected {w * h} samples, found {payload.size}")
    return payload.reshape(h, w).astype(np.float32)


def write_depth_preview(path, depth):
    """16-bit grayscale preview plus a ``.txt`` sidecar with metres per grey level."""
    depth = np.asarray(depth, dtype=float)
    finite = np.isfinite(depth)
    top = float(depth[finite].max()) if finite.any() else 1.0
    scale = top / 65535.0 if top > 0 else 1.0
    grey = np.zeros(depth.shape, dtype=np.uint16)
    grey[finite] = np.clip(np.rint(depth[finite] / scale), 0, 65535).astype(np.uint16)
    PILImage.fromarray(grey).save(path)
    sidecar = Path(path).with_suffix(".txt")
    sidecar.write_text(f"metres_per_level {scale!r}\n")
    return scale
