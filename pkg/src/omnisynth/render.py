"""Single entry point that renders any supported model."""
from __future__ import annotations

from omnisynth.central import CENTRAL_MODELS, ImageGrid, compose_central
from omnisynth.geometry import Pose
from omnisynth.imaging import ALL_MODES
from omnisynth.noncentral import NONCENTRAL_MODELS, compose_noncentral


def is_central(model) -> bool:
    return isinstance(model, CENTRAL_MODELS)


def render(model, pose: Pose, grid: ImageGrid, oracle, modes=ALL_MODES, return_groups=False):
    """Render ``model`` in every mode of ``modes``; returns ``{mode: Image}``.

    With ``return_groups`` a second value lists ``(key, world center, pixels)``
    for non-central models (``None`` for central ones).
    """
    modes = tuple(modes)
    if is_central(model):
        images = compose_central(model, pose, grid, modes, oracle)
        return (images, None) if return_groups else images
    if isinstance(model, NONCENTRAL_MODELS):
        return compose_noncentral(model, pose, grid, modes, oracle, return_groups=return_groups)
    raise TypeError(f"unknown camera model {model!r}")
