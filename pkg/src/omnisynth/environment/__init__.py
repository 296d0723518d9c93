"""Environment oracles: procedural scene, cube maps and their file formats."""
from omnisynth.environment.cubemap import FACE_NAMES, CubeMap, acquire_cubemap, cubemap_sample, face_texel_dirs, select_face
from omnisynth.environment.fileio import load_cubemap, save_cubemap
from omnisynth.environment.oracle import CubeMapOracle, DirectAcquisition, SceneOracle
from omnisynth.environment.scene import (
    Box,
    RaySample,
    Scene,
    Sphere,
    format_scene,
    load_scene,
    parse_scene,
    reference_scene,
    scene_cast,
)
