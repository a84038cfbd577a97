"""Virtual lightstage: procedural heads, camera arc, light rig, renderer.

Everything here is plain numpy and fully deterministic. The renderer is
linear in light by construction (no shadows, no interreflection), which
makes a weighted sum of one-light-at-a-time images equal to a direct
render under the same weights up to float accumulation order.
"""

from .camera import CameraPose, arc_poses, camera_rays, pose_from_angles, project, triangulate
from .lights import LightRig, fibonacci_directions
from .subject import SubjectParams, SubjectScene, generate_subject
from .render import (
    GeometryPass,
    keypoint_visibility,
    project_keypoints,
    render_direct,
    render_olat,
    shade_olat,
    shade_weighted,
    trace,
)
from .dataset import build_dataset, load_meta, verify_dataset

__all__ = [
    "CameraPose",
    "arc_poses",
    "camera_rays",
    "pose_from_angles",
    "project",
    "triangulate",
    "LightRig",
    "fibonacci_directions",
    "SubjectParams",
    "SubjectScene",
    "generate_subject",
    "GeometryPass",
    "trace",
    "shade_olat",
    "shade_weighted",
    "render_olat",
    "render_direct",
    "project_keypoints",
    "keypoint_visibility",
    "build_dataset",
    "load_meta",
    "verify_dataset",
]
