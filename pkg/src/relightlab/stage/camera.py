"""Pinhole cameras on a frontal arc around the head.

World frame: +Y up, +Z toward the frontal camera, head centered at the
origin. Camera frame follows the usual computer-vision convention
(+X right, +Y down, +Z forward); pixel (u, v) has u growing rightward
and v growing downward, principal point at the image center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraPose:
    """A look-at-origin camera parameterized by arc angles."""

    yaw_deg: float
    pitch_deg: float
    distance: float
    focal_px: float
    width: int
    height: int

    @property
    def position(self) -> np.ndarray:
        yaw = np.deg2rad(self.yaw_deg)
        pitch = np.deg2rad(self.pitch_deg)
        return self.distance * np.array(
            [np.sin(yaw) * np.cos(pitch), np.sin(pitch), np.cos(yaw) * np.cos(pitch)],
            dtype=np.float64,
        )

    @property
    def rotation(self) -> np.ndarray:
        """World-to-camera rotation; rows are the camera axes in world coords."""
        center = self.position
        forward = -center / np.linalg.norm(center)
        up = np.array([0.0, 1.0, 0.0])
        right = np.cross(forward, up)
        right = right / np.linalg.norm(right)
        down = np.cross(forward, right)
        return np.stack([right, down, forward])

    @property
    def intrinsics(self) -> np.ndarray:
        return np.array(
            [
                [self.focal_px, 0.0, self.width / 2.0],
                [0.0, self.focal_px, self.height / 2.0],
                [0.0, 0.0, 1.0],
            ]
        )

    def to_dict(self) -> dict:
        return {
            "yaw_deg": self.yaw_deg,
            "pitch_deg": self.pitch_deg,
            "distance": self.distance,
            "focal_px": self.focal_px,
            "width": self.width,
            "height": self.height,
        }

    @staticmethod
    def from_dict(d: dict) -> "CameraPose":
        return CameraPose(**d)


def focal_for_fov(fov_deg: float, width: int) -> float:
    return 0.5 * width / np.tan(np.deg2rad(fov_deg) / 2.0)


def pose_from_angles(
    yaw_deg: float,
    pitch_deg: float,
    distance: float = 3.2,
    fov_deg: float = 45.0,
    size: int = 64,
) -> CameraPose:
    return CameraPose(
        yaw_deg=float(yaw_deg),
        pitch_deg=float(pitch_deg),
        distance=float(distance),
        focal_px=float(focal_for_fov(fov_deg, size)),
        width=size,
        height=size,
    )


def arc_poses(
    count: int,
    yaw_limit_deg: float = 45.0,
    pitch_limit_deg: float = 15.0,
    distance: float = 3.2,
    fov_deg: float = 45.0,
    size: int = 64,
) -> list[CameraPose]:
    """Evenly spaced yaws across the arc with a fixed sinusoidal pitch sweep."""
    yaws = np.linspace(-yaw_limit_deg, yaw_limit_deg, count)
    pitches = pitch_limit_deg * np.sin(2.0 * np.pi * np.arange(count) / count)
    return [
        pose_from_angles(y, p, distance=distance, fov_deg=fov_deg, size=size)
        for y, p in zip(yaws, pitches)
    ]


def project(pose: CameraPose, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project world points to pixels.

    Parameters
    ----------
    points : (M, 3) array of world coordinates.

    Returns
    -------
    uv : (M, 2) pixel coordinates.
    depth : (M,) camera-space z of each point.
    """
    p = np.asarray(points, dtype=np.float64)
    cam = (pose.rotation @ (p - pose.position).T).T
    z = cam[:, 2]
    uv = (pose.intrinsics @ (cam / z[:, None]).T).T[:, :2]
    return uv, z


def camera_rays(pose: CameraPose) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel ray origins and unit directions in world space.

    Rays go through pixel centers (u + 0.5, v + 0.5).
    """
    h, w = pose.height, pose.width
    u = np.arange(w) + 0.5
    v = np.arange(h) + 0.5
    uu, vv = np.meshgrid(u, v)
    k = pose.intrinsics
    d_cam = np.stack(
        [(uu - k[0, 2]) / k[0, 0], (vv - k[1, 2]) / k[1, 1], np.ones_like(uu)],
        axis=-1,
    )
    d_world = d_cam @ pose.rotation  # R^T applied to each direction
    d_world /= np.linalg.norm(d_world, axis=-1, keepdims=True)
    origins = np.broadcast_to(pose.position, d_world.shape).copy()
    return origins, d_world


def triangulate(poses: list[CameraPose], uvs: np.ndarray) -> np.ndarray:
    """Least-squares 3D point from pixel observations in several cameras.

    Uses the direct linear transform on rows of each camera's projection
    matrix; needs at least two views.
    """
    rows = []
    for pose, (u, v) in zip(poses, np.asarray(uvs, dtype=np.float64)):
        rt = np.hstack([pose.rotation, (-pose.rotation @ pose.position)[:, None]])
        pm = pose.intrinsics @ rt
        rows.append(u * pm[2] - pm[0])
        rows.append(v * pm[2] - pm[1])
    a = np.stack(rows)
    _, _, vh = np.linalg.svd(a)
    x = vh[-1]
    return x[:3] / x[3]
