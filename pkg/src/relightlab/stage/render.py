"""Ray-traced rendering of subject scenes under directional lights.

The shading model is Lambertian diffuse plus a Blinn-Phong specular
lobe gated on the diffuse term, with no shadows and no interreflection,
so radiance is exactly linear in the light: a weighted sum over the
rig's one-light-at-a-time images reproduces a direct render under the
same weights. Background pixels are exactly zero.

The geometry pass (ray march + bisection root refinement) depends only
on the subject and camera, so it can be computed once and reused across
any number of lighting evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraPose, camera_rays, project
from .lights import LightRig
from .subject import SubjectParams, SubjectScene


@dataclass
class GeometryPass:
    """Per-pixel surface attributes for one (subject, camera) pair."""

    hit: np.ndarray  # (H, W) bool
    points: np.ndarray  # (H, W, 3) world positions (zero where miss)
    normals: np.ndarray  # (H, W, 3) unit outward normals
    albedo: np.ndarray  # (H, W, 3)
    spec_strength: np.ndarray  # (H, W)
    spec_power: np.ndarray  # (H, W)
    view: np.ndarray  # (H, W, 3) unit directions surface -> camera


def _march_rays(
    scene: SubjectScene,
    origins: np.ndarray,
    dirs: np.ndarray,
    march_steps: int,
    bisect_iters: int,
) -> tuple[np.ndarray, np.ndarray]:
    """First surface crossing along each ray.

    Returns (hit mask, parameter t). Rays are clipped to the scene's
    bounding sphere; the surface is located by fixed-step sign search
    then bisection, all vectorized across rays.
    """
    m = len(dirs)
    b = np.einsum("ij,ij->i", origins, dirs)
    c = np.einsum("ij,ij->i", origins, origins) - scene.bound_radius**2
    disc = b * b - c
    inside = disc > 0.0
    sq = np.sqrt(np.maximum(disc, 0.0))
    t_enter = np.maximum(-b - sq, 1e-6)
    t_exit = -b + sq

    hit = np.zeros(m, dtype=bool)
    t_lo = np.zeros(m)
    t_hi = np.zeros(m)

    active = np.flatnonzero(inside & (t_exit > t_enter))
    if len(active) == 0:
        return hit, t_lo
    t_prev = t_enter[active]
    f_prev = scene.field(origins[active] + t_prev[:, None] * dirs[active])
    span = (t_exit[active] - t_enter[active]) / march_steps
    for step in range(1, march_steps + 1):
        t_cur = t_enter[active] + span * step
        f_cur = scene.field(origins[active] + t_cur[:, None] * dirs[active])
        crossed = (f_prev > 0.0) & (f_cur <= 0.0)
        if np.any(crossed):
            idx = active[crossed]
            hit[idx] = True
            t_lo[idx] = t_prev[crossed]
            t_hi[idx] = t_cur[crossed]
            keep = ~crossed
            active = active[keep]
            t_prev = t_cur[keep]
            f_prev = f_cur[keep]
            span = span[keep]
            if len(active) == 0:
                break
        else:
            t_prev = t_cur
            f_prev = f_cur

    found = np.flatnonzero(hit)
    if len(found) == 0:
        return hit, t_lo
    lo = t_lo[found]
    hi = t_hi[found]
    o = origins[found]
    d = dirs[found]
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        f_mid = scene.field(o + mid[:, None] * d)
        neg = f_mid <= 0.0
        hi = np.where(neg, mid, hi)
        lo = np.where(neg, lo, mid)
    t_lo[found] = 0.5 * (lo + hi)
    return hit, t_lo


def trace(
    scene: SubjectScene,
    pose: CameraPose,
    march_steps: int = 160,
    bisect_iters: int = 30,
) -> GeometryPass:
    """Geometry pass: surface points, normals and materials per pixel."""
    origins, dirs = camera_rays(pose)
    h, w = dirs.shape[:2]
    flat_o = origins.reshape(-1, 3)
    flat_d = dirs.reshape(-1, 3)
    hit, t = _march_rays(scene, flat_o, flat_d, march_steps, bisect_iters)

    points = np.zeros((h * w, 3))
    normals = np.zeros((h * w, 3))
    albedo = np.zeros((h * w, 3))
    ks = np.zeros(h * w)
    power = np.ones(h * w)
    idx = np.flatnonzero(hit)
    if len(idx) > 0:
        pts = flat_o[idx] + t[idx, None] * flat_d[idx]
        _, prim = scene.field_and_arg(pts)
        points[idx] = pts
        normals[idx] = scene.normals(pts, prim)
        albedo[idx] = scene.albedo(pts, prim)
        ks[idx], power[idx] = scene.specular(prim)

    return GeometryPass(
        hit=hit.reshape(h, w),
        points=points.reshape(h, w, 3),
        normals=normals.reshape(h, w, 3),
        albedo=albedo.reshape(h, w, 3),
        spec_strength=ks.reshape(h, w),
        spec_power=power.reshape(h, w),
        view=-dirs,
    )


def shade_olat(geom: GeometryPass, light_dir: np.ndarray) -> np.ndarray:
    """Radiance under a single unit-intensity directional light.

    The specular lobe is gated on n.l > 0 so a light behind the surface
    contributes exactly zero.
    """
    l = np.asarray(light_dir, dtype=np.float64)
    l = l / np.linalg.norm(l)
    n = geom.normals
    ndotl = np.maximum(np.einsum("hwc,c->hw", n, l), 0.0)
    half = l + geom.view
    half = half / np.maximum(np.linalg.norm(half, axis=-1, keepdims=True), 1e-12)
    ndoth = np.maximum(np.einsum("hwc,hwc->hw", n, half), 0.0)
    spec = geom.spec_strength * ndoth**geom.spec_power * (ndotl > 0.0)
    out = geom.albedo * ndotl[..., None] + spec[..., None]
    out *= geom.hit[..., None]
    return out.astype(np.float32)


def shade_weighted(geom: GeometryPass, rig: LightRig, weights: np.ndarray) -> np.ndarray:
    """Sum of per-light radiance scaled by RGB weights, (N, 3).

    Accumulates in float32 in fixed light order so the result matches a
    weighted sum over stored one-light-at-a-time images bit for bit.
    """
    w = np.asarray(weights, dtype=np.float32)
    if w.shape != (rig.count, 3):
        raise ValueError(f"weights must be ({rig.count}, 3), got {w.shape}")
    acc = np.zeros((*geom.hit.shape, 3), dtype=np.float32)
    for i in range(rig.count):
        acc += shade_olat(geom, rig.directions[i]) * w[i]
    return acc


def render_olat(
    scene: SubjectScene, pose: CameraPose, light_dir: np.ndarray, geom: GeometryPass | None = None
) -> np.ndarray:
    if geom is None:
        geom = trace(scene, pose)
    return shade_olat(geom, light_dir)


def render_direct(
    scene: SubjectScene,
    pose: CameraPose,
    rig: LightRig,
    weights: np.ndarray,
    geom: GeometryPass | None = None,
) -> np.ndarray:
    """Render under an environment expressed as per-light RGB weights."""
    if geom is None:
        geom = trace(scene, pose)
    return shade_weighted(geom, rig, weights)


def project_keypoints(params: SubjectParams, pose: CameraPose) -> np.ndarray:
    """Pixel positions of the subject's canonical keypoints, (12, 2)."""
    uv, _ = project(pose, params.keypoints3d)
    return uv


def keypoint_visibility(
    scene: SubjectScene, pose: CameraPose, tol: float = 0.02
) -> np.ndarray:
    """Which keypoints are visible from the camera, (12,) bool.

    A keypoint is visible when the first surface hit along its viewing
    ray lands on the keypoint itself and the local surface faces the
    camera with some margin (grazing points confuse patch matching).
    """
    kp = scene.params.keypoints3d
    cam = pose.position
    offs = kp - cam
    dist = np.linalg.norm(offs, axis=-1)
    dirs = offs / dist[:, None]
    origins = np.broadcast_to(cam, dirs.shape).copy()
    hit, t = _march_rays(scene, origins, dirs, march_steps=320, bisect_iters=40)
    reaches = hit & (np.abs(t - dist) < tol)
    _, prim = scene.field_and_arg(kp)
    n = scene.normals(kp, prim)
    facing = np.einsum("kc,kc->k", n, -dirs) > 0.15
    return reaches & facing
