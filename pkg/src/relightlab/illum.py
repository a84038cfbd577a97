"""Environment-map illumination: a procedural HDR library, projection
onto the light rig, image-based relighting and display tonemapping.

Environment maps are equirectangular (width = 2 * height), RGB, linear
radiance. The world frame matches the stage: +Y up, +Z toward the
frontal camera, and +Z sits at the horizontal center of the map.

Projecting an environment onto an N-light rig assigns each light the
bilinearly sampled radiance at its direction times its solid angle, so
a constant map of value c yields weights summing to 4*pi*c exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imageio import load_image, save_image
from .stage.lights import LightRig
from .util import read_json, sha256_file, write_json

LUMA = np.array([0.2126, 0.7152, 0.0722])


def luminance(img: np.ndarray) -> np.ndarray:
    return img[..., 0] * LUMA[0] + img[..., 1] * LUMA[1] + img[..., 2] * LUMA[2]


# -- lat-long geometry ---------------------------------------------------


def latlong_directions(width: int, height: int) -> np.ndarray:
    """Unit direction at each pixel center, (H, W, 3)."""
    u = (np.arange(width) + 0.5) / width
    v = (np.arange(height) + 0.5) / height
    phi = 2.0 * np.pi * u - np.pi
    theta = np.pi / 2.0 - np.pi * v
    ct = np.cos(theta)[:, None]
    st = np.sin(theta)[:, None]
    return np.stack(
        [
            ct * np.sin(phi)[None, :],
            np.broadcast_to(st, (height, width)),
            ct * np.cos(phi)[None, :],
        ],
        axis=-1,
    )


def sample_bilinear(env: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Bilinear lat-long lookup for unit directions of any batch shape.

    Longitude wraps; latitude clamps at the poles.
    """
    h, w = env.shape[:2]
    d = np.asarray(dirs, dtype=np.float64)
    theta = np.arcsin(np.clip(d[..., 1], -1.0, 1.0))
    phi = np.arctan2(d[..., 0], d[..., 2])
    uf = (phi + np.pi) / (2.0 * np.pi) * w - 0.5
    vf = (np.pi / 2.0 - theta) / np.pi * h - 0.5
    u0 = np.floor(uf).astype(int)
    v0 = np.floor(vf).astype(int)
    fu = (uf - u0)[..., None]
    fv = (vf - v0)[..., None]
    u1 = (u0 + 1) % w
    u0 = u0 % w
    v1 = np.clip(v0 + 1, 0, h - 1)
    v0 = np.clip(v0, 0, h - 1)
    a = env[v0, u0] * (1 - fu) + env[v0, u1] * fu
    b = env[v1, u0] * (1 - fu) + env[v1, u1] * fu
    return a * (1 - fv) + b * fv


def downsample_to_weights(env: np.ndarray, rig: LightRig) -> np.ndarray:
    """Per-light RGB weights: sampled radiance times solid angle, (N, 3)."""
    radiance = sample_bilinear(env, rig.directions)
    return np.asarray(radiance, dtype=np.float64) * rig.solid_angles[:, None]


def normalize_weights(weights: np.ndarray) -> tuple[np.ndarray, float]:
    """Flatten rig weights and divide by their mean luminance.

    Returns the (3N,) float32 vector and the normalization constant, so
    callers can record how conditioning inputs were produced.
    """
    w = np.asarray(weights, dtype=np.float64)
    const = float(np.mean(luminance(w)))
    const = max(const, 1e-9)
    return (w / const).reshape(-1).astype(np.float32), const


# -- procedural environment library ---------------------------------------


def _blob(dirs: np.ndarray, center: np.ndarray, sigma: float, color) -> np.ndarray:
    c = np.asarray(center, dtype=np.float64)
    c = c / np.linalg.norm(c)
    ang = np.einsum("hwc,c->hw", dirs, c) - 1.0
    return np.exp(ang / (sigma * sigma))[..., None] * np.asarray(color)


def _ramp(dirs: np.ndarray, lo_color, hi_color) -> np.ndarray:
    t = (dirs[..., 1] + 1.0) / 2.0
    t = t * t * (3.0 - 2.0 * t)
    return t[..., None] * np.asarray(hi_color) + (1.0 - t[..., None]) * np.asarray(lo_color)


def _build_env(name: str, width: int, height: int) -> np.ndarray:
    d = latlong_directions(width, height)
    if name == "even_white":
        img = np.full((height, width, 3), 0.8)
    elif name == "even_warm":
        img = np.broadcast_to(np.array([0.80, 0.56, 0.38]), (height, width, 3)).copy()
    elif name == "sky_dusk":
        img = _ramp(d, [0.25, 0.17, 0.12], [0.38, 0.48, 0.95])
    elif name == "sun_top":
        img = 0.12 + _blob(d, [0.0, 1.0, 0.15], 0.30, [16.0, 15.0, 13.5])
    elif name == "sun_left":
        img = 0.10 + _blob(d, [-1.0, 0.25, 0.30], 0.28, [15.0, 13.0, 10.0])
    elif name == "sun_right":
        img = 0.10 + _blob(d, [1.0, 0.25, 0.30], 0.28, [15.0, 13.0, 10.0])
    elif name == "sun_front":
        img = 0.10 + _blob(d, [0.0, 0.30, 1.0], 0.33, [13.0, 12.5, 11.5])
    elif name == "back_rim":
        img = 0.07 + _blob(d, [0.0, 0.40, -1.0], 0.40, [11.0, 11.5, 13.0])
    elif name == "soft_blobs":
        img = (
            0.06
            + _blob(d, [0.6, 0.5, 0.6], 0.55, [2.2, 1.9, 1.4])
            + _blob(d, [-0.7, -0.1, 0.7], 0.50, [1.1, 1.5, 2.3])
            + _blob(d, [0.1, -0.8, 0.5], 0.45, [1.3, 0.9, 0.8])
        )
    elif name == "cool_band":
        band = np.exp(-((d[..., 1] / 0.35) ** 2))
        img = 0.05 + band[..., None] * np.array([0.9, 1.3, 1.9])
    elif name == "sunset_glow":
        img = _ramp(d, [0.30, 0.12, 0.06], [0.20, 0.24, 0.45]) + _blob(
            d, [-0.5, 0.05, 0.85], 0.30, [14.0, 7.5, 3.0]
        )
    elif name == "split_tone":
        t = 1.0 / (1.0 + np.exp(-d[..., 0] / 0.18))
        img = 0.05 + t[..., None] * np.array([1.5, 0.45, 0.30]) + (1.0 - t[..., None]) * np.array(
            [0.30, 0.55, 1.6]
        )
    else:
        raise KeyError(f"unknown environment: {name}")
    return np.ascontiguousarray(img, dtype=np.float32)


ENV_NAMES = (
    "even_white",
    "even_warm",
    "sky_dusk",
    "sun_top",
    "sun_left",
    "sun_front",
    "soft_blobs",
    "cool_band",
    "sun_right",
    "sunset_glow",
    "split_tone",
    "back_rim",
)


def build_env(name: str, width: int = 64, height: int = 32) -> np.ndarray:
    """Procedural HDR environment by name; deterministic."""
    return _build_env(name, width, height)


def load_envmap(path: str | Path) -> np.ndarray:
    """Load an equirectangular environment; rejects wrong aspect ratio."""
    img = load_image(path)
    h, w = img.shape[:2]
    if w != 2 * h:
        raise ValueError(f"{path}: equirectangular maps need width == 2 * height, got {w}x{h}")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{path}: non-finite radiance values")
    return img


def write_env_library(
    out_dir: str | Path, names=ENV_NAMES, width: int = 64, height: int = 32
) -> dict[str, Path]:
    out = Path(out_dir)
    paths = {}
    for name in names:
        p = out / f"{name}.hdr"
        save_image(p, build_env(name, width, height))
        paths[name] = p
    return paths


def cached_weights(env_path: str | Path, rig: LightRig) -> np.ndarray:
    """Rig weights for an environment file, cached next to it.

    The cache is keyed by the environment file's content hash and the
    rig size; a stale cache is recomputed and rewritten.
    """
    env_path = Path(env_path)
    cache = env_path.with_suffix(f".w{rig.count}.json")
    sha = sha256_file(env_path)
    if cache.exists():
        d = read_json(cache)
        if d.get("env_sha256") == sha and d.get("lights") == rig.count:
            return np.asarray(d["weights"], dtype=np.float64)
    weights = downsample_to_weights(load_envmap(env_path), rig)
    write_json(cache, {"env_sha256": sha, "lights": rig.count, "weights": weights.tolist()})
    return weights


# -- relighting and tonemapping -------------------------------------------


def relight_ibr(olat_stack: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted sum over a one-light-at-a-time stack, (N, H, W, 3).

    Accumulates in float32 in fixed light order, matching the direct
    renderer's accumulation exactly.
    """
    stack = np.asarray(olat_stack, dtype=np.float32)
    w = np.asarray(weights, dtype=np.float32)
    if stack.shape[0] != w.shape[0]:
        raise ValueError(f"stack has {stack.shape[0]} lights, weights {w.shape[0]}")
    acc = np.zeros(stack.shape[1:], dtype=np.float32)
    for i in range(len(w)):
        acc += stack[i] * w[i]
    return acc


def tonemap(
    img: np.ndarray,
    scale: float | None = None,
    anchor: float = 0.25,
    gamma: float = 2.2,
) -> tuple[np.ndarray, float]:
    """Exposure-scale, clamp to [0, 1] and gamma-encode.

    With ``scale=None`` the exposure is chosen so the mean luminance of
    foreground pixels (nonzero radiance) lands on ``anchor``; passing a
    recorded scale reproduces the same output bit for bit.
    """
    lin = np.asarray(img, dtype=np.float32)
    if scale is None:
        scale = exposure_scale([lin], anchor=anchor)
    out = np.clip(lin * np.float32(scale), 0.0, 1.0) ** np.float32(1.0 / gamma)
    return out.astype(np.float32), float(scale)


def exposure_scale(images: list[np.ndarray], anchor: float = 0.25) -> float:
    """Shared exposure for a group of views of the same scene.

    Using one scale per group keeps multi-view renders photometrically
    consistent; per-view exposure would break cross-view comparisons.
    """
    total = 0.0
    count = 0
    for img in images:
        lum = luminance(np.asarray(img, dtype=np.float64))
        fg = lum > 1e-6
        total += float(lum[fg].sum())
        count += int(fg.sum())
    if count == 0:
        return 1.0
    return anchor / (total / count)
