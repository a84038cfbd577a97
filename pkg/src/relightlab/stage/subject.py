"""Procedural head subjects: implicit-surface primitives plus materials.

A subject is a superellipsoid head with four embedded feature
primitives (two eyes, nose, mouth), each an ellipsoid that bulges out
of the head surface. The scene surface is the union (pointwise min) of
the primitive inside-outside fields; normals are analytic gradients of
the winning primitive. Twelve canonical keypoints are constructed to
lie exactly on the scene surface.

All randomness comes from a single integer seed, so identical seeds
reproduce identical subjects bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KEYPOINT_NAMES = (
    "eye_front_l",
    "eye_front_r",
    "nose_tip",
    "nose_base",
    "mouth_center",
    "mouth_corner_l",
    "mouth_corner_r",
    "chin",
    "forehead",
    "cheek_l",
    "cheek_r",
    "crown",
)

_EPS = 1e-12


@dataclass
class SubjectParams:
    """Plain-data description of one subject; JSON round-trippable."""

    seed: int
    head_axes: np.ndarray  # (3,) semi-axes
    head_exps: np.ndarray  # (2,) lateral and axial exponents
    skin_albedo: np.ndarray  # (3,)
    tex_freq: np.ndarray  # (3,)
    tex_phase: np.ndarray  # (3,)
    tex_amp: float
    centers: np.ndarray  # (4, 3) eye_l, eye_r, nose, mouth
    scales: np.ndarray  # (4, 3)
    feature_albedo: np.ndarray  # (4, 3)
    spec_strength: np.ndarray  # (5,) head + features
    spec_power: np.ndarray  # (5,)
    keypoints3d: np.ndarray = field(default=None)  # (12, 3)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "head_axes": self.head_axes.tolist(),
            "head_exps": self.head_exps.tolist(),
            "skin_albedo": self.skin_albedo.tolist(),
            "tex_freq": self.tex_freq.tolist(),
            "tex_phase": self.tex_phase.tolist(),
            "tex_amp": self.tex_amp,
            "centers": self.centers.tolist(),
            "scales": self.scales.tolist(),
            "feature_albedo": self.feature_albedo.tolist(),
            "spec_strength": self.spec_strength.tolist(),
            "spec_power": self.spec_power.tolist(),
            "keypoints3d": self.keypoints3d.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "SubjectParams":
        return SubjectParams(
            seed=int(d["seed"]),
            head_axes=np.asarray(d["head_axes"], dtype=np.float64),
            head_exps=np.asarray(d["head_exps"], dtype=np.float64),
            skin_albedo=np.asarray(d["skin_albedo"], dtype=np.float64),
            tex_freq=np.asarray(d["tex_freq"], dtype=np.float64),
            tex_phase=np.asarray(d["tex_phase"], dtype=np.float64),
            tex_amp=float(d["tex_amp"]),
            centers=np.asarray(d["centers"], dtype=np.float64),
            scales=np.asarray(d["scales"], dtype=np.float64),
            feature_albedo=np.asarray(d["feature_albedo"], dtype=np.float64),
            spec_strength=np.asarray(d["spec_strength"], dtype=np.float64),
            spec_power=np.asarray(d["spec_power"], dtype=np.float64),
            keypoints3d=np.asarray(d["keypoints3d"], dtype=np.float64),
        )


class SubjectScene:
    """Evaluatable implicit scene for one subject.

    Primitive index 0 is the head; 1..4 are eye_l, eye_r, nose, mouth.
    The inside-outside field is negative inside, zero on the surface.
    """

    def __init__(self, params: SubjectParams):
        self.params = params
        self.bound_radius = float(np.max(params.head_axes)) + 0.35

    # -- fields ------------------------------------------------------

    def _head_field(self, pts: np.ndarray) -> np.ndarray:
        a = self.params.head_axes
        p, q = self.params.head_exps
        ax = np.abs(pts[..., 0] / a[0]) ** p + np.abs(pts[..., 1] / a[1]) ** p
        return np.maximum(ax, _EPS) ** (q / p) + np.abs(pts[..., 2] / a[2]) ** q - 1.0

    def _head_grad(self, pts: np.ndarray) -> np.ndarray:
        a = self.params.head_axes
        p, q = self.params.head_exps
        x, y, z = pts[..., 0] / a[0], pts[..., 1] / a[1], pts[..., 2] / a[2]
        ax = np.maximum(np.abs(x) ** p + np.abs(y) ** p, _EPS)
        common = q * ax ** (q / p - 1.0)
        gx = common * np.abs(x) ** (p - 1.0) * np.sign(x) / a[0]
        gy = common * np.abs(y) ** (p - 1.0) * np.sign(y) / a[1]
        gz = q * np.abs(z) ** (q - 1.0) * np.sign(z) / a[2]
        return np.stack([gx, gy, gz], axis=-1)

    def _feature_field(self, pts: np.ndarray, i: int) -> np.ndarray:
        c = self.params.centers[i]
        s = self.params.scales[i]
        q = (pts - c) / s
        return np.sum(q * q, axis=-1) - 1.0

    def _feature_grad(self, pts: np.ndarray, i: int) -> np.ndarray:
        c = self.params.centers[i]
        s = self.params.scales[i]
        return 2.0 * (pts - c) / (s * s)

    def field_all(self, pts: np.ndarray) -> np.ndarray:
        """Per-primitive fields, shape (5, ...)."""
        out = [self._head_field(pts)]
        for i in range(4):
            out.append(self._feature_field(pts, i))
        return np.stack(out)

    def field(self, pts: np.ndarray) -> np.ndarray:
        """Scene field: min over primitives (negative inside the union)."""
        return np.min(self.field_all(pts), axis=0)

    def field_and_arg(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fa = self.field_all(pts)
        idx = np.argmin(fa, axis=0)
        return np.min(fa, axis=0), idx

    def normals(self, pts: np.ndarray, prim_idx: np.ndarray) -> np.ndarray:
        """Unit outward normals using the winning primitive's gradient."""
        grads = np.stack(
            [self._head_grad(pts)] + [self._feature_grad(pts, i) for i in range(4)]
        )
        g = np.take_along_axis(grads, prim_idx[None, ..., None], axis=0)[0]
        n = np.linalg.norm(g, axis=-1, keepdims=True)
        return g / np.maximum(n, _EPS)

    def albedo(self, pts: np.ndarray, prim_idx: np.ndarray) -> np.ndarray:
        """Per-point RGB albedo; the head carries a smooth 3D texture."""
        p = self.params
        tex = 1.0 + p.tex_amp * (
            np.sin(p.tex_freq[0] * pts[..., 0] + p.tex_phase[0])
            * np.sin(p.tex_freq[1] * pts[..., 1] + p.tex_phase[1])
            * np.sin(p.tex_freq[2] * pts[..., 2] + p.tex_phase[2])
        )
        head = np.clip(p.skin_albedo * tex[..., None], 0.02, 0.98)
        out = head
        for i in range(4):
            mask = prim_idx == (i + 1)
            out = np.where(mask[..., None], p.feature_albedo[i], out)
        return out

    def specular(self, prim_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.params
        return p.spec_strength[prim_idx], p.spec_power[prim_idx]

    # -- surface construction ----------------------------------------

    def head_radial_point(self, direction: np.ndarray) -> np.ndarray:
        """Point where the ray from the origin along `direction` meets the head."""
        d = np.asarray(direction, dtype=np.float64)
        d = d / np.linalg.norm(d)
        lo, hi = 0.05, self.bound_radius + 0.5
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self._head_field(mid * d) < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi) * d

    def head_surface_z(self, x: float, y: float) -> float:
        """Front-face head depth at lateral position (x, y)."""
        a = self.params.head_axes
        p, q = self.params.head_exps
        ax = abs(x / a[0]) ** p + abs(y / a[1]) ** p
        rem = 1.0 - ax ** (q / p)
        if rem <= 0.0:
            raise ValueError("lateral position outside head silhouette")
        return float(a[2] * rem ** (1.0 / q))


def _feature_surface_point(
    scene: SubjectScene, prim: int, plane: str, sign: float
) -> np.ndarray:
    """A point on feature `prim`'s ellipsoid, rotated from its front pole
    until it clears the head and every other feature (stays on the union
    surface). `plane` picks the rotation plane ('x' or 'y')."""
    c = scene.params.centers[prim - 1]
    s = scene.params.scales[prim - 1]
    for ang_deg in range(70, -1, -2):
        ang = np.deg2rad(ang_deg)
        if plane == "x":
            u = np.array([sign * np.sin(ang), 0.0, np.cos(ang)])
        else:
            u = np.array([0.0, sign * np.sin(ang), np.cos(ang)])
        pt = c + s * u
        others = [scene._head_field(pt[None])[0]] + [
            scene._feature_field(pt[None], i)[0] for i in range(4) if i != prim - 1
        ]
        if min(others) > 1e-4:
            return pt
    return c + s * np.array([0.0, 0.0, 1.0])


def _build_keypoints(scene: SubjectScene) -> np.ndarray:
    p = scene.params
    eye_l = p.centers[0] + p.scales[0] * np.array([0.0, 0.0, 1.0])
    eye_r = p.centers[1] + p.scales[1] * np.array([0.0, 0.0, 1.0])
    nose_tip = p.centers[2] + p.scales[2] * np.array([0.0, 0.0, 1.0])
    nose_base = _feature_surface_point(scene, 3, "y", -1.0)
    mouth_center = p.centers[3] + p.scales[3] * np.array([0.0, 0.0, 1.0])
    mouth_l = _feature_surface_point(scene, 4, "x", +1.0)
    mouth_r = _feature_surface_point(scene, 4, "x", -1.0)
    chin = scene.head_radial_point([0.0, -0.92, 0.39])
    forehead = scene.head_radial_point([0.0, 0.62, 0.78])
    cheek_l = scene.head_radial_point([0.82, -0.12, 0.55])
    cheek_r = scene.head_radial_point([-0.82, -0.12, 0.55])
    crown = scene.head_radial_point([0.0, 0.97, 0.24])
    return np.stack(
        [
            eye_l,
            eye_r,
            nose_tip,
            nose_base,
            mouth_center,
            mouth_l,
            mouth_r,
            chin,
            forehead,
            cheek_l,
            cheek_r,
            crown,
        ]
    )


def generate_subject(seed: int) -> SubjectParams:
    """Sample a subject from the given seed; pure and deterministic."""
    rng = np.random.default_rng(seed)

    head_axes = np.array(
        [rng.uniform(0.78, 0.90), rng.uniform(0.95, 1.10), rng.uniform(0.80, 0.92)]
    )
    head_exps = np.array([rng.uniform(2.0, 3.0), rng.uniform(2.0, 2.8)])

    r = rng.uniform(0.55, 0.80)
    g = r * rng.uniform(0.72, 0.88)
    b = g * rng.uniform(0.70, 0.90)
    skin = np.array([r, g, b])

    tex_freq = rng.uniform(2.5, 6.0, size=3)
    tex_phase = rng.uniform(0.0, 2.0 * np.pi, size=3)
    tex_amp = float(rng.uniform(0.08, 0.20))

    params = SubjectParams(
        seed=seed,
        head_axes=head_axes,
        head_exps=head_exps,
        skin_albedo=skin,
        tex_freq=tex_freq,
        tex_phase=tex_phase,
        tex_amp=tex_amp,
        centers=np.zeros((4, 3)),
        scales=np.zeros((4, 3)),
        feature_albedo=np.zeros((4, 3)),
        spec_strength=np.zeros(5),
        spec_power=np.zeros(5),
    )
    scene = SubjectScene(params)

    eye_x = rng.uniform(0.33, 0.40) * head_axes[0]
    eye_y = rng.uniform(0.18, 0.28) * head_axes[1]
    eye_rad = rng.uniform(0.080, 0.110)
    for i, sx in enumerate((+1.0, -1.0)):
        z = scene.head_surface_z(sx * eye_x, eye_y)
        params.centers[i] = [sx * eye_x, eye_y, z - 0.35 * eye_rad]
        params.scales[i] = eye_rad
    eye_tone = rng.uniform(0.05, 0.15)
    params.feature_albedo[0] = [eye_tone, eye_tone, eye_tone * rng.uniform(1.0, 1.8)]
    params.feature_albedo[1] = params.feature_albedo[0]

    nose_s = np.array(
        [rng.uniform(0.09, 0.12), rng.uniform(0.14, 0.18), rng.uniform(0.16, 0.20)]
    )
    nose_y = rng.uniform(-0.08, 0.02) * head_axes[1]
    nose_z = scene.head_surface_z(0.0, nose_y) - 0.25 * nose_s[2]
    params.centers[2] = [0.0, nose_y, nose_z]
    params.scales[2] = nose_s
    params.feature_albedo[2] = np.clip(skin * [1.05, 0.92, 0.90], 0.0, 1.0)

    mouth_s = np.array(
        [rng.uniform(0.18, 0.24), rng.uniform(0.050, 0.075), rng.uniform(0.07, 0.09)]
    )
    mouth_y = rng.uniform(-0.40, -0.30) * head_axes[1]
    mouth_z = scene.head_surface_z(0.0, mouth_y) - 0.45 * mouth_s[2]
    params.centers[3] = [0.0, mouth_y, mouth_z]
    params.scales[3] = mouth_s
    params.feature_albedo[3] = [
        rng.uniform(0.45, 0.60),
        rng.uniform(0.12, 0.20),
        rng.uniform(0.12, 0.20),
    ]

    skin_ks, skin_m = rng.uniform(0.06, 0.10), rng.uniform(10.0, 16.0)
    params.spec_strength[:] = [
        skin_ks,
        rng.uniform(0.30, 0.40),
        rng.uniform(0.30, 0.40),
        skin_ks,
        rng.uniform(0.12, 0.18),
    ]
    params.spec_power[:] = [
        skin_m,
        rng.uniform(40.0, 60.0),
        rng.uniform(40.0, 60.0),
        skin_m,
        rng.uniform(20.0, 30.0),
    ]

    params.keypoints3d = _build_keypoints(scene)
    return params
