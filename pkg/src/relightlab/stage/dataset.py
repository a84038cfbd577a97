"""Dataset capture: write OLAT stacks, relit references and a manifest.

Layout under the output directory::

    envmaps/<name>.hdr            environment library + weight caches
    data/subjects/<sid>/olat/<cam>/<light>.exr
    data/subjects/<sid>/relit/<env>/<cam>.png
    data/meta.json                rig, cameras, keypoints, checksums

Everything is a pure function of the configuration, so a rebuild into a
fresh directory reproduces every file byte for byte. Re-running over a
partial directory requires ``resume=True`` (files already present are
kept; their checksums are still verified into the manifest).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import illum
from ..config import Config, config_hash, to_flat_dict
from ..imageio import load_exr, load_png, save_exr, save_png
from ..util import read_json, sha256_file, write_json
from .camera import CameraPose, arc_poses
from .lights import LightRig
from .render import keypoint_visibility, project_keypoints, shade_olat, trace
from .subject import SubjectParams, SubjectScene, generate_subject


def subject_ids(cfg: Config) -> list[str]:
    total = cfg.stage.subjects_train + cfg.stage.subjects_eval
    return [f"s{i:03d}" for i in range(total)]


def subject_seed(cfg: Config, index: int) -> int:
    return cfg.stage.seed * 100000 + index


def _cam_id(i: int) -> str:
    return f"c{i:02d}"


def _light_id(i: int) -> str:
    return f"l{i:02d}"


@dataclass
class DatasetMeta:
    """Parsed manifest with typed accessors."""

    root: Path
    raw: dict

    @property
    def cameras(self) -> list[CameraPose]:
        return [CameraPose.from_dict(d) for d in self.raw["cameras"]]

    @property
    def rig(self) -> LightRig:
        return LightRig.from_dict(self.raw["rig"])

    @property
    def sids(self) -> list[str]:
        return sorted(self.raw["subjects"].keys())

    @property
    def env_names(self) -> list[str]:
        return list(self.raw["envs"].keys())

    @property
    def splits(self) -> dict:
        return self.raw["splits"]

    def subject_params(self, sid: str) -> SubjectParams:
        return SubjectParams.from_dict(self.raw["subjects"][sid]["params"])

    def keypoints2d(self, sid: str, cam: int) -> np.ndarray:
        return np.asarray(self.raw["subjects"][sid]["keypoints2d"][_cam_id(cam)])

    def keypoints_visible(self, sid: str, cam: int) -> np.ndarray:
        return np.asarray(self.raw["subjects"][sid]["keypoint_visible"][_cam_id(cam)], dtype=bool)

    def env_weights(self, env: str) -> np.ndarray:
        return np.asarray(self.raw["envs"][env]["weights"], dtype=np.float64)

    def tonemap_scale(self, sid: str, env: str) -> float:
        return float(self.raw["tonemap_scales"][f"{sid}/{env}"])

    def olat_path(self, sid: str, cam: int, light: int) -> Path:
        return self.root / "data" / "subjects" / sid / "olat" / _cam_id(cam) / f"{_light_id(light)}.exr"

    def relit_path(self, sid: str, env: str, cam: int) -> Path:
        return self.root / "data" / "subjects" / sid / "relit" / env / f"{_cam_id(cam)}.png"

    def load_olat_stack(self, sid: str, cam: int) -> np.ndarray:
        n = self.rig.count
        return np.stack([load_exr(self.olat_path(sid, cam, i)) for i in range(n)])

    def load_relit(self, sid: str, env: str, cam: int) -> np.ndarray:
        return load_png(self.relit_path(sid, env, cam))


def load_meta(root: str | Path) -> DatasetMeta:
    root = Path(root)
    return DatasetMeta(root=root, raw=read_json(root / "data" / "meta.json"))


def build_dataset(cfg: Config, out_dir: str | Path, resume: bool = False, progress=None) -> Path:
    """Render the full capture into ``out_dir`` and write the manifest.

    Returns the manifest path. Refuses to touch a directory with
    existing subject data unless ``resume`` is set.
    """
    st = cfg.stage
    root = Path(out_dir)
    data_dir = root / "data"
    subjects_dir = data_dir / "subjects"
    if subjects_dir.exists() and any(subjects_dir.iterdir()) and not resume:
        raise FileExistsError(f"{subjects_dir} already has data; pass resume=True to continue")

    env_names = list(st.train_envs) + list(st.eval_envs)
    env_paths = illum.write_env_library(root / "envmaps", env_names, st.env_width, st.env_height)
    rig = LightRig.fibonacci(st.lights)
    env_weights = {name: illum.cached_weights(env_paths[name], rig) for name in env_names}

    poses = arc_poses(
        st.cameras,
        yaw_limit_deg=st.yaw_limit_deg,
        pitch_limit_deg=st.pitch_limit_deg,
        distance=st.cam_distance,
        fov_deg=st.cam_fov_deg,
        size=st.image_size,
    )

    sids = subject_ids(cfg)
    subjects_meta: dict[str, dict] = {}
    tonemap_scales: dict[str, float] = {}

    for index, sid in enumerate(sids):
        params = generate_subject(subject_seed(cfg, index))
        scene = SubjectScene(params)
        sdir = subjects_dir / sid

        expected = [
            sdir / "olat" / _cam_id(c) / f"{_light_id(l)}.exr"
            for c in range(st.cameras)
            for l in range(st.lights)
        ] + [
            sdir / "relit" / env / f"{_cam_id(c)}.png"
            for env in env_names
            for c in range(st.cameras)
        ]
        have_all = all(p.exists() for p in expected)

        kp2d = {}
        kpvis = {}
        for c, pose in enumerate(poses):
            kp2d[_cam_id(c)] = project_keypoints(params, pose).tolist()
            kpvis[_cam_id(c)] = keypoint_visibility(scene, pose).tolist()
        subjects_meta[sid] = {
            "seed": subject_seed(cfg, index),
            "params": params.to_dict(),
            "keypoints2d": kp2d,
            "keypoint_visible": kpvis,
        }

        linear: dict[str, list[np.ndarray]] = {name: [] for name in env_names}
        if not have_all:
            for c, pose in enumerate(poses):
                geom = trace(scene, pose, st.march_steps, st.bisect_iters)
                stack = np.stack([shade_olat(geom, rig.directions[i]) for i in range(st.lights)])
                for l in range(st.lights):
                    save_exr(sdir / "olat" / _cam_id(c) / f"{_light_id(l)}.exr", stack[l])
                for name in env_names:
                    linear[name].append(illum.relight_ibr(stack, env_weights[name]))
            for name in env_names:
                scale = illum.exposure_scale(linear[name], anchor=st.foreground_anchor)
                tonemap_scales[f"{sid}/{name}"] = scale
                for c in range(st.cameras):
                    ldr, _ = illum.tonemap(linear[name][c], scale=scale, gamma=st.gamma)
                    save_png(sdir / "relit" / name / f"{_cam_id(c)}.png", ldr)
        else:
            # files already on disk; recompute only the recorded scales
            for c, pose in enumerate(poses):
                stack = np.stack(
                    [load_exr(sdir / "olat" / _cam_id(c) / f"{_light_id(l)}.exr") for l in range(st.lights)]
                )
                for name in env_names:
                    linear[name].append(illum.relight_ibr(stack, env_weights[name]))
            for name in env_names:
                tonemap_scales[f"{sid}/{name}"] = illum.exposure_scale(
                    linear[name], anchor=st.foreground_anchor
                )
        if progress is not None:
            progress(f"subject {sid} ({index + 1}/{len(sids)})")

    files: dict[str, str] = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name != "meta.json":
            files[str(p.relative_to(root))] = sha256_file(p)

    n_train = st.subjects_train
    meta = {
        "config": to_flat_dict(cfg),
        "config_hash": config_hash(cfg),
        "image_size": st.image_size,
        "rig": rig.to_dict(),
        "cameras": [p.to_dict() for p in poses],
        "subjects": subjects_meta,
        "envs": {
            name: {"file": f"envmaps/{name}.hdr", "weights": env_weights[name].tolist()}
            for name in env_names
        },
        "splits": {
            "train_subjects": sids[:n_train],
            "eval_subjects": sids[n_train:],
            "train_envs": list(st.train_envs),
            "eval_envs": list(st.eval_envs),
        },
        "tonemap_scales": tonemap_scales,
        "files": files,
    }
    meta_path = data_dir / "meta.json"
    write_json(meta_path, meta)
    return meta_path


def verify_dataset(root: str | Path) -> tuple[bool, list[str]]:
    """Re-hash every manifest file; returns (ok, problem descriptions)."""
    meta = load_meta(root)
    problems = []
    for rel, sha in meta.raw["files"].items():
        p = meta.root / rel
        if not p.exists():
            problems.append(f"missing: {rel}")
        elif sha256_file(p) != sha:
            problems.append(f"checksum mismatch: {rel}")
    return len(problems) == 0, problems
