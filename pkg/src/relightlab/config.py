"""Configuration: typed defaults, a flat ``key = value`` file format,
schema validation and a content hash used to key derived artifacts.

The file format is one dotted key per line (``relight.steps = 2000``),
``#`` comments, blank lines allowed. Values are parsed by the declared
field type; unknown keys or malformed values are rejected, never
silently ignored.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .util import sha256_bytes, stable_json


class ConfigError(ValueError):
    """Raised for unknown keys, bad values or inconsistent settings."""


@dataclass
class StageConfig:
    seed: int = 7
    subjects_train: int = 20
    subjects_eval: int = 4
    cameras: int = 8
    cam_distance: float = 3.2
    cam_fov_deg: float = 45.0
    yaw_limit_deg: float = 45.0
    pitch_limit_deg: float = 15.0
    lights: int = 24
    image_size: int = 64
    march_steps: int = 160
    bisect_iters: int = 30
    env_width: int = 64
    env_height: int = 32
    train_envs: tuple[str, ...] = (
        "even_white",
        "even_warm",
        "sky_dusk",
        "sun_top",
        "sun_left",
        "sun_front",
        "soft_blobs",
        "cool_band",
    )
    eval_envs: tuple[str, ...] = (
        "sun_right",
        "sunset_glow",
        "split_tone",
        "back_rim",
    )
    foreground_anchor: float = 0.25
    gamma: float = 2.2


@dataclass
class GeneratorConfig:
    latent_layers: int = 8
    latent_dim: int = 64
    channels: tuple[int, ...] = (64, 64, 64, 48, 32, 32, 32, 32)
    resolutions: tuple[int, ...] = (8, 16, 16, 32, 32, 32, 32, 32)
    feature_layer: int = 2
    plane_size: int = 32
    plane_channels: int = 16
    decoder_hidden: int = 32
    feat_channels: int = 8
    render_size: int = 32
    samples_per_ray: int = 32
    box_radius: float = 1.3
    slab_half_depth: float = 1.6
    seed: int = 11
    holdout_camera: int = 5
    pretrain_steps: int = 3000
    pretrain_batch: int = 8
    pretrain_lr: float = 0.003
    latent_lr: float = 0.03
    perceptual_weight: float = 0.05
    latent_reg: float = 1e-4


@dataclass
class InversionConfig:
    enc_channels: tuple[int, ...] = (32, 64, 96, 128)
    afa_hidden: int = 64
    seed: int = 13
    encoder_steps: int = 1600
    afa_steps: int = 900
    batch: int = 8
    lr: float = 0.001
    latent_weight: float = 1.0
    image_weight: float = 1.0


@dataclass
class RelightConfig:
    mlp_layers: int = 14
    hidden: int = 256
    seed: int = 17
    steps: int = 2200
    batch: int = 8
    lr: float = 0.0003
    weight_latent: float = 10.0
    weight_recon: float = 0.01
    weight_perceptual: float = 1.0
    viewpoints: int = 2


@dataclass
class EvalConfig:
    eval_cameras: tuple[int, ...] = (0, 2, 3, 4, 5, 7)
    template_radius: int = 4
    patch_radius: int = 3
    ablation_steps: int = 700
    ablation_viewpoints: tuple[int, ...] = (1, 2, 4, 8)
    ablation_subjects: tuple[int, ...] = (5, 10, 20)


@dataclass
class ServiceConfig:
    ttl_seconds: float = 600.0
    max_sessions: int = 64


@dataclass
class Config:
    stage: StageConfig = field(default_factory=StageConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    inversion: InversionConfig = field(default_factory=InversionConfig)
    relight: RelightConfig = field(default_factory=RelightConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def validate(self) -> None:
        st = self.stage
        if st.env_width != 2 * st.env_height:
            raise ConfigError("stage.env_width must equal 2 * stage.env_height")
        if st.subjects_train < 1 or st.subjects_eval < 1:
            raise ConfigError("need at least one train and one eval subject")
        names = st.train_envs + st.eval_envs
        if len(set(names)) != len(names):
            raise ConfigError("train/eval env lists overlap")
        g = self.generator
        if len(g.channels) != g.latent_layers or len(g.resolutions) != g.latent_layers:
            raise ConfigError("generator.channels/resolutions must have latent_layers entries")
        if not 0 <= g.feature_layer < g.latent_layers:
            raise ConfigError("generator.feature_layer out of range")
        if not 0 <= g.holdout_camera < st.cameras:
            raise ConfigError("generator.holdout_camera out of range")
        if any(c < 0 or c >= st.cameras for c in self.evaluation.eval_cameras):
            raise ConfigError("evaluation.eval_cameras out of range")
        if self.relight.viewpoints < 1 or self.relight.viewpoints > st.cameras:
            raise ConfigError("relight.viewpoints out of range")


_SECTIONS = {f.name: f.type for f in dataclasses.fields(Config)}


def _parse_value(raw: str, ftype: Any, key: str) -> Any:
    raw = raw.strip()
    try:
        if ftype is int:
            return int(raw)
        if ftype is float:
            return float(raw)
        if ftype is bool:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if ftype is str:
            return raw
        origin = getattr(ftype, "__origin__", None)
        if origin is tuple:
            item = ftype.__args__[0]
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            return tuple(_parse_value(p, item, key) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    raise ConfigError(f"unsupported type for {key}")


def _resolve_type(ftype: Any) -> Any:
    # dataclass fields declared under `from __future__ import annotations`
    # surface as strings; map them back to concrete types
    if isinstance(ftype, str):
        return eval(ftype, {"tuple": tuple, "int": int, "float": float, "bool": bool, "str": str})
    return ftype


def set_key(cfg: Config, key: str, raw: str) -> None:
    """Apply one ``section.field = value`` assignment in place."""
    if "." not in key:
        raise ConfigError(f"unknown key: {key} (expected section.field)")
    section, _, name = key.partition(".")
    if section not in _SECTIONS:
        raise ConfigError(f"unknown section: {section}")
    sub = getattr(cfg, section)
    fields = {f.name: f for f in dataclasses.fields(sub)}
    if name not in fields:
        raise ConfigError(f"unknown key: {key}")
    ftype = _resolve_type(fields[name].type)
    setattr(sub, name, _parse_value(raw, ftype, key))


def load_config(path: str | Path | None = None, overrides: list[str] | None = None) -> Config:
    """Build a config from defaults, an optional file and CLI overrides."""
    cfg = Config()
    lines: list[tuple[str, str]] = []
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            k, _, v = line.partition("=")
            lines.append((k.strip(), v))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"bad override (expected key=value): {item}")
        k, _, v = item.partition("=")
        lines.append((k.strip(), v))
    for k, v in lines:
        set_key(cfg, k, v)
    cfg.validate()
    return cfg


def to_flat_dict(cfg: Config) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for section in _SECTIONS:
        sub = getattr(cfg, section)
        for f in dataclasses.fields(sub):
            v = getattr(sub, f.name)
            out[f"{section}.{f.name}"] = list(v) if isinstance(v, tuple) else v
    return out


def config_hash(cfg: Config) -> str:
    """Short content hash identifying the effective configuration."""
    return sha256_bytes(stable_json(to_flat_dict(cfg)).encode())[:12]
