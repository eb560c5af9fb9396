"""Model hyper-parameter container with text serialization and hashing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace

from ..errors import ConfigError

KERNEL_CHOICES = ("sincos", "gaussian")
FEATURE_KINDS = ("linear", "mel")


@dataclass
class ModelConfig:
    """Every knob the networks and the feature pipeline read.

    Defaults are desk scale: small enough to train on a laptop CPU in
    minutes.  ``full_scale()`` restores the full-size values.
    """

    vocab_size: int = 16
    embedding_dim: int = 64
    hidden: int = 64

    encoder_layers: int = 3
    encoder_kernel: int = 3
    encoder_filter: int = 128

    align_ufans_depth: int = 4
    align_kernel: int = 3
    align_filter: int = 128

    dec_cnn_layers: int = 3
    dec_cnn_kernel: int = 3
    dec_cnn_filter: int = 128

    dec_ufans_depth: int = 6
    dec_ufans_kernel: int = 3
    dec_ufans_filter: int = 128

    dropout: float = 0.15
    align_loss_weight: float = 0.02
    align_loss_gamma: float = 3.0

    codec_length: int = 16
    codec_f_min: float = 1.0
    codec_f_max: float = 100.0
    codec_kernel: str = "sincos"
    codec_trainable: bool = True
    gaussian_width: float = 10.0

    width_floor: float = 0.1
    width_prior_frames: float = 7.0

    feature_dim: int = 33
    feature_kind: str = "linear"
    n_mel: int = 80
    fft_size: int = 64
    hop: int = 16
    sample_rate: int = 8000

    batch_size: int = 8
    steps: int = 2000
    learning_rate: float = 1e-3

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                continue
            if f.name in ("dropout",):
                continue
            if v <= 0:
                raise ConfigError(f"config field {f.name} must be positive, got {v}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.codec_kernel not in KERNEL_CHOICES:
            raise ConfigError(
                f"codec_kernel must be one of {KERNEL_CHOICES}, got {self.codec_kernel!r}"
            )
        if self.feature_kind not in FEATURE_KINDS:
            raise ConfigError(
                f"feature_kind must be one of {FEATURE_KINDS}, got {self.feature_kind!r}"
            )
        if self.codec_f_max <= self.codec_f_min:
            raise ConfigError(
                f"codec_f_max {self.codec_f_max} must exceed codec_f_min {self.codec_f_min}"
            )

    @staticmethod
    def full_scale(vocab_size: int = 80) -> "ModelConfig":
        """Full-size configuration."""
        return ModelConfig(
            vocab_size=vocab_size,
            embedding_dim=512,
            hidden=512,
            encoder_filter=1024,
            align_filter=1024,
            dec_cnn_filter=1024,
            dec_ufans_filter=1024,
            codec_length=64,
            codec_f_max=10000.0,
            width_prior_frames=8.0,
            feature_dim=80,
            feature_kind="mel",
            fft_size=2048,
            hop=275,
            sample_rate=22050,
            batch_size=32,
            steps=300000,
        )

    def with_overrides(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "ModelConfig":
        known = {f.name: f.type for f in fields(ModelConfig)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno} is not key=value: {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ConfigError(f"config line {lineno}: unknown field {key!r}")
            kwargs[key] = _parse_value(key, value, known[key], lineno)
        return ModelConfig(**kwargs)

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def _parse_value(key: str, value: str, typ, lineno: int):
    if typ in ("bool", bool):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"config line {lineno}: field {key} expects a boolean, got {value!r}")
    if typ in ("int", int):
        try:
            return int(value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: field {key} expects an int") from exc
    if typ in ("float", float):
        try:
            return float(value)
        except ValueError as exc:
            raise ConfigError(f"config line {lineno}: field {key} expects a number") from exc
    return value
