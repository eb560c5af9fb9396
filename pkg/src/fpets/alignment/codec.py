"""Position codec: the frequency bank behind the position encodings."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, DomainError
from ..numcore import Tensor

KERNEL_SINCOS = "sincos"
KERNEL_GAUSSIAN = "gaussian"
DEFAULT_F_MIN = 1.0
DEFAULT_F_MAX = 10000.0


class PositionCodec:
    """Frequency bank f_k plus the encoding-kernel choice.

    The sine-cosine kernel maps a scalar position to
    [sin(pos/f_0..f_{L-1}), cos(pos/f_0..f_{L-1})] (encoding dim 2L). The
    Gaussian kernel bypasses encodings entirely and scores frame/phoneme
    pairs directly; it exists to reproduce the failed-alignment ablation.
    """

    def __init__(self, frequencies, kernel: str = KERNEL_SINCOS,
                 gaussian_width: float = 10.0, trainable: bool = False):
        if kernel not in (KERNEL_SINCOS, KERNEL_GAUSSIAN):
            raise ConfigError(f"unknown position kernel {kernel!r}")
        freqs = np.asarray(
            frequencies.data if isinstance(frequencies, Tensor) else frequencies,
            dtype=np.float64,
        )
        if freqs.ndim != 1 or freqs.size < 1:
            raise ConfigError(f"frequency bank must be a non-empty vector, got shape {freqs.shape}")
        if np.any(freqs <= 0.0):
            raise DomainError("all codec frequencies must be positive")
        if gaussian_width <= 0.0:
            raise DomainError(f"gaussian width must be positive, got {gaussian_width}")
        self.frequencies = Tensor(freqs, requires_grad=trainable, name="codec.freqs")
        self.kernel = kernel
        self.gaussian_width = float(gaussian_width)
        self.trainable = bool(trainable)

    @property
    def length(self) -> int:
        return self.frequencies.shape[0]

    @classmethod
    def geometric(cls, length: int = 64, f_min: float = DEFAULT_F_MIN,
                  f_max: float = DEFAULT_F_MAX, kernel: str = KERNEL_SINCOS,
                  gaussian_width: float = 10.0, trainable: bool = False) -> "PositionCodec":
        """Deterministic geometric spacing over [f_min, f_max] (the default)."""
        if length < 1:
            raise ConfigError(f"codec length must be >= 1, got {length}")
        if length == 1:
            freqs = np.array([f_min])
        else:
            freqs = np.geomspace(f_min, f_max, length)
        return cls(freqs, kernel=kernel, gaussian_width=gaussian_width, trainable=trainable)

    @classmethod
    def log_uniform(cls, length: int = 64, f_min: float = DEFAULT_F_MIN,
                    f_max: float = DEFAULT_F_MAX, seed: int = 0,
                    kernel: str = KERNEL_SINCOS, gaussian_width: float = 10.0,
                    trainable: bool = False) -> "PositionCodec":
        """Seeded random log-uniform draw over [f_min, f_max], sorted ascending."""
        if length < 1:
            raise ConfigError(f"codec length must be >= 1, got {length}")
        rng = np.random.default_rng(seed)
        freqs = np.sort(np.exp(rng.uniform(np.log(f_min), np.log(f_max), size=length)))
        return cls(freqs, kernel=kernel, gaussian_width=gaussian_width, trainable=trainable)
