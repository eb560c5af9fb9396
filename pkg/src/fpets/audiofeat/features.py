"""STFT, log spectrograms, mel filterbank, and feature normalization.

Framing convention: T_a = ceil(len/hop) frames, each centered at sample
j*hop after reflection padding of fft_size/2 on both ends. Log features are
log(max(value, 1e-5)); corpus-level min-max statistics map them into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AudioError, ConfigError, ShapeError
from .wavio import AudioClip

LOG_FLOOR = 1e-5
KIND_LINEAR = "linear"
KIND_MEL = "mel"


@dataclass
class AcousticFeatures:
    frames: np.ndarray  # (T_a, D)
    kind: str
    fft_size: int = 2048
    hop: int = 275
    n_mel: int = 80
    sample_rate: int = 22050

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise ShapeError(f"features must be (T_a, D) with T_a >= 1, got {self.frames.shape}")
        if self.kind not in (KIND_LINEAR, KIND_MEL):
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        expected = self.n_mel if self.kind == KIND_MEL else self.fft_size // 2 + 1
        if self.frames.shape[1] != expected:
            raise ShapeError(
                f"{self.kind} features expect D={expected}, got {self.frames.shape[1]}"
            )
        if not np.all(np.isfinite(self.frames)):
            raise AudioError("features contain non-finite values")


@dataclass
class FeatureStats:
    """Corpus-wide min/max of the log features, the normalization anchors."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.hi <= self.lo:
            raise ConfigError(f"degenerate feature stats [{self.lo}, {self.hi}]")

    @classmethod
    def from_frames(cls, frames_list) -> "FeatureStats":
        lo = min(float(f.min()) for f in frames_list)
        hi = max(float(f.max()) for f in frames_list)
        return cls(lo, hi)


def frame_count(n_samples: int, hop: int) -> int:
    return int(np.ceil(n_samples / hop))


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _check_stft_params(fft_size: int, hop: int) -> None:
    if fft_size < 2 or (fft_size & (fft_size - 1)) != 0:
        raise ConfigError(f"fft_size must be a power of two >= 2, got {fft_size}")
    if hop < 1:
        raise ConfigError(f"hop must be >= 1, got {hop}")


def stft(clip: AudioClip, fft_size: int = 2048, hop: int = 275) -> np.ndarray:
    """Complex spectrogram, shape (ceil(len/hop), fft_size/2 + 1)."""
    _check_stft_params(fft_size, hop)
    x = clip.samples
    if x.size < 2:
        raise AudioError(f"clip too short for STFT: {x.size} samples")
    t_a = frame_count(x.size, hop)
    pad = fft_size // 2
    padded = np.pad(x, pad, mode="reflect")
    need = (t_a - 1) * hop + fft_size
    if padded.size < need:
        padded = np.pad(padded, (0, need - padded.size))
    window = hann_window(fft_size)
    frames = np.stack([padded[t * hop : t * hop + fft_size] for t in range(t_a)])
    return np.fft.rfft(frames * window, axis=1)


def istft(spec: np.ndarray, fft_size: int, hop: int, length: int) -> np.ndarray:
    """Weighted overlap-add inverse; least-squares optimal for the Hann pair."""
    _check_stft_params(fft_size, hop)
    t_a = spec.shape[0]
    pad = fft_size // 2
    window = hann_window(fft_size)
    total = (t_a - 1) * hop + fft_size
    acc = np.zeros(total)
    norm = np.zeros(total)
    chunks = np.fft.irfft(spec, n=fft_size, axis=1)
    for t in range(t_a):
        sl = slice(t * hop, t * hop + fft_size)
        acc[sl] += chunks[t] * window
        norm[sl] += window * window
    acc /= np.maximum(norm, 1e-8)
    return acc[pad : pad + length]


def log_magnitude(values: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(values, LOG_FLOOR))


def normalize(frames: np.ndarray, stats: FeatureStats) -> np.ndarray:
    return (frames - stats.lo) / (stats.hi - stats.lo)


def denormalize(frames: np.ndarray, stats: FeatureStats) -> np.ndarray:
    return frames * (stats.hi - stats.lo) + stats.lo


def linear_log_spectrogram(clip: AudioClip, fft_size: int = 2048, hop: int = 275,
                           stats: FeatureStats | None = None) -> AcousticFeatures:
    """Log-magnitude spectrogram (D = fft_size/2 + 1), normalized when stats given."""
    frames = log_magnitude(np.abs(stft(clip, fft_size, hop)))
    if stats is not None:
        frames = normalize(frames, stats)
    return AcousticFeatures(frames, KIND_LINEAR, fft_size=fft_size, hop=hop,
                            sample_rate=clip.sample_rate)


def _hz_to_mel(f):
    """Slaney scale: linear below 1 kHz, logarithmic above."""
    f = np.asarray(f, dtype=np.float64)
    f_sp = 200.0 / 3.0
    min_log_hz = 1000.0
    min_log_mel = min_log_hz / f_sp
    logstep = np.log(6.4) / 27.0
    mel = f / f_sp
    above = f >= min_log_hz
    mel = np.where(above, min_log_mel + np.log(np.maximum(f, min_log_hz) / min_log_hz) / logstep, mel)
    return mel


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    f_sp = 200.0 / 3.0
    min_log_hz = 1000.0
    min_log_mel = min_log_hz / f_sp
    logstep = np.log(6.4) / 27.0
    hz = mel * f_sp
    above = mel >= min_log_mel
    hz = np.where(above, min_log_hz * np.exp(logstep * (mel - min_log_mel)), hz)
    return hz


def mel_filterbank(n_mel: int = 80, fft_size: int = 2048,
                   sample_rate: int = 22050) -> np.ndarray:
    """Triangular filters (n_mel, fft_size/2+1) on the Slaney mel scale,
    area-normalized, spanning 0 Hz to Nyquist."""
    n_bins = fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * sample_rate / fft_size
    mel_pts = np.linspace(_hz_to_mel(0.0), _hz_to_mel(sample_rate / 2.0), n_mel + 2)
    hz_pts = _mel_to_hz(mel_pts)
    fb = np.zeros((n_mel, n_bins))
    for i in range(n_mel):
        left, center, right = hz_pts[i], hz_pts[i + 1], hz_pts[i + 2]
        up = (bin_hz - left) / max(center - left, 1e-12)
        down = (right - bin_hz) / max(right - center, 1e-12)
        fb[i] = np.maximum(0.0, np.minimum(up, down)) * (2.0 / (right - left))
    empty = np.nonzero(fb.sum(axis=1) <= 0.0)[0]
    if empty.size:
        raise ConfigError(
            f"mel filter {int(empty[0])} is empty; n_mel={n_mel} too large for "
            f"fft_size={fft_size} at {sample_rate} Hz"
        )
    return fb


def mel_spectrogram(clip: AudioClip, n_mel: int = 80, fft_size: int = 2048,
                    hop: int = 275, stats: FeatureStats | None = None) -> AcousticFeatures:
    """Log mel-power spectrogram (D = n_mel), normalized when stats given."""
    power = np.abs(stft(clip, fft_size, hop)) ** 2
    fb = mel_filterbank(n_mel, fft_size, clip.sample_rate)
    frames = log_magnitude(power @ fb.T)
    if stats is not None:
        frames = normalize(frames, stats)
    return AcousticFeatures(frames, KIND_MEL, fft_size=fft_size, hop=hop,
                            n_mel=n_mel, sample_rate=clip.sample_rate)


def mel_power_to_linear_magnitude(mel_power: np.ndarray, fb: np.ndarray) -> np.ndarray:
    """Invert the filterbank by pseudo-inverse, clamped at 0, then sqrt."""
    linear_power = np.clip(mel_power @ np.linalg.pinv(fb).T, 0.0, None)
    return np.sqrt(linear_power)
