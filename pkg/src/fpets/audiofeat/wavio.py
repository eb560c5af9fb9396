"""16-bit PCM mono WAV I/O via the stdlib wave module."""

from __future__ import annotations

import wave
from dataclasses import dataclass, field

import numpy as np

from ..errors import AudioError

_SCALE = 32768.0

# process-wide count of samples clipped by save_wav (diagnostic)
_clip_warnings = 0


def clip_warning_count() -> int:
    return _clip_warnings


def reset_clip_warnings() -> None:
    global _clip_warnings
    _clip_warnings = 0


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int = 22050

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise AudioError(f"sample rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise AudioError("clip contains non-finite samples")

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def load_wav(path) -> AudioClip:
    """Read 16-bit mono PCM; samples come back in [-1, 1] (scaled by 1/32768)."""
    try:
        with wave.open(str(path), "rb") as wav:
            channels = wav.getnchannels()
            width = wav.getsampwidth()
            rate = wav.getframerate()
            n = wav.getnframes()
            raw = wav.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise AudioError(f"corrupt or unreadable WAV {path}: {exc}") from exc
    if channels != 1:
        raise AudioError(f"unsupported encoding: {channels} channels (mono only)")
    if width != 2:
        raise AudioError(f"unsupported encoding: {8 * width}-bit samples (16-bit only)")
    pcm = np.frombuffer(raw, dtype="<i2")
    return AudioClip(pcm.astype(np.float64) / _SCALE, sample_rate=rate)


def save_wav(clip: AudioClip, path) -> int:
    """Write 16-bit mono PCM. Out-of-range samples are clipped and counted;
    returns this call's clip count (also added to the process-wide counter)."""
    global _clip_warnings
    x = clip.samples
    clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
    _clip_warnings += clipped
    q = np.clip(np.rint(x * _SCALE), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(q.tobytes())
    return clipped
