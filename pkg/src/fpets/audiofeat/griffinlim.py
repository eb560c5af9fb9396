"""Phase reconstruction from magnitude spectrograms by alternating projection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from .features import hann_window
from .wavio import AudioClip


@dataclass
class GriffinLimResult:
    """Reconstructed waveform plus the per-iteration convergence trace."""

    clip: AudioClip
    convergence: list[float] = field(default_factory=list)

    @property
    def final_convergence(self) -> float:
        return self.convergence[-1]


def griffin_lim(
    magnitude: np.ndarray,
    fft_size: int,
    hop: int,
    sample_rate: int,
    iterations: int = 60,
    seed: int = 0,
) -> GriffinLimResult:
    """Recover a waveform whose magnitude spectrogram approximates ``magnitude``.

    Alternates between the set of consistent spectrograms (those realizable by
    some waveform) and the set of spectrograms with the target magnitude.  The
    iteration runs on the padded sample domain where windowed overlap-add with
    window-square normalization is the exact least-squares inverse of the
    framing operator, so each consistency projection is orthogonal and the
    convergence trace is non-increasing by construction.

    Convergence is measured after each iteration as
    ``||  |S| - magnitude ||_F / || magnitude ||_F`` with ``S`` the projected
    spectrogram.  Initial phase is drawn from a seeded generator, so results
    are deterministic for a given seed.
    """
    magnitude = np.asarray(magnitude, dtype=np.float64)
    if magnitude.ndim != 2:
        raise DomainError(
            f"magnitude must be 2-D (frames, bins), got shape {magnitude.shape}"
        )
    if np.any(magnitude < 0):
        raise DomainError("magnitude spectrogram must be non-negative")
    n_frames, n_bins = magnitude.shape
    if n_bins != fft_size // 2 + 1:
        raise DomainError(
            f"magnitude has {n_bins} bins but fft_size {fft_size} implies "
            f"{fft_size // 2 + 1}"
        )
    if iterations < 1:
        raise DomainError(f"iterations must be at least 1, got {iterations}")

    length = n_frames * hop
    mag_norm = float(np.linalg.norm(magnitude))
    if mag_norm == 0.0:
        silent = AudioClip(np.zeros(length), sample_rate=sample_rate)
        return GriffinLimResult(clip=silent, convergence=[0.0])

    total = (n_frames - 1) * hop + fft_size
    window = hann_window(fft_size)
    # frame index map: row t covers padded samples [t*hop, t*hop + fft_size)
    idx = hop * np.arange(n_frames)[:, None] + np.arange(fft_size)[None, :]
    flat_idx = idx.ravel()
    norm = np.bincount(
        flat_idx, weights=np.tile(window * window, n_frames), minlength=total
    )
    norm = np.maximum(norm, 1e-12)

    def synthesize(spec: np.ndarray) -> np.ndarray:
        chunks = np.fft.irfft(spec, n=fft_size, axis=1) * window
        acc = np.bincount(flat_idx, weights=chunks.ravel(), minlength=total)
        return acc / norm

    def analyze(padded: np.ndarray) -> np.ndarray:
        return np.fft.rfft(padded[idx] * window, axis=1)

    rng = np.random.default_rng(seed)
    phase = np.exp(2j * np.pi * rng.random(magnitude.shape))

    convergence: list[float] = []
    padded = synthesize(magnitude * phase)
    for _ in range(iterations):
        spec = analyze(padded)
        estimate = np.abs(spec)
        convergence.append(float(np.linalg.norm(estimate - magnitude) / mag_norm))
        phase = np.where(estimate > 0, spec / np.maximum(estimate, 1e-16), 1.0 + 0j)
        padded = synthesize(magnitude * phase)

    pad = fft_size // 2
    samples = np.zeros(length)
    available = min(length, total - pad)
    samples[:available] = padded[pad : pad + available]
    clip = AudioClip(samples, sample_rate=sample_rate)
    return GriffinLimResult(clip=clip, convergence=convergence)
