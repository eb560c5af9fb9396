"""Audio I/O and acoustic feature pipeline."""

from .features import (
    KIND_LINEAR,
    KIND_MEL,
    LOG_FLOOR,
    AcousticFeatures,
    FeatureStats,
    denormalize,
    frame_count,
    hann_window,
    istft,
    linear_log_spectrogram,
    log_magnitude,
    mel_filterbank,
    mel_power_to_linear_magnitude,
    mel_spectrogram,
    normalize,
    stft,
)
from .griffinlim import GriffinLimResult, griffin_lim
from .wavio import AudioClip, clip_warning_count, load_wav, reset_clip_warnings, save_wav

__all__ = [
    "KIND_LINEAR",
    "KIND_MEL",
    "LOG_FLOOR",
    "AcousticFeatures",
    "FeatureStats",
    "denormalize",
    "frame_count",
    "hann_window",
    "istft",
    "linear_log_spectrogram",
    "log_magnitude",
    "mel_filterbank",
    "mel_power_to_linear_magnitude",
    "mel_spectrogram",
    "normalize",
    "stft",
    "GriffinLimResult",
    "griffin_lim",
    "AudioClip",
    "clip_warning_count",
    "load_wav",
    "reset_clip_warnings",
    "save_wav",
]
