import struct
import wave

import numpy as np
import pytest

from fpets import audiofeat as af
from fpets.errors import AudioError


def test_sine_round_trip(tmp_path):
    sr = 22050
    t = np.arange(sr) / sr
    clip = af.AudioClip(0.5 * np.sin(2 * np.pi * 440.0 * t), sample_rate=sr)
    path = tmp_path / "tone.wav"
    clipped = af.save_wav(clip, path)
    assert clipped == 0
    back = af.load_wav(path)
    assert back.sample_rate == sr
    assert back.samples.size == clip.samples.size
    assert np.max(np.abs(back.samples - clip.samples)) < 1.0 / 32768.0


def test_zero_length_clip_round_trip(tmp_path):
    path = tmp_path / "empty.wav"
    af.save_wav(af.AudioClip(np.zeros(0), sample_rate=8000), path)
    back = af.load_wav(path)
    assert back.samples.size == 0


def test_stereo_rejected(tmp_path):
    path = tmp_path / "stereo.wav"
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(2)
        wav.setsampwidth(2)
        wav.setframerate(8000)
        wav.writeframes(struct.pack("<4h", 0, 0, 0, 0))
    with pytest.raises(AudioError, match="unsupported encoding"):
        af.load_wav(path)


def test_corrupt_header_rejected(tmp_path):
    path = tmp_path / "garbage.wav"
    path.write_bytes(b"RIFFxxxxWAVEfmt broken")
    with pytest.raises(AudioError, match="corrupt"):
        af.load_wav(path)


def test_clipping_counts_and_saturates(tmp_path):
    af.reset_clip_warnings()
    clip = af.AudioClip(np.array([1.5, 0.0, -2.0]), sample_rate=8000)
    path = tmp_path / "clip.wav"
    n = af.save_wav(clip, path)
    assert n == 2
    assert af.clip_warning_count() == 2
    back = af.load_wav(path)
    q = np.rint(back.samples * 32768).astype(int)
    assert q[0] == 32767
    assert q[2] == -32768


def test_non_finite_samples_rejected():
    with pytest.raises(AudioError, match="finite"):
        af.AudioClip(np.array([0.0, np.nan]), sample_rate=8000)
