"""Latency harness: single-pass synthesis vs a frame-looped decoder simulator."""

from __future__ import annotations

import time

import numpy as np

from .. import audiofeat as af
from .. import numcore as nc
from ..errors import UsageError
from ..nnmodel import FpetsModel
from ..numcore import Tensor


def _median_ms(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return float(np.median(times))


def simulate_frame_loop(model: FpetsModel, ids: np.ndarray, t_a: int) -> int:
    """Run the stage-2 decoder once per output frame over the full context.

    Mimics an autoregressive decoder's cost profile: the network itself is
    identical, but it is invoked T_a times instead of once.  Returns the
    number of decoder invocations performed (always t_a).
    """
    info = model.inference_alignment(ids, t_a_override=t_a)
    a_hard = Tensor(info["hard_attention"])
    rel = Tensor((info["hard_attention"] @ info["relative_position"]).reshape(t_a, 1))
    with nc.no_grad():
        h = model.encoder_forward(ids)
        context = nc.matmul(a_hard, h)
        x_full = nc.concat([context, rel], axis=1)
        forwards = 0
        for _ in range(t_a):
            y = model.dec2_in(x_full)
            y = model.dec2_ufans(y)
            model.dec2_out(y)
            forwards += 1
    return forwards


def run_bench(
    model: FpetsModel,
    phoneme_lengths: list[int],
    repeat: int = 20,
    seed: int = 0,
    stats: tuple[float, float] | None = None,
    gl_iterations: int = 30,
) -> list[dict]:
    """Per-length medians of synthesis latency, with and without the vocoder,
    plus one timed run of the frame-looped simulator."""
    if model.stage != 2:
        raise UsageError("bench requires a stage-2 model")
    rng = np.random.default_rng(seed)
    rows = []
    for t_p in phoneme_lengths:
        if t_p < 1:
            raise UsageError(f"phoneme length must be >= 1, got {t_p}")
        ids = rng.integers(0, model.config.vocab_size, size=t_p)
        # warm up and establish T_a / counters
        before = model.counters["decoder2_forwards"]
        pred, info = model.stage2_forward(ids)
        after = model.counters["decoder2_forwards"]
        if after - before != 1:
            raise AssertionError(
                f"expected exactly 1 decoder forward per synthesis, saw {after - before}"
            )
        t_a = info["t_a"]

        fpets_ms = _median_ms(lambda: model.stage2_forward(ids), repeat)

        if stats is not None:
            st = af.FeatureStats(lo=stats[0], hi=stats[1])
            mag = np.exp(af.denormalize(pred.data, st))
        else:
            mag = np.exp(pred.data)
        if model.config.feature_kind == "mel":
            fb = af.mel_filterbank(model.config.n_mel, model.config.fft_size, model.config.sample_rate)
            mag = af.mel_power_to_linear_magnitude(mag, fb)

        def synth_with_vocoder():
            p, _ = model.stage2_forward(ids)
            af.griffin_lim(
                mag,
                model.config.fft_size,
                model.config.hop,
                model.config.sample_rate,
                iterations=gl_iterations,
                seed=seed,
            )

        vocoder_ms = _median_ms(synth_with_vocoder, max(1, repeat // 4))

        t0 = time.perf_counter()
        sim_forwards = simulate_frame_loop(model, ids, t_a)
        sim_ms = (time.perf_counter() - t0) * 1000.0
        if sim_forwards != t_a:
            raise AssertionError(f"simulator ran {sim_forwards} decoder forwards, expected {t_a}")

        rows.append(
            {
                "t_p": t_p,
                "t_a": t_a,
                "fpets_ms": fpets_ms,
                "fpets_vocoder_ms": vocoder_ms,
                "simulator_ms": sim_ms,
                "decoder_forwards": 1,
                "simulator_forwards": sim_forwards,
            }
        )
    return rows
