"""Alignment-quality evaluation: per-phoneme width error against true durations."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..alignment import (
    KERNEL_SINCOS,
    PositionCodec,
    attention_matrix,
    brute_force_width,
    compute_positions,
    encode_frame_positions,
    encode_phoneme_positions,
    gaussian_attention_matrix,
    hard_attention,
)
from ..errors import UsageError
from ..nnmodel import FpetsModel
from ..numcore import Tensor
from .corpus import Utterance


@dataclass
class ItemAlignment:
    id: str
    symbols: list[str]
    true_durations: np.ndarray
    predicted_widths: np.ndarray

    @property
    def avg_diff(self) -> float:
        return float(np.mean(np.abs(self.predicted_widths - self.true_durations)))


@dataclass
class AlignmentReport:
    items: list[ItemAlignment]

    @property
    def average_diff(self) -> float:
        """Mean absolute width error per phoneme, pooled over the corpus."""
        diffs = np.concatenate(
            [np.abs(it.predicted_widths - it.true_durations) for it in self.items]
        )
        return float(np.mean(diffs))

    def table_text(self, max_items: int | None = 10) -> str:
        lines = [f"average-diff (frames/phoneme): {self.average_diff:.4f}"]
        shown = self.items if max_items is None else self.items[:max_items]
        for it in shown:
            lines.append(f"{it.id}  {' '.join(it.symbols)}")
            lines.append("  real:    " + " ".join(f"{d:g}" for d in it.true_durations))
            lines.append("  resynth: " + " ".join(f"{w:g}" for w in it.predicted_widths))
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        rows = ["id,phoneme_index,symbol,true_duration,predicted_width"]
        for it in self.items:
            for i, (sym, d, w) in enumerate(zip(it.symbols, it.true_durations, it.predicted_widths)):
                rows.append(f"{it.id},{i},{sym},{float(d)!r},{float(w)!r}")
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def widths_from_alignment_vector(codec: PositionCodec, r_vals: np.ndarray, t_a: int) -> np.ndarray:
    """Per-phoneme frame counts of the hard attention built from widths r."""
    with nc.no_grad():
        s = compute_positions(Tensor(np.asarray(r_vals, dtype=np.float64)))
        if codec.kernel == KERNEL_SINCOS:
            scores = attention_matrix(encode_frame_positions(t_a, codec), encode_phoneme_positions(s, codec))
        else:
            scores = gaussian_attention_matrix(s, t_a, codec.gaussian_width)
        return brute_force_width(hard_attention(scores))


def evaluate_alignment(model: FpetsModel, corpus: list[Utterance], vocab: list[str] | None = None) -> AlignmentReport:
    """Width error of the model's inferred alignment against true durations."""
    items = []
    for u in corpus:
        if u.true_durations is None:
            raise UsageError(f"utterance {u.id!r} lacks true durations; cannot evaluate alignment")
        info = model.inference_alignment(u.phoneme_ids)
        widths = brute_force_width(Tensor(info["hard_attention"]))
        symbols = [vocab[int(v)] if vocab else str(int(v)) for v in u.phoneme_ids]
        items.append(
            ItemAlignment(
                id=u.id,
                symbols=symbols,
                true_durations=u.true_durations,
                predicted_widths=widths.astype(np.float64),
            )
        )
    return AlignmentReport(items=items)


def evaluate_ground_truth_baseline(
    codec: PositionCodec, corpus: list[Utterance], vocab: list[str] | None = None
) -> AlignmentReport:
    """Feed true durations through the width pipeline; error is pure discretization."""
    items = []
    for u in corpus:
        if u.true_durations is None:
            raise UsageError(f"utterance {u.id!r} lacks true durations; cannot evaluate alignment")
        t_a = int(round(float(u.true_durations.sum())))
        widths = widths_from_alignment_vector(codec, u.true_durations, t_a)
        symbols = [vocab[int(v)] if vocab else str(int(v)) for v in u.phoneme_ids]
        items.append(
            ItemAlignment(
                id=u.id,
                symbols=symbols,
                true_durations=u.true_durations,
                predicted_widths=widths.astype(np.float64),
            )
        )
    return AlignmentReport(items=items)
