"""Training losses: masked acoustic L2, banded length loss, weighted total."""

from __future__ import annotations

import numpy as np

from .. import numcore as nc
from ..errors import ConfigError, ShapeError
from ..numcore import Tensor


def acoustic_loss(pred: Tensor, target: np.ndarray, frame_mask: np.ndarray | None = None) -> Tensor:
    """Mean squared difference over unmasked frame-feature elements.

    ``frame_mask`` is per-frame (length T_a); 1 marks real frames.  Padded
    frames contribute exactly zero regardless of their contents.
    """
    if isinstance(target, Tensor):
        target = target.data
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeError(f"acoustic_loss: pred {pred.shape} vs target {target.shape}")
    diff = nc.sub(pred, Tensor(target))
    sq = nc.square(diff)
    if frame_mask is None:
        return nc.tensor_mean(sq)
    mask = np.asarray(frame_mask, dtype=np.float64)
    if mask.shape != (target.shape[0],):
        raise ShapeError(
            f"acoustic_loss: frame_mask {mask.shape} does not match {target.shape[0]} frames"
        )
    count = float(mask.sum()) * target.shape[1]
    if count == 0:
        raise ShapeError("acoustic_loss: mask selects no frames")
    masked = nc.mul(sq, Tensor(mask.reshape(-1, 1)))
    return nc.div(nc.tensor_sum(masked), count)


def alignment_loss(r: Tensor, t_a: int, gamma: float) -> Tensor:
    """Banded absolute length error: gamma inside the band, |sum r - T_a| outside.

    Inside the band the value is a constant (zero gradient); outside, the
    loss is the absolute difference and pulls sum r toward T_a.  Both
    branches equal gamma at the band edge, so the loss is continuous.
    """
    if gamma <= 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    total = nc.tensor_sum(r)
    d = nc.absolute(nc.sub(total, float(t_a)))
    if float(d.data) < gamma:
        return Tensor(np.asarray(gamma, dtype=np.float64))
    return d


def total_loss(acou: Tensor, align: Tensor, weight: float = 0.02) -> Tensor:
    """Weighted sum: acoustic + weight * alignment."""
    return nc.add(acou, nc.mul(align, float(weight)))
