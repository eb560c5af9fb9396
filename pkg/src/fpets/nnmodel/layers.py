"""Network building blocks: dense, gated conv units, U-shaped conv stacks."""

from __future__ import annotations

import math

import numpy as np

from .. import numcore as nc
from ..numcore import Tensor


def init_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    """Uniform(-a, a) with a = sqrt(1/fan_in)."""
    a = math.sqrt(1.0 / fan_in)
    return rng.uniform(-a, a, size=shape)


class DropoutStream:
    """Deterministic per-call dropout seeds: one base seed, sequential draws."""

    def __init__(self, base_seed: int = 0):
        self.base_seed = int(base_seed)
        self._n = 0

    def reset(self, base_seed: int | None = None) -> None:
        if base_seed is not None:
            self.base_seed = int(base_seed)
        self._n = 0

    def next(self) -> int:
        seed = (self.base_seed * 1_000_003 + self._n) % (2**63)
        self._n += 1
        return seed


class Dense:
    def __init__(self, rng, d_in: int, d_out: int, name: str):
        self.name = name
        self.w = Tensor(init_uniform(rng, (d_in, d_out), d_in), requires_grad=True, name=f"{name}.w")
        self.b = Tensor(np.zeros(d_out), requires_grad=True, name=f"{name}.b")

    def __call__(self, x: Tensor) -> Tensor:
        return nc.dense(x, self.w, self.b)

    def params(self):
        return [(self.w.name, self.w), (self.b.name, self.b)]


class GatedConvUnit:
    """Residual unit: x + proj(tanh(a) * sigmoid(g)) with (a, g) = split(conv(x)).

    The conv maps ``channels`` to ``2 * filter_width``; the dense projection
    maps the gated ``filter_width`` channels back to ``channels`` so the unit
    is shape-preserving and stackable.
    """

    def __init__(self, rng, channels: int, filter_width: int, kernel: int, dropout: float, name: str):
        self.name = name
        self.filter_width = filter_width
        self.dropout = dropout
        fan_in = kernel * channels
        self.kernel = Tensor(
            init_uniform(rng, (kernel, channels, 2 * filter_width), fan_in),
            requires_grad=True,
            name=f"{name}.kernel",
        )
        self.bias = Tensor(np.zeros(2 * filter_width), requires_grad=True, name=f"{name}.bias")
        self.proj = Dense(rng, filter_width, channels, f"{name}.proj")

    def __call__(self, x: Tensor, train: bool = False, drops: DropoutStream | None = None) -> Tensor:
        h = nc.conv1d(x, self.kernel, self.bias)
        a = nc.slice_cols(h, 0, self.filter_width)
        g = nc.slice_cols(h, self.filter_width, 2 * self.filter_width)
        gated = nc.gated_activation(a, g)
        out = self.proj(gated)
        if train and self.dropout > 0.0 and drops is not None:
            out = nc.dropout(out, self.dropout, training=True, seed=drops.next())
        return nc.add(x, out)

    def params(self):
        return [(self.kernel.name, self.kernel), (self.bias.name, self.bias)] + self.proj.params()


class Ufans:
    """U-shaped conv stack over (T, C) sequences.

    ``depth`` levels of [gated conv, average pool stride 2] going down, one
    gated conv at the bottom, then ``depth`` levels of [nearest upsample to
    the recorded length, gated conv, additive skip] going up.  Average
    pooling maps T to ceil(T/2) and the upsample restores the exact recorded
    length, so any T >= 1 round-trips without padding; short sequences
    saturate at length 1 in the deep levels.
    """

    def __init__(self, rng, channels: int, filter_width: int, kernel: int, depth: int, dropout: float, name: str):
        self.name = name
        self.depth = depth
        self.down = [
            GatedConvUnit(rng, channels, filter_width, kernel, dropout, f"{name}.down{i}")
            for i in range(depth)
        ]
        self.bottom = GatedConvUnit(rng, channels, filter_width, kernel, dropout, f"{name}.bottom")
        self.up = [
            GatedConvUnit(rng, channels, filter_width, kernel, dropout, f"{name}.up{i}")
            for i in range(depth)
        ]

    def __call__(self, x: Tensor, train: bool = False, drops: DropoutStream | None = None) -> Tensor:
        skips = []
        lengths = []
        h = x
        for unit in self.down:
            h = unit(h, train, drops)
            skips.append(h)
            lengths.append(h.shape[0])
            h = nc.avg_pool1d(h)
        h = self.bottom(h, train, drops)
        for i in range(self.depth - 1, -1, -1):
            h = nc.upsample_nearest(h, lengths[i])
            h = self.up[i](h, train, drops)
            h = nc.add(h, skips[i])
        return h

    def params(self):
        out = []
        for unit in self.down:
            out.extend(unit.params())
        out.extend(self.bottom.params())
        for unit in self.up:
            out.extend(unit.params())
        return out
