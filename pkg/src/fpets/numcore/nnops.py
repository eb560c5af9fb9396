"""Neural-network primitive ops built on the tape.

All sequence tensors are (time, channels). Convolutions are same-length with
zero padding; pooling halves time (odd tail averaged with itself) and
nearest-repeat upsampling undoes the length arithmetic exactly.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    ConfigError,
    DegenerateAttentionError,
    EmbeddingIndexError,
    ShapeError,
)
from .kernels import exact_matmul
from .tensor import Tensor, _as_tensor, record

EPS_NORM = 1e-6


def dense(x, W, b=None) -> Tensor:
    """y = x W + b for x (N, Din), W (Din, Dout), b (Dout,)."""
    x, W = _as_tensor(x), _as_tensor(W)
    if x.ndim != 2 or W.ndim != 2 or x.shape[1] != W.shape[0]:
        raise ShapeError(f"dense: x {x.shape} incompatible with W {W.shape}")
    out = exact_matmul(x.data, W.data)
    if b is None:
        def bw(g):
            return g @ W.data.T, x.data.T @ g

        return record(out, (x, W), bw)
    b = _as_tensor(b)
    if b.ndim != 1 or b.shape[0] != W.shape[1]:
        raise ShapeError(f"dense: b {b.shape} incompatible with W {W.shape}")
    out = out + b.data

    def bw(g):
        return g @ W.data.T, x.data.T @ g, g.sum(axis=0)

    return record(out, (x, W, b), bw)


def conv1d(x, kernel, bias=None) -> Tensor:
    """Same-length 1-D convolution.

    x is (T, Cin), kernel (k, Cin, Cout) with k odd, bias (Cout,). The input
    is zero-padded (k-1)/2 on each side, windows are flattened tap-major and
    pushed through the exact matmul kernel, so the result is bit-identical to
    the naive nested-loop convolution.
    """
    x, K = _as_tensor(x), _as_tensor(kernel)
    if x.ndim != 2 or K.ndim != 3:
        raise ShapeError(f"conv1d: x {x.shape} incompatible with kernel {K.shape}")
    k, cin, cout = K.shape
    if k % 2 == 0:
        raise ConfigError(f"conv1d: kernel width must be odd, got {k}")
    if x.shape[1] != cin:
        raise ShapeError(f"conv1d: x {x.shape} incompatible with kernel {K.shape}")
    T = x.shape[0]
    pad = (k - 1) // 2
    padded = np.zeros((T + k - 1, cin), dtype=x.data.dtype)
    padded[pad : pad + T] = x.data
    cols = np.concatenate([padded[o : o + T] for o in range(k)], axis=1)
    K2 = K.data.reshape(k * cin, cout)
    out = exact_matmul(cols, K2)
    if bias is not None:
        bias = _as_tensor(bias)
        if bias.ndim != 1 or bias.shape[0] != cout:
            raise ShapeError(f"conv1d: bias {bias.shape} incompatible with kernel {K.shape}")
        out = out + bias.data

    def bw(g):
        gcols = g @ K2.T
        gpadded = np.zeros_like(padded)
        for o in range(k):
            gpadded[o : o + T] += gcols[:, o * cin : (o + 1) * cin]
        gx = gpadded[pad : pad + T].copy()
        gK = (cols.T @ g).reshape(k, cin, cout)
        if bias is None:
            return gx, gK
        return gx, gK, g.sum(axis=0)

    inputs = (x, K) if bias is None else (x, K, bias)
    return record(out, inputs, bw)


def gated_activation(a, g) -> Tensor:
    """tanh(a) * sigmoid(g), the two halves of a doubled-channel conv output."""
    a, g = _as_tensor(a), _as_tensor(g)
    if a.shape != g.shape:
        raise ShapeError(f"gated_activation: a {a.shape} does not match g {g.shape}")
    ta = np.tanh(a.data)
    sg = 1.0 / (1.0 + np.exp(-g.data))
    out = ta * sg

    def bw(grad):
        return grad * sg * (1.0 - ta * ta), grad * ta * sg * (1.0 - sg)

    return record(out, (a, g), bw)


def avg_pool1d(x) -> Tensor:
    """Stride-2 mean pooling over time; an odd tail is averaged with itself."""
    x = _as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"avg_pool1d: expected (T, C), got {x.shape}")
    T = x.shape[0]
    left = np.arange(0, T, 2)
    right = np.minimum(left + 1, T - 1)
    out = 0.5 * (x.data[left] + x.data[right])

    def bw(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, left, 0.5 * g)
        np.add.at(gx, right, 0.5 * g)
        return (gx,)

    return record(out, (x,), bw)


def upsample_nearest(x, target_len: int) -> Tensor:
    """Repeat each frame twice and truncate to target_len in {2T-1, 2T}."""
    x = _as_tensor(x)
    if x.ndim != 2:
        raise ShapeError(f"upsample_nearest: expected (T, C), got {x.shape}")
    T = x.shape[0]
    if target_len not in (2 * T - 1, 2 * T):
        raise ShapeError(
            f"upsample_nearest: target_len {target_len} out of range for input length {T}"
        )
    idx = np.arange(target_len) // 2
    out = x.data[idx]

    def bw(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        return (gx,)

    return record(out, (x,), bw)


def embedding(ids, E) -> Tensor:
    """Row gather E[ids]; backward scatters additively into the gathered rows."""
    E = _as_tensor(E)
    ids = np.asarray(ids)
    if ids.ndim != 1 or not np.issubdtype(ids.dtype, np.integer):
        raise ShapeError(f"embedding: ids must be a 1-D integer array, got {ids.dtype} {ids.shape}")
    V = E.shape[0]
    bad = np.nonzero((ids < 0) | (ids >= V))[0]
    if bad.size:
        pos = int(bad[0])
        raise EmbeddingIndexError(
            f"embedding: id {int(ids[pos])} at position {pos} outside table of {V} rows"
        )
    out = E.data[ids].copy()

    def bw(g):
        gE = np.zeros_like(E.data)
        np.add.at(gE, ids, g)
        return (gE,)

    return record(out, (E,), bw)


def row_normalize(A, eps: float = EPS_NORM) -> Tensor:
    """Divide each row by its sum. Rows may contain negative entries.

    A row whose sum is within eps of zero has no meaningful normalization;
    that aborts with a degenerate-attention error rather than emitting huge
    values.
    """
    A = _as_tensor(A)
    if A.ndim != 2:
        raise ShapeError(f"row_normalize: expected rank 2, got {A.shape}")
    sums = A.data.sum(axis=1, keepdims=True)
    bad = np.nonzero(np.abs(sums[:, 0]) <= eps)[0]
    if bad.size:
        raise DegenerateAttentionError(
            f"row_normalize: row {int(bad[0])} sums to {sums[bad[0], 0]:.3e} (|sum| <= {eps:g})"
        )
    out = A.data / sums

    def bw(g):
        dot = (g * A.data).sum(axis=1, keepdims=True)
        return (g / sums - dot / (sums * sums),)

    return record(out, (A,), bw)


def dropout(x, p: float, training: bool, seed: int) -> Tensor:
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p)."""
    x = _as_tensor(x)
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout: p must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    rng = np.random.default_rng(seed)
    mask = (rng.random(x.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    out = x.data * mask

    def bw(g):
        return (g * mask,)

    return record(out, (x,), bw)
