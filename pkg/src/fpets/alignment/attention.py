"""Alignment math: positions, position encodings, attention matrices, and
the alignment-width / attention-width algebra.

Width vectors r live in frames. The absolute position of phoneme i is the
midpoint of its span, s_i = sum(r[:i]) + r_i/2. Frame j and phoneme i score
A_ji = F_j . P_i which collapses to sum_f cos((s_i - j)/f): a heavy-tailed
bump centered on s_i, so every frame receives usable gradient signal from
every phoneme.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, ShapeError, ConfigError
from ..numcore import Tensor
from .. import numcore as nc
from .codec import KERNEL_SINCOS, PositionCodec


def _check_positive_widths(r_data: np.ndarray, who: str) -> None:
    if r_data.ndim != 1 or r_data.size < 1:
        raise ShapeError(f"{who}: widths must be a non-empty vector, got shape {r_data.shape}")
    if np.any(r_data <= 0.0):
        bad = int(np.nonzero(r_data <= 0.0)[0][0])
        raise DomainError(f"{who}: width {r_data[bad]:g} at index {bad} is not positive")


def compute_positions(r: Tensor) -> Tensor:
    """Midpoint positions s_i = sum_{k<i} r_k + r_i/2. Differentiable in r."""
    r = r if isinstance(r, Tensor) else Tensor(r)
    _check_positive_widths(r.data, "compute_positions")
    return nc.sub(nc.cumsum(r), nc.mul(r, 0.5))


def _sincos_encode(positions: Tensor, codec: PositionCodec) -> Tensor:
    if codec.kernel != KERNEL_SINCOS:
        raise ConfigError(f"sine-cosine encoding requested from a {codec.kernel!r} codec")
    n = positions.shape[0]
    inv_f = nc.div(1.0, codec.frequencies)
    phase = nc.mul(nc.reshape(positions, (n, 1)), nc.reshape(inv_f, (1, codec.length)))
    return nc.concat([nc.sin(phase), nc.cos(phase)], axis=1)


def encode_phoneme_positions(s: Tensor, codec: PositionCodec) -> Tensor:
    """Key matrix P (T_p x 2L) from phoneme positions s."""
    s = s if isinstance(s, Tensor) else Tensor(s)
    if s.ndim != 1:
        raise ShapeError(f"encode_phoneme_positions: expected a vector, got shape {s.shape}")
    return _sincos_encode(s, codec)


def encode_frame_positions(t_a: int, codec: PositionCodec) -> Tensor:
    """Query matrix F (T_a x 2L); row j encodes the integer frame index j."""
    if t_a < 1:
        raise DomainError(f"encode_frame_positions: T_a must be >= 1, got {t_a}")
    j = Tensor(np.arange(t_a, dtype=np.float64))
    return _sincos_encode(j, codec)


def attention_matrix(F: Tensor, P: Tensor) -> Tensor:
    """Raw scores A = F P^T (T_a x T_p)."""
    if F.ndim != 2 or P.ndim != 2 or F.shape[1] != P.shape[1]:
        raise ShapeError(f"attention_matrix: F {F.shape} incompatible with P {P.shape}")
    return nc.matmul(F, nc.transpose(P))


def normalize_attention(A: Tensor) -> Tensor:
    """Divide each frame row by its plain sum (rows may go negative)."""
    return nc.row_normalize(A)


def softmax_attention(A: Tensor) -> Tensor:
    """Optional softmax substitute for the plain sum normalization."""
    shift = Tensor(A.data.max(axis=1, keepdims=True))  # constant shift, grad-invariant
    e = nc.exp(nc.sub(A, shift))
    return nc.row_normalize(e)


def hard_attention(A, valid_columns: int | None = None) -> Tensor:
    """One-hot rows at each row argmax; ties break to the smallest index.

    ``valid_columns`` restricts the argmax to the first that many columns
    (padded phoneme slots in a batch never win). Not differentiable; the
    result never carries gradients.
    """
    data = A.data if isinstance(A, Tensor) else np.asarray(A, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] < 1:
        raise ShapeError(f"hard_attention: expected (T_a, T_p) scores, got shape {data.shape}")
    if valid_columns is not None:
        if not 1 <= valid_columns <= data.shape[1]:
            raise ShapeError(
                f"hard_attention: valid_columns {valid_columns} outside 1..{data.shape[1]}"
            )
        data = data.copy()
        data[:, valid_columns:] = -np.inf
    idx = np.argmax(data, axis=1)  # np.argmax returns the first (smallest) max index
    out = np.zeros_like(data)
    out[np.arange(data.shape[0]), idx] = 1.0
    return Tensor(out)


def attention_width_from_alignment(r) -> np.ndarray:
    """w_i = (r_{i-1} + r_{i+1} + 2 r_i)/4 with edge widths replicated.

    The boundary convention (r_{-1}=r_0, r_{T_p}=r_{T_p-1}) makes the
    smoothing mass-preserving: sum(w) == sum(r).
    """
    r_data = np.asarray(r.data if isinstance(r, Tensor) else r, dtype=np.float64)
    _check_positive_widths(r_data, "attention_width_from_alignment")
    prev_r = np.concatenate([r_data[:1], r_data[:-1]])
    next_r = np.concatenate([r_data[1:], r_data[-1:]])
    return 0.25 * (prev_r + next_r + 2.0 * r_data)


def brute_force_width(a_tilde) -> np.ndarray:
    """Empirical widths: how many frames argmax to each phoneme."""
    data = a_tilde.data if isinstance(a_tilde, Tensor) else np.asarray(a_tilde)
    if data.ndim != 2:
        raise ShapeError(f"brute_force_width: expected (T_a, T_p), got shape {data.shape}")
    row_sums = data.sum(axis=1)
    if not (np.all(row_sums == 1.0) and np.all((data == 0.0) | (data == 1.0))):
        raise DomainError("brute_force_width: rows must be one-hot")
    return data.sum(axis=0).astype(np.int64)


def gaussian_attention_matrix(s: Tensor, t_a: int, sigma: float) -> Tensor:
    """A_ji = exp(-(j - s_i)^2 / (2 sigma^2)); the ablation kernel."""
    if sigma <= 0.0:
        raise DomainError(f"gaussian_attention_matrix: sigma must be positive, got {sigma}")
    if t_a < 1:
        raise DomainError(f"gaussian_attention_matrix: T_a must be >= 1, got {t_a}")
    s = s if isinstance(s, Tensor) else Tensor(s)
    j = Tensor(np.arange(t_a, dtype=np.float64).reshape(t_a, 1))
    d = nc.sub(j, nc.reshape(s, (1, s.shape[0])))
    return nc.exp(nc.mul(nc.square(d), -1.0 / (2.0 * sigma * sigma)))


def heavy_tail_profile(codec: PositionCodec, offsets) -> np.ndarray:
    """g(x) = sum_f cos(x/f) over the given center offsets. Diagnostic only."""
    if codec.kernel != KERNEL_SINCOS:
        raise ConfigError("heavy_tail_profile: requires a sine-cosine codec")
    x = np.asarray(offsets, dtype=np.float64)
    return np.cos(x[..., None] / codec.frequencies.data).sum(axis=-1)
