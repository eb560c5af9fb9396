"""Trainable position-encoding alignment: the model's core mechanism."""

from .attention import (
    attention_matrix,
    attention_width_from_alignment,
    brute_force_width,
    compute_positions,
    encode_frame_positions,
    encode_phoneme_positions,
    gaussian_attention_matrix,
    hard_attention,
    heavy_tail_profile,
    normalize_attention,
    softmax_attention,
)
from .codec import (
    DEFAULT_F_MAX,
    DEFAULT_F_MIN,
    KERNEL_GAUSSIAN,
    KERNEL_SINCOS,
    PositionCodec,
)
from .export import attention_to_csv, attention_to_pgm, load_attention_csv, load_pgm

__all__ = [
    "attention_matrix",
    "attention_width_from_alignment",
    "brute_force_width",
    "compute_positions",
    "encode_frame_positions",
    "encode_phoneme_positions",
    "gaussian_attention_matrix",
    "hard_attention",
    "heavy_tail_profile",
    "normalize_attention",
    "softmax_attention",
    "DEFAULT_F_MAX",
    "DEFAULT_F_MIN",
    "KERNEL_GAUSSIAN",
    "KERNEL_SINCOS",
    "PositionCodec",
    "attention_to_csv",
    "attention_to_pgm",
    "load_attention_csv",
    "load_pgm",
]
