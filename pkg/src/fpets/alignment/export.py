"""Attention matrix export: CSV (exact round trip) and PGM heatmaps."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..numcore import Tensor


def _as_matrix(A) -> np.ndarray:
    data = A.data if isinstance(A, Tensor) else np.asarray(A, dtype=np.float64)
    if data.ndim != 2:
        raise ShapeError(f"attention export: expected a matrix, got shape {data.shape}")
    return data


def attention_to_csv(A, path) -> None:
    """One frame row per line; %.17g preserves float64 exactly."""
    np.savetxt(path, _as_matrix(A), delimiter=",", fmt="%.17g")


def load_attention_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", dtype=np.float64)
    return np.atleast_2d(data)


def attention_to_pgm(A, path) -> None:
    """Binary PGM, min-max scaled to 0..255 (constant matrices render black)."""
    data = _as_matrix(A)
    lo, hi = float(data.min()), float(data.max())
    if hi > lo:
        scaled = np.rint((data - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        scaled = np.zeros(data.shape, dtype=np.uint8)
    h, w = scaled.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(scaled.tobytes())


def load_pgm(path) -> np.ndarray:
    """Read back a binary PGM written by attention_to_pgm."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ShapeError(f"not a binary PGM: magic {magic!r}")
        dims = fh.readline().split()
        w, h = int(dims[0]), int(dims[1])
        fh.readline()  # maxval
        return np.frombuffer(fh.read(w * h), dtype=np.uint8).reshape(h, w)
