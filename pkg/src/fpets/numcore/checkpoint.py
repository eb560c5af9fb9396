"""Binary tensor container.

Layout: 8-byte magic "FPETSCKP", u32 version (=1), u32 tensor count, then per
tensor: u16 name length, UTF-8 name, u8 rank, rank u64 extents, row-major
float64 payload. All integers and floats little-endian. Data is always
written as float64 regardless of the in-memory dtype, so containers are
precision-independent.
"""

from __future__ import annotations

import struct
from collections import OrderedDict

import numpy as np

from ..errors import CheckpointError

MAGIC = b"FPETSCKP"
VERSION = 1


def write_checkpoint(path, tensors: "OrderedDict[str, np.ndarray] | dict") -> None:
    """Write named arrays in iteration order; path may be an open binary file."""
    if hasattr(path, "write"):
        _write_entries(path, tensors)
        return
    with open(path, "wb") as fh:
        _write_entries(fh, tensors)


def _write_entries(fh, tensors) -> None:
    fh.write(MAGIC)
    fh.write(struct.pack("<II", VERSION, len(tensors)))
    for name, arr in tensors.items():
        arr = np.asarray(arr, dtype=np.float64)  # keep rank 0 as rank 0
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise CheckpointError(f"tensor name too long: {name[:40]}...")
        fh.write(struct.pack("<H", len(encoded)))
        fh.write(encoded)
        if arr.ndim > 0xFF:
            raise CheckpointError(f"tensor rank {arr.ndim} exceeds container limit")
        fh.write(struct.pack("<B", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.astype("<f8").tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return buf


def read_checkpoint(path) -> "OrderedDict[str, np.ndarray]":
    """Read a container back; names keep their write order."""
    out: OrderedDict[str, np.ndarray] = OrderedDict()
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(MAGIC), "magic")
        if magic != MAGIC:
            raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, count = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "name length"))
            name = _read_exact(fh, name_len, "name").decode("utf-8")
            (rank,) = struct.unpack("<B", _read_exact(fh, 1, "rank"))
            shape = struct.unpack(f"<{rank}Q", _read_exact(fh, 8 * rank, "extents"))
            n_items = 1
            for extent in shape:
                n_items *= extent
            payload = _read_exact(fh, 8 * n_items, f"data of {name}")
            out[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    return out


def floats_from_bytes(raw: bytes) -> np.ndarray:
    """Encode arbitrary bytes as a float array (for metadata entries)."""
    return np.frombuffer(raw, dtype=np.uint8).astype(np.float64)


def bytes_from_floats(arr: np.ndarray) -> bytes:
    """Inverse of floats_from_bytes."""
    return np.asarray(arr, dtype=np.float64).astype(np.uint8).tobytes()
