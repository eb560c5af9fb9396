"""Exact-order numeric kernels.

numpy's BLAS matmul reorders and fuses multiplies (FMA), so its results do
not match a naive triple loop bit for bit. Forward passes here go through a
jitted kernel that accumulates in ascending-k order, which reproduces the
naive loop exactly at any dtype. Backward passes are free to use BLAS; they
are validated against finite differences, not bitwise oracles.

FPETS_THREADS bounds the thread pools of the underlying libraries; it must
be set before numpy is imported, so the CLI exports it first thing.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - mirror environment always has numba
    njit = None
    HAVE_NUMBA = False


def kernel_thread_count() -> int:
    """Thread budget the kernels run under (1 unless FPETS_THREADS raises it)."""
    try:
        return max(1, int(os.environ.get("FPETS_THREADS", "1")))
    except ValueError:
        return 1


if HAVE_NUMBA:

    @njit(cache=True)
    def _matmul_ikj(a, b, out):
        n, k = a.shape
        m = b.shape[1]
        for i in range(n):
            for p in range(k):
                aip = a[i, p]
                for j in range(m):
                    out[i, j] += aip * b[p, j]

else:  # pragma: no cover

    def _matmul_ikj(a, b, out):
        k = a.shape[1]
        for p in range(k):
            out += a[:, p : p + 1] * b[p : p + 1, :]


def exact_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(n,k) @ (k,m) with naive-loop rounding behavior.

    Accumulates partial products in ascending-k order with one rounding per
    multiply-add, so the result is bit-identical to the reference
    three-nested-loops implementation in the same precision.
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        from ..errors import ShapeError

        raise ShapeError(f"matmul: {a.shape} incompatible with {b.shape}")
    dtype = np.result_type(a.dtype, b.dtype)
    a = np.ascontiguousarray(a, dtype=dtype)
    b = np.ascontiguousarray(b, dtype=dtype)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=dtype)
    _matmul_ikj(a, b, out)
    return out


def naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Reference triple loop. Oracle only; quadratic-time slow, keep inputs small."""
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m), dtype=np.result_type(a.dtype, b.dtype))
    for i in range(n):
        for j in range(m):
            acc = out.dtype.type(0)
            for p in range(k):
                acc += a[i, p] * b[p, j]
            out[i, j] = acc
    return out


def warm_up() -> None:
    """Trigger jit compilation so benchmarks do not time the compiler."""
    x = np.ones((2, 2))
    exact_matmul(x, x)
    exact_matmul(x.astype(np.float32), x.astype(np.float32))
