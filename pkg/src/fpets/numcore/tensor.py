"""Minimal reverse-mode autodiff over numpy arrays.

A Tape records every differentiable operation executed while it is active.
Tape.backward walks the record once, in reverse, accumulating gradients
additively into every tensor that requires them. There is no graph object
beyond the flat op list; recording order is already a topological order.

Forward matmul goes through kernels.exact_matmul so results match naive-loop
oracles bit for bit; backward matmuls use BLAS (validated by finite
differences, where BLAS rounding is irrelevant).
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ShapeError, UsageError
from .kernels import exact_matmul

_DEFAULT_DTYPE = np.float64
_TAPE_STACK: list["Tape"] = []
_GRAD_ENABLED = True
_DEBUG_CHECKS = False


def set_default_dtype(dtype) -> None:
    """Switch the working precision (float64 default, float32 for speed runs)."""
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise UsageError(f"unsupported default dtype {dtype}")
    _DEFAULT_DTYPE = dtype.type


def default_dtype():
    return _DEFAULT_DTYPE


def set_debug_checks(enabled: bool) -> None:
    """When on, every op output is asserted finite (debug aid, off by default)."""
    global _DEBUG_CHECKS
    _DEBUG_CHECKS = bool(enabled)


class Tensor:
    """A numpy array plus a gradient slot."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_tape")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.asarray(data, dtype=_DEFAULT_DTYPE)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.name = name
        self._tape: Tape | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise UsageError(f"item(): tensor has shape {self.data.shape}, not scalar")
        return float(self.data.reshape(()))

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad}{tag})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        if p != 2:
            raise UsageError("only **2 is supported; use explicit ops otherwise")
        return square(self)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis=axis, keepdims=keepdims)


class TapeNode:
    __slots__ = ("inputs", "output", "backward_fn")

    def __init__(self, inputs, output, backward_fn):
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn


class Tape:
    """Flat record of ops; context manager activates recording."""

    def __init__(self):
        self.ops: list[TapeNode] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _TAPE_STACK.pop()
        if popped is not self:  # pragma: no cover - misuse guard
            raise UsageError("tape stack corrupted: exited a tape that was not on top")

    def backward(self, loss: Tensor, free_graph: bool = True) -> None:
        """Seed d(loss)/d(loss)=1 and sweep the record once, newest op first."""
        if loss.data.size != 1:
            raise UsageError(f"backward: loss must be scalar, got shape {loss.data.shape}")
        if loss._tape is not self:
            raise UsageError("backward: loss was not recorded on this tape")
        loss.grad = np.ones_like(loss.data)
        for node in reversed(self.ops):
            g_out = node.output.grad
            if g_out is None:
                continue
            grads = node.backward_fn(g_out)
            for t, g in zip(node.inputs, grads):
                if g is None or not t.requires_grad:
                    continue
                g = np.asarray(g, dtype=t.data.dtype)
                if g.shape != t.data.shape:
                    raise ShapeError(
                        f"backward: gradient shape {g.shape} does not match tensor {t.data.shape}"
                    )
                t.grad = g if t.grad is None else t.grad + g
        if free_graph:
            self.ops = []

    def ancestors(self, t: Tensor) -> set[int]:
        """ids of every tensor with a recorded path into t. Instrumentation aid."""
        producer = {id(node.output): node for node in self.ops}
        seen: set[int] = set()
        frontier = [t]
        while frontier:
            cur = frontier.pop()
            node = producer.get(id(cur))
            if node is None:
                continue
            for inp in node.inputs:
                if id(inp) not in seen:
                    seen.add(id(inp))
                    frontier.append(inp)
        return seen


class no_grad:
    """Suppress recording inside the block even when a tape is active."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev


def active_tape() -> Tape | None:
    return _TAPE_STACK[-1] if _TAPE_STACK else None


def grad_enabled() -> bool:
    return _GRAD_ENABLED


def backward(loss: Tensor, free_graph: bool = True) -> None:
    if loss._tape is None:
        raise UsageError("backward: loss was not recorded on any tape")
    loss._tape.backward(loss, free_graph=free_graph)


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def record(out_data: np.ndarray, inputs: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    """Wrap op output; register on the active tape when gradients are live."""
    if _DEBUG_CHECKS and not np.all(np.isfinite(out_data)):
        raise FloatingPointError("op produced a non-finite value")
    out = Tensor(out_data)
    out.data = np.asarray(out_data)  # keep op dtype, skip default-dtype cast
    tape = active_tape()
    if tape is not None and _GRAD_ENABLED and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out._tape = tape
        tape.ops.append(TapeNode(tuple(inputs), out, backward_fn))
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# elementwise arithmetic, numpy broadcasting rules

def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data + b.data

    def bw(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return record(out, (a, b), bw)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data - b.data

    def bw(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)

    return record(out, (a, b), bw)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data * b.data

    def bw(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return record(out, (a, b), bw)


def div(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = a.data / b.data

    def bw(g):
        return (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        )

    return record(out, (a, b), bw)


def neg(a) -> Tensor:
    a = _as_tensor(a)
    return record(-a.data, (a,), lambda g: (-g,))


def _unary(a, out_data, local_grad) -> Tensor:
    a = _as_tensor(a)
    return record(out_data, (a,), lambda g: (g * local_grad,))


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    y = np.tanh(a.data)
    return _unary(a, y, 1.0 - y * y)


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    y = 1.0 / (1.0 + np.exp(-a.data))
    return _unary(a, y, y * (1.0 - y))


def exp(a) -> Tensor:
    a = _as_tensor(a)
    y = np.exp(a.data)
    return _unary(a, y, y)


def sin(a) -> Tensor:
    a = _as_tensor(a)
    return _unary(a, np.sin(a.data), np.cos(a.data))


def cos(a) -> Tensor:
    a = _as_tensor(a)
    return _unary(a, np.cos(a.data), -np.sin(a.data))


def absolute(a) -> Tensor:
    a = _as_tensor(a)
    return _unary(a, np.abs(a.data), np.sign(a.data))


def square(a) -> Tensor:
    a = _as_tensor(a)
    return _unary(a, a.data * a.data, 2.0 * a.data)


def softplus(a) -> Tensor:
    """log(1 + exp(x)), computed stably; derivative is the sigmoid."""
    a = _as_tensor(a)
    y = np.logaddexp(0.0, a.data)
    return _unary(a, y, 1.0 / (1.0 + np.exp(-a.data)))


# reductions and structure

def tensor_sum(a, axis=None, keepdims=False) -> Tensor:
    a = _as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def bw(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return record(out, (a,), bw)


def tensor_mean(a, axis=None, keepdims=False) -> Tensor:
    a = _as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else a.data.shape[axis]

    def bw(g):
        g = np.asarray(g) / count
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return record(out, (a,), bw)


def add_n(tensors: Sequence[Tensor]) -> Tensor:
    """Sum a list of same-shaped tensors (one node instead of a chain)."""
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise UsageError("add_n: empty input list")
    out = tensors[0].data.copy()
    for t in tensors[1:]:
        if t.data.shape != tensors[0].data.shape:
            raise ShapeError(
                f"add_n: shape {t.data.shape} does not match {tensors[0].data.shape}"
            )
        out = out + t.data
    return record(out, tuple(tensors), lambda g: tuple(g for _ in tensors))


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    out = exact_matmul(a.data, b.data)

    def bw(g):
        return g @ b.data.T, a.data.T @ g

    return record(out, (a, b), bw)


def transpose(a) -> Tensor:
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError(f"transpose: expected rank 2, got shape {a.data.shape}")
    return record(a.data.T.copy(), (a,), lambda g: (g.T.copy(),))


def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    out = a.data.reshape(shape)
    return record(out.copy(), (a,), lambda g: (g.reshape(a.data.shape),))


def cumsum(a) -> Tensor:
    """Prefix sums of a 1-D tensor."""
    a = _as_tensor(a)
    if a.data.ndim != 1:
        raise ShapeError(f"cumsum: expected rank 1, got shape {a.data.shape}")
    out = np.cumsum(a.data)

    def bw(g):
        return (np.cumsum(g[::-1])[::-1],)

    return record(out, (a,), bw)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise UsageError("concat: empty input list")
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def bw(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis)
            for i in range(len(tensors))
        )

    return record(out, tuple(tensors), bw)


def slice_rows(a, start: int, stop: int) -> Tensor:
    a = _as_tensor(a)
    out = a.data[start:stop].copy()

    def bw(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return (full,)

    return record(out, (a,), bw)


def slice_cols(a, start: int, stop: int) -> Tensor:
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError(f"slice_cols: expected rank 2, got shape {a.data.shape}")
    out = a.data[:, start:stop].copy()

    def bw(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        return (full,)

    return record(out, (a,), bw)


def pad_rows(a, before: int, after: int) -> Tensor:
    """Zero-pad along axis 0."""
    a = _as_tensor(a)
    if before < 0 or after < 0:
        raise UsageError(f"pad_rows: negative padding ({before}, {after})")
    widths = [(before, after)] + [(0, 0)] * (a.data.ndim - 1)
    out = np.pad(a.data, widths)

    def bw(g):
        stop = g.shape[0] - after
        return (g[before:stop].copy(),)

    return record(out, (a,), bw)
