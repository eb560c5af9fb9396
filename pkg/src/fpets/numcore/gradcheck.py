"""Finite-difference gradient checker."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tape, Tensor


@dataclass
class GradCheckReport:
    max_rel_error: float
    tol: float
    passed: bool
    per_input: list[float]

    def __str__(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return f"grad_check {state}: max relative error {self.max_rel_error:.3e} (tol {self.tol:g})"


def _rel_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1.0)


def grad_check(f, x, tol: float = 1e-4, h: float = 1e-5) -> GradCheckReport:
    """Compare tape gradients of a scalar-valued f against central differences.

    x may be a single Tensor or a sequence of Tensors; f is called as f(*xs)
    and must be deterministic. Relative error per component is
    |g_tape - g_fd| / max(|g_tape|, |g_fd|, 1).
    """
    xs = [x] if isinstance(x, Tensor) else list(x)
    restore = [t.requires_grad for t in xs]
    for t in xs:
        t.requires_grad = True
        t.grad = None
    try:
        with Tape() as tape:
            y = f(*xs)
        tape.backward(y)
        tape_grads = [
            t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in xs
        ]
        per_input = []
        for t, g_tape in zip(xs, tape_grads):
            worst = 0.0
            flat = t.data.reshape(-1)
            g_flat = g_tape.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                y_plus = f(*xs).item()
                flat[i] = orig - h
                y_minus = f(*xs).item()
                flat[i] = orig
                g_fd = (y_plus - y_minus) / (2.0 * h)
                worst = max(worst, _rel_error(float(g_flat[i]), g_fd))
            per_input.append(worst)
    finally:
        for t, req in zip(xs, restore):
            t.requires_grad = req
            t.grad = None
    max_err = max(per_input) if per_input else 0.0
    return GradCheckReport(max_rel_error=max_err, tol=tol, passed=max_err < tol,
                           per_input=per_input)
