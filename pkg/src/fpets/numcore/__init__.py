"""Minimal tensor library: tape autodiff, NN primitives, Adam, grad checking."""

from .adam import Adam, AdamState, adam_step
from .checkpoint import (
    bytes_from_floats,
    floats_from_bytes,
    read_checkpoint,
    write_checkpoint,
)
from .gradcheck import GradCheckReport, grad_check
from .kernels import exact_matmul, kernel_thread_count, naive_matmul, warm_up
from .nnops import (
    EPS_NORM,
    avg_pool1d,
    conv1d,
    dense,
    dropout,
    embedding,
    gated_activation,
    row_normalize,
    upsample_nearest,
)
from .tensor import (
    Tape,
    Tensor,
    absolute,
    add,
    add_n,
    backward,
    concat,
    cos,
    cumsum,
    default_dtype,
    div,
    exp,
    matmul,
    mul,
    neg,
    no_grad,
    pad_rows,
    reshape,
    set_debug_checks,
    set_default_dtype,
    sigmoid,
    sin,
    slice_cols,
    slice_rows,
    softplus,
    square,
    sub,
    tanh,
    tensor_mean,
    tensor_sum,
    transpose,
    zero_grads,
)

__all__ = [
    "Adam",
    "AdamState",
    "adam_step",
    "bytes_from_floats",
    "floats_from_bytes",
    "read_checkpoint",
    "write_checkpoint",
    "GradCheckReport",
    "grad_check",
    "exact_matmul",
    "kernel_thread_count",
    "naive_matmul",
    "warm_up",
    "EPS_NORM",
    "avg_pool1d",
    "conv1d",
    "dense",
    "dropout",
    "embedding",
    "gated_activation",
    "row_normalize",
    "upsample_nearest",
    "Tape",
    "Tensor",
    "absolute",
    "add",
    "add_n",
    "backward",
    "concat",
    "cos",
    "cumsum",
    "default_dtype",
    "div",
    "exp",
    "matmul",
    "mul",
    "neg",
    "no_grad",
    "pad_rows",
    "reshape",
    "set_debug_checks",
    "set_default_dtype",
    "sigmoid",
    "sin",
    "slice_cols",
    "slice_rows",
    "softplus",
    "square",
    "sub",
    "tanh",
    "tensor_mean",
    "tensor_sum",
    "transpose",
    "zero_grads",
]
