"""Shared oracles and case generators for the test suite.

The naive_* functions are deliberately dumb reference implementations,
written with scalar Python loops so they share no code (and no accumulation
tricks) with the library under test.
"""

import numpy as np

from fpets import numcore as nc


def naive_dense(x, W, b=None):
    n, din = x.shape
    dout = W.shape[1]
    out = np.zeros((n, dout), dtype=np.result_type(x.dtype, W.dtype))
    for i in range(n):
        for j in range(dout):
            acc = out.dtype.type(0)
            for p in range(din):
                acc += x[i, p] * W[p, j]
            out[i, j] = acc
    if b is not None:
        out = out + b
    return out


def naive_conv1d(x, K, b=None):
    T, cin = x.shape
    k, _, cout = K.shape
    pad = (k - 1) // 2
    xp = np.zeros((T + k - 1, cin), dtype=x.dtype)
    xp[pad : pad + T] = x
    out = np.zeros((T, cout), dtype=np.result_type(x.dtype, K.dtype))
    for t in range(T):
        for co in range(cout):
            acc = out.dtype.type(0)
            for o in range(k):
                for ci in range(cin):
                    acc += xp[t + o, ci] * K[o, ci, co]
            out[t, co] = acc
    if b is not None:
        out = out + b
    return out


def rand_tensor(rng, shape, scale=1.0, offset=0.0):
    return nc.Tensor(offset + scale * rng.standard_normal(shape))


def cosine_attention_oracle(s, f, t_a):
    """Score matrix evaluated the slow way: per cell, sum_k cos((s_i - j)/f_k)."""
    s = np.asarray(s, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    out = np.zeros((t_a, s.size))
    for j in range(t_a):
        for i in range(s.size):
            acc = 0.0
            for k in range(f.size):
                acc += np.cos((s[i] - j) / f[k])
            out[j, i] = acc
    return out


def primitive_grad_cases(seed):
    """Yield (name, f, inputs) gradient-check cases over random shapes.

    Each f reduces its op output to a scalar through a fixed random
    projection so every output element carries gradient signal.
    """
    rng = np.random.default_rng(seed)

    def proj(t):
        # fixed non-uniform projection so repeated calls of f are identical
        w = nc.Tensor(np.cos(np.arange(t.size, dtype=float)).reshape(t.shape) + 0.5)
        return nc.tensor_sum(nc.mul(t, w))

    cases = []

    for shape_a, shape_b in [((3, 4), (3, 4)), ((3, 4), (4,)), ((2, 1, 3), (4, 1))]:
        a, b = rand_tensor(rng, shape_a), rand_tensor(rng, shape_b)
        cases.append(("add", lambda a, b: proj(nc.add(a, b)), [a, b]))
        a, b = rand_tensor(rng, shape_a), rand_tensor(rng, shape_b)
        cases.append(("sub", lambda a, b: proj(nc.sub(a, b)), [a, b]))
        a, b = rand_tensor(rng, shape_a), rand_tensor(rng, shape_b)
        cases.append(("mul", lambda a, b: proj(nc.mul(a, b)), [a, b]))
        a = rand_tensor(rng, shape_a)
        b = rand_tensor(rng, shape_b, scale=0.5, offset=2.0)
        cases.append(("div", lambda a, b: proj(nc.div(a, b)), [a, b]))

    for name, op, scale, offset in [
        ("neg", nc.neg, 1.0, 0.0),
        ("tanh", nc.tanh, 1.0, 0.0),
        ("sigmoid", nc.sigmoid, 1.0, 0.0),
        ("exp", nc.exp, 0.5, 0.0),
        ("sin", nc.sin, 2.0, 0.0),
        ("cos", nc.cos, 2.0, 0.0),
        ("softplus", nc.softplus, 2.0, 0.0),
        ("square", nc.square, 1.0, 0.0),
        ("absolute", nc.absolute, 0.5, 2.0),
    ]:
        for shape in [(5,), (3, 4)]:
            x = rand_tensor(rng, shape, scale=scale, offset=offset)
            cases.append((name, lambda x, op=op: proj(op(x)), [x]))

    for shape_a, shape_b in [((2, 3), (3, 4)), ((5, 2), (2, 2))]:
        a, b = rand_tensor(rng, shape_a), rand_tensor(rng, shape_b)
        cases.append(("matmul", lambda a, b: proj(nc.matmul(a, b)), [a, b]))

    x = rand_tensor(rng, (3, 5))
    cases.append(("transpose", lambda x: proj(nc.transpose(x)), [x]))
    x = rand_tensor(rng, (3, 4))
    cases.append(("reshape", lambda x: proj(nc.reshape(x, (2, 6))), [x]))
    x = rand_tensor(rng, (7,))
    cases.append(("cumsum", lambda x: proj(nc.cumsum(x)), [x]))

    a, b = rand_tensor(rng, (2, 3)), rand_tensor(rng, (4, 3))
    cases.append(("concat0", lambda a, b: proj(nc.concat([a, b], axis=0)), [a, b]))
    a, b = rand_tensor(rng, (3, 2)), rand_tensor(rng, (3, 5))
    cases.append(("concat1", lambda a, b: proj(nc.concat([a, b], axis=1)), [a, b]))

    x = rand_tensor(rng, (6, 3))
    cases.append(("slice_rows", lambda x: proj(nc.slice_rows(x, 1, 4)), [x]))
    x = rand_tensor(rng, (3, 6))
    cases.append(("slice_cols", lambda x: proj(nc.slice_cols(x, 2, 5)), [x]))
    x = rand_tensor(rng, (4, 3))
    cases.append(("pad_rows", lambda x: proj(nc.pad_rows(x, 2, 1)), [x]))

    x = rand_tensor(rng, (3, 4))
    cases.append(("sum_all", lambda x: nc.tensor_sum(x), [x]))
    x = rand_tensor(rng, (3, 4))
    cases.append(("sum_axis0", lambda x: proj(nc.tensor_sum(x, axis=0)), [x]))
    x = rand_tensor(rng, (3, 4))
    cases.append(("mean_axis1", lambda x: proj(nc.tensor_mean(x, axis=1)), [x]))
    xs = [rand_tensor(rng, (2, 3)) for _ in range(3)]
    cases.append(("add_n", lambda *xs: proj(nc.add_n(list(xs))), xs))

    x, W, b = rand_tensor(rng, (4, 3)), rand_tensor(rng, (3, 5)), rand_tensor(rng, (5,))
    cases.append(("dense", lambda x, W, b: proj(nc.dense(x, W, b)), [x, W, b]))
    x = rand_tensor(rng, (6, 2))
    K = rand_tensor(rng, (3, 2, 4), scale=0.5)
    b = rand_tensor(rng, (4,))
    cases.append(("conv1d", lambda x, K, b: proj(nc.conv1d(x, K, b)), [x, K, b]))
    a, g = rand_tensor(rng, (4, 3)), rand_tensor(rng, (4, 3))
    cases.append(("gated", lambda a, g: proj(nc.gated_activation(a, g)), [a, g]))
    x = rand_tensor(rng, (7, 3))
    cases.append(("avg_pool", lambda x: proj(nc.avg_pool1d(x)), [x]))
    x = rand_tensor(rng, (4, 3))
    cases.append(("upsample", lambda x: proj(nc.upsample_nearest(x, 7)), [x]))

    E = rand_tensor(rng, (5, 4))
    ids = np.array([1, 3, 1, 0])
    cases.append(("embedding", lambda E: proj(nc.embedding(ids, E)), [E]))

    A = rand_tensor(rng, (4, 5), scale=0.3, offset=1.0)
    cases.append(("row_normalize", lambda A: proj(nc.row_normalize(A)), [A]))

    x = rand_tensor(rng, (5, 4))
    cases.append(
        ("dropout", lambda x: proj(nc.dropout(x, 0.4, training=True, seed=99)), [x])
    )

    return cases
