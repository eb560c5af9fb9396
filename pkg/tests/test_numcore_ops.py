import numpy as np
import pytest

from fpets import numcore as nc
from fpets.errors import (
    ConfigError,
    DegenerateAttentionError,
    EmbeddingIndexError,
    ShapeError,
)
from helpers import naive_conv1d, naive_dense


class TestExactMatmul:
    def test_matches_naive_loop_bitwise_f64(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n, k, m = rng.integers(1, 9, size=3)
            a = rng.standard_normal((n, k))
            b = rng.standard_normal((k, m))
            got = nc.exact_matmul(a, b)
            want = nc.naive_matmul(a, b)
            assert np.array_equal(got, want)

    def test_matches_naive_loop_bitwise_f32(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 7)).astype(np.float32)
        b = rng.standard_normal((7, 5)).astype(np.float32)
        assert np.array_equal(nc.exact_matmul(a, b), nc.naive_matmul(a, b))

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 2\)"):
            nc.exact_matmul(np.zeros((2, 3)), np.zeros((4, 2)))


class TestDense:
    def test_identity_weights(self):
        y = nc.dense(nc.Tensor([[1.0, 2.0]]), nc.Tensor(np.eye(2)), nc.Tensor([0.0, 0.0]))
        assert np.array_equal(y.data, [[1.0, 2.0]])

    def test_zero_weights_pass_bias(self):
        y = nc.dense(nc.Tensor([[1.0, 2.0]]), nc.Tensor(np.zeros((2, 2))), nc.Tensor([3.0, 4.0]))
        assert np.array_equal(y.data, [[3.0, 4.0]])

    def test_random_matches_triple_loop_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 3))
        W = rng.standard_normal((3, 2))
        b = rng.standard_normal(2)
        y = nc.dense(nc.Tensor(x), nc.Tensor(W), nc.Tensor(b))
        assert np.array_equal(y.data, naive_dense(x, W, b))

    def test_larger_random_bitwise(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((9, 17))
        W = rng.standard_normal((17, 11))
        y = nc.dense(nc.Tensor(x), nc.Tensor(W))
        assert np.array_equal(y.data, naive_dense(x, W))

    def test_shape_error(self):
        with pytest.raises(ShapeError, match=r"\(1, 2\).*\(3, 4\)"):
            nc.dense(nc.Tensor([[1.0, 2.0]]), nc.Tensor(np.zeros((3, 4))))


class TestConv1d:
    def test_delta_kernel_is_identity(self):
        x = nc.Tensor([[1.0], [2.0], [3.0]])
        K = nc.Tensor(np.array([0.0, 1.0, 0.0]).reshape(3, 1, 1))
        y = nc.conv1d(x, K)
        assert np.array_equal(y.data, [[1.0], [2.0], [3.0]])

    def test_box_kernel_with_zero_padding(self):
        x = nc.Tensor([[1.0], [2.0], [3.0]])
        K = nc.Tensor(np.ones((3, 1, 1)))
        y = nc.conv1d(x, K, nc.Tensor([0.0]))
        assert np.array_equal(y.data, [[3.0], [6.0], [5.0]])

    def test_single_frame_padding_only_neighborhood(self):
        x = nc.Tensor([[5.0]])
        K = nc.Tensor(np.ones((3, 1, 1)))
        y = nc.conv1d(x, K)
        assert np.array_equal(y.data, [[5.0]])

    def test_even_kernel_rejected(self):
        with pytest.raises(ConfigError, match="odd"):
            nc.conv1d(nc.Tensor(np.zeros((4, 2))), nc.Tensor(np.zeros((2, 2, 3))))

    def test_random_multichannel_matches_naive_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            T = int(rng.integers(1, 9))
            cin = int(rng.integers(1, 4))
            cout = int(rng.integers(1, 5))
            k = int(rng.choice([1, 3, 5]))
            x = rng.standard_normal((T, cin))
            K = rng.standard_normal((k, cin, cout))
            b = rng.standard_normal(cout)
            y = nc.conv1d(nc.Tensor(x), nc.Tensor(K), nc.Tensor(b))
            assert np.array_equal(y.data, naive_conv1d(x, K, b))

    def test_output_length_equals_input_length(self):
        rng = np.random.default_rng(5)
        for T in [1, 2, 3, 10, 33]:
            x = nc.Tensor(rng.standard_normal((T, 2)))
            K = nc.Tensor(rng.standard_normal((5, 2, 3)))
            assert nc.conv1d(x, K).shape == (T, 3)


class TestGatedActivation:
    def test_zero_inputs_give_zero(self):
        out = nc.gated_activation(nc.Tensor(np.zeros((2, 2))), nc.Tensor(np.zeros((2, 2))))
        assert np.array_equal(out.data, np.zeros((2, 2)))

    def test_saturation_limits(self):
        out = nc.gated_activation(nc.Tensor([[50.0]]), nc.Tensor([[50.0]]))
        assert out.data[0, 0] == pytest.approx(1.0, abs=1e-9)

    def test_scalar_evaluation(self):
        out = nc.gated_activation(nc.Tensor([[1.0]]), nc.Tensor([[0.0]]))
        assert out.data[0, 0] == pytest.approx(np.tanh(1.0) * 0.5, abs=1e-12)
        assert out.data[0, 0] == pytest.approx(0.3808, abs=5e-5)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError, match=r"\(2, 2\).*\(2, 3\)"):
            nc.gated_activation(nc.Tensor(np.zeros((2, 2))), nc.Tensor(np.zeros((2, 3))))


class TestAvgPool:
    def test_pairwise_means(self):
        x = nc.Tensor(np.array([1.0, 3.0, 5.0, 7.0]).reshape(4, 1))
        assert np.array_equal(nc.avg_pool1d(x).data, [[2.0], [6.0]])

    def test_singleton(self):
        assert np.array_equal(nc.avg_pool1d(nc.Tensor([[4.0]])).data, [[4.0]])

    def test_odd_tail_averaged_with_itself(self):
        x = nc.Tensor(np.array([1.0, 2.0, 3.0]).reshape(3, 1))
        assert np.array_equal(nc.avg_pool1d(x).data, [[1.5], [3.0]])

    def test_length_law(self):
        rng = np.random.default_rng(6)
        for T in range(1, 20):
            x = nc.Tensor(rng.standard_normal((T, 3)))
            assert nc.avg_pool1d(x).shape == ((T + 1) // 2, 3)


class TestUpsampleNearest:
    def test_repeat_even(self):
        x = nc.Tensor(np.array([2.0, 6.0]).reshape(2, 1))
        assert np.array_equal(nc.upsample_nearest(x, 4).data, [[2.0], [2.0], [6.0], [6.0]])

    def test_target_one(self):
        assert np.array_equal(nc.upsample_nearest(nc.Tensor([[4.0]]), 1).data, [[4.0]])

    def test_truncation_rule(self):
        x = nc.Tensor(np.array([1.5, 3.0]).reshape(2, 1))
        assert np.array_equal(nc.upsample_nearest(x, 3).data, [[1.5], [1.5], [3.0]])

    def test_target_out_of_range(self):
        with pytest.raises(ShapeError, match="out of range"):
            nc.upsample_nearest(nc.Tensor(np.zeros((3, 1))), 8)

    def test_pool_then_upsample_restores_length(self):
        rng = np.random.default_rng(7)
        for T in range(1, 34):
            x = nc.Tensor(rng.standard_normal((T, 2)))
            restored = nc.upsample_nearest(nc.avg_pool1d(x), T)
            assert restored.shape == x.shape


class TestEmbedding:
    def test_single_row(self):
        E = nc.Tensor([[1.0, 2.0], [3.0, 4.0]])
        out = nc.embedding(np.array([0]), E)
        assert np.array_equal(out.data, [[1.0, 2.0]])

    def test_duplicate_rows_accumulate_gradients(self):
        E = nc.Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        with nc.Tape() as tape:
            out = nc.embedding(np.array([1, 1]), E)
            loss = nc.tensor_sum(out)
        tape.backward(loss)
        assert np.array_equal(E.grad, [[0.0, 0.0], [2.0, 2.0]])

    def test_random_gather_matches_loop_oracle(self):
        rng = np.random.default_rng(8)
        E = rng.standard_normal((7, 4))
        ids = rng.integers(0, 7, size=11)
        out = nc.embedding(ids, nc.Tensor(E))
        want = np.stack([E[i] for i in ids])
        assert np.array_equal(out.data, want)

    def test_out_of_range_reports_position(self):
        E = nc.Tensor(np.zeros((3, 2)))
        with pytest.raises(EmbeddingIndexError, match="position 2"):
            nc.embedding(np.array([0, 1, 7]), E)


class TestRowNormalize:
    def test_simple_row(self):
        out = nc.row_normalize(nc.Tensor([[1.0, 3.0]]))
        assert np.allclose(out.data, [[0.25, 0.75]], atol=1e-15)

    def test_uniform_row(self):
        out = nc.row_normalize(nc.Tensor([[2.0, 2.0, 2.0, 2.0]]))
        assert np.allclose(out.data, 0.25, atol=1e-15)

    def test_negative_entries_admitted(self):
        out = nc.row_normalize(nc.Tensor([[-1.0, 3.0]]))
        assert np.allclose(out.data, [[-0.5, 1.5]], atol=1e-15)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(9)
        A = nc.Tensor(rng.standard_normal((20, 6)) + 1.0)
        out = nc.row_normalize(A)
        assert np.all(np.abs(out.data.sum(axis=1) - 1.0) < 1e-6)

    def test_degenerate_row_reports_index(self):
        A = nc.Tensor([[1.0, 2.0], [0.5, -0.5]])
        with pytest.raises(DegenerateAttentionError, match="row 1"):
            nc.row_normalize(A)


class TestDropout:
    def test_p_zero_identity(self):
        x = nc.Tensor([[1.0, 2.0]])
        assert nc.dropout(x, 0.0, training=True, seed=0) is x

    def test_inference_identity(self):
        x = nc.Tensor([[1.0, 2.0]])
        assert nc.dropout(x, 0.9, training=False, seed=0) is x

    def test_monte_carlo_mean(self):
        rng = np.random.default_rng(10)
        x = nc.Tensor(rng.uniform(0.5, 1.5, size=(4,)))
        trials = 10_000
        acc = np.zeros(4)
        for i in range(trials):
            acc += nc.dropout(x, 0.5, training=True, seed=i).data
        mean = acc / trials
        # survivor indicator has variance p(1-p); scaled by x/(1-p)
        sigma = x.data * np.sqrt(0.5 * 0.5) / 0.5 / np.sqrt(trials)
        assert np.all(np.abs(mean - x.data) < 3.0 * sigma)

    def test_p_one_rejected(self):
        with pytest.raises(ConfigError, match="p must be"):
            nc.dropout(nc.Tensor([1.0]), 1.0, training=True, seed=0)

    def test_deterministic_under_fixed_seed(self):
        x = nc.Tensor(np.arange(12.0).reshape(3, 4))
        a = nc.dropout(x, 0.3, training=True, seed=42).data
        b = nc.dropout(x, 0.3, training=True, seed=42).data
        assert np.array_equal(a, b)

    def test_survivors_scaled(self):
        x = nc.Tensor(np.ones((8, 8)))
        out = nc.dropout(x, 0.25, training=True, seed=5).data
        kept = out[out != 0.0]
        assert np.allclose(kept, 1.0 / 0.75)
