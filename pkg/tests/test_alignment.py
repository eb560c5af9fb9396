import numpy as np
import pytest

from fpets import alignment as al
from fpets import numcore as nc
from fpets.errors import ConfigError, DomainError, ShapeError
from helpers import cosine_attention_oracle


class TestPositionCodec:
    def test_geometric_default_span(self):
        codec = al.PositionCodec.geometric()
        f = codec.frequencies.data
        assert f.shape == (64,)
        assert f[0] == pytest.approx(1.0)
        assert f[-1] == pytest.approx(10000.0)
        assert np.all(np.diff(f) > 0)

    def test_log_uniform_is_seeded(self):
        a = al.PositionCodec.log_uniform(16, seed=3).frequencies.data
        b = al.PositionCodec.log_uniform(16, seed=3).frequencies.data
        c = al.PositionCodec.log_uniform(16, seed=4).frequencies.data
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert np.all(a >= 1.0) and np.all(a <= 10000.0)

    def test_non_positive_frequency_rejected(self):
        with pytest.raises(DomainError, match="positive"):
            al.PositionCodec([1.0, 0.0, 3.0])

    def test_unknown_kernel_rejected(self):
        with pytest.raises(ConfigError, match="kernel"):
            al.PositionCodec([1.0], kernel="triangular")


class TestComputePositions:
    def test_hand_evaluation(self):
        s = al.compute_positions(nc.Tensor([2.0, 4.0, 2.0]))
        assert np.allclose(s.data, [1.0, 4.0, 7.0], atol=1e-12)

    def test_single_phoneme_midpoint(self):
        assert np.allclose(al.compute_positions(nc.Tensor([10.0])).data, [5.0])

    def test_constant_widths_closed_form(self):
        c, n = 3.5, 7
        s = al.compute_positions(nc.Tensor(np.full(n, c))).data
        want = c * np.arange(n) + c / 2
        assert np.allclose(s, want, atol=1e-12)

    def test_non_positive_width_rejected(self):
        with pytest.raises(DomainError, match="index 1"):
            al.compute_positions(nc.Tensor([2.0, -1.0, 3.0]))

    def test_monotone_for_positive_widths(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            r = rng.uniform(0.1, 9.0, size=rng.integers(1, 30))
            s = al.compute_positions(nc.Tensor(r)).data
            assert np.all(np.diff(s) > 0)


class TestEncodings:
    def test_zero_position_row(self):
        codec = al.PositionCodec.geometric(8)
        P = al.encode_phoneme_positions(nc.Tensor([0.0]), codec)
        assert np.allclose(P.data[0, :8], 0.0, atol=1e-15)
        assert np.allclose(P.data[0, 8:], 1.0, atol=1e-15)

    def test_range_bound(self):
        codec = al.PositionCodec.geometric(16)
        rng = np.random.default_rng(1)
        P = al.encode_phoneme_positions(nc.Tensor(rng.uniform(0, 500, 9)), codec)
        assert np.all(P.data >= -1.0) and np.all(P.data <= 1.0)

    def test_scalar_evaluation(self):
        codec = al.PositionCodec([1.0, 10.0])
        P = al.encode_phoneme_positions(nc.Tensor([3.0]), codec)
        want = [np.sin(3.0), np.sin(0.3), np.cos(3.0), np.cos(0.3)]
        assert np.allclose(P.data[0], want, atol=1e-15)

    def test_frame_row_zero(self):
        codec = al.PositionCodec.geometric(5)
        F = al.encode_frame_positions(4, codec)
        assert np.allclose(F.data[0, :5], 0.0, atol=1e-15)
        assert np.allclose(F.data[0, 5:], 1.0, atol=1e-15)

    def test_frame_encoding_pure(self):
        codec = al.PositionCodec.geometric(6)
        a = al.encode_frame_positions(7, codec).data
        b = al.encode_frame_positions(7, codec).data
        assert np.array_equal(a, b)

    def test_frame_scalar_evaluation(self):
        codec = al.PositionCodec([2.0])
        F = al.encode_frame_positions(4, codec)
        assert np.allclose(F.data[3], [np.sin(1.5), np.cos(1.5)], atol=1e-15)

    def test_gaussian_codec_has_no_sincos_encoding(self):
        codec = al.PositionCodec([1.0], kernel=al.KERNEL_GAUSSIAN)
        with pytest.raises(ConfigError, match="gaussian"):
            al.encode_phoneme_positions(nc.Tensor([1.0]), codec)


class TestAttentionMatrix:
    def test_coincident_position_is_row_maximum(self):
        codec = al.PositionCodec.geometric(16)
        s = nc.Tensor([3.0, 11.0])
        A = al.attention_matrix(
            al.encode_frame_positions(12, codec),
            al.encode_phoneme_positions(s, codec),
        )
        assert A.data[3, 0] == pytest.approx(16.0, abs=1e-9)
        assert np.argmax(A.data[3]) == 0

    def test_scalar_identity_evaluation(self):
        codec = al.PositionCodec([1.0, 10.0])
        A = al.attention_matrix(
            al.encode_frame_positions(6, codec),
            al.encode_phoneme_positions(nc.Tensor([3.0]), codec),
        )
        want = np.cos(2.0) + np.cos(0.2)
        assert A.data[5, 0] == pytest.approx(want, abs=1e-12)
        assert A.data[5, 0] == pytest.approx(0.564, abs=2e-4)

    def test_identity_against_cosine_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            L = int(rng.integers(1, 40))
            t_p = int(rng.integers(1, 12))
            t_a = int(rng.integers(1, 40))
            f = np.exp(rng.uniform(0.0, np.log(10000.0), L))
            s = np.cumsum(rng.uniform(1.0, 8.0, t_p))
            codec = al.PositionCodec(f)
            A = al.attention_matrix(
                al.encode_frame_positions(t_a, codec),
                al.encode_phoneme_positions(nc.Tensor(s), codec),
            )
            oracle = cosine_attention_oracle(s, f, t_a)
            assert np.max(np.abs(A.data - oracle)) < 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError, match=r"\(3, 4\).*\(2, 6\)"):
            al.attention_matrix(nc.Tensor(np.zeros((3, 4))), nc.Tensor(np.zeros((2, 6))))


class TestNormalization:
    def test_softmax_rows_sum_to_one_and_positive(self):
        rng = np.random.default_rng(3)
        A = nc.Tensor(rng.standard_normal((6, 4)))
        S = al.softmax_attention(A).data
        assert np.allclose(S.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(S > 0)

    def test_sum_normalization_is_row_normalize(self):
        A = nc.Tensor([[1.0, 3.0]])
        assert np.allclose(al.normalize_attention(A).data, [[0.25, 0.75]])


class TestHardAttention:
    def test_argmax_one_hot(self):
        A = al.hard_attention(nc.Tensor([[0.2, 0.9, 0.5]]))
        assert np.array_equal(A.data, [[0.0, 1.0, 0.0]])

    def test_tie_breaks_to_smallest_index(self):
        A = al.hard_attention(nc.Tensor([[0.9, 0.9]]))
        assert np.array_equal(A.data, [[1.0, 0.0]])

    def test_well_separated_positions(self):
        codec = al.PositionCodec.geometric()
        s = nc.Tensor([5.0, 15.0, 25.0])
        A = al.attention_matrix(
            al.encode_frame_positions(30, codec),
            al.encode_phoneme_positions(s, codec),
        )
        hard = al.hard_attention(A).data
        assert hard[5, 0] == 1.0
        assert hard[15, 1] == 1.0
        assert np.all(hard.sum(axis=1) == 1.0)


class TestWidthAlgebra:
    def test_hand_evaluation(self):
        w = al.attention_width_from_alignment([2.0, 4.0, 2.0])
        assert np.allclose(w, [2.5, 3.0, 2.5], atol=1e-12)
        assert w.sum() == pytest.approx(8.0, abs=1e-12)

    def test_constant_widths_fixed_point(self):
        w = al.attention_width_from_alignment(np.full(9, 4.2))
        assert np.allclose(w, 4.2, atol=1e-12)

    def test_mass_conservation(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            t_p = int(rng.integers(1, 201))
            r = rng.uniform(0.05, 20.0, t_p)
            w = al.attention_width_from_alignment(r)
            assert abs(w.sum() - r.sum()) < 1e-9

    def test_non_positive_rejected(self):
        with pytest.raises(DomainError):
            al.attention_width_from_alignment([1.0, 0.0])


class TestBruteForceWidth:
    def test_single_phoneme_takes_all_frames(self):
        codec = al.PositionCodec.geometric()
        s = al.compute_positions(nc.Tensor([10.0]))
        A = al.attention_matrix(
            al.encode_frame_positions(10, codec),
            al.encode_phoneme_positions(s, codec),
        )
        counts = al.brute_force_width(al.hard_attention(A))
        assert np.array_equal(counts, [10])

    def test_counts_sum_to_frame_count(self):
        rng = np.random.default_rng(5)
        codec = al.PositionCodec.geometric()
        r = rng.uniform(4.0, 9.0, 6)
        s = al.compute_positions(nc.Tensor(r))
        t_a = int(round(r.sum()))
        A = al.attention_matrix(
            al.encode_frame_positions(t_a, codec),
            al.encode_phoneme_positions(s, codec),
        )
        counts = al.brute_force_width(al.hard_attention(A))
        assert counts.sum() == t_a

    def test_matches_width_algebra_within_one_frame(self):
        codec = al.PositionCodec.geometric()
        r = np.array([2.0, 4.0, 2.0])
        s = al.compute_positions(nc.Tensor(r))
        A = al.attention_matrix(
            al.encode_frame_positions(8, codec),
            al.encode_phoneme_positions(s, codec),
        )
        counts = al.brute_force_width(al.hard_attention(A))
        w = al.attention_width_from_alignment(r)
        assert np.all(np.abs(counts - w) <= 1.0)

    def test_non_one_hot_rejected(self):
        with pytest.raises(DomainError, match="one-hot"):
            al.brute_force_width(np.array([[0.5, 0.5]]))


class TestGaussianKernel:
    def test_peak_at_position(self):
        A = al.gaussian_attention_matrix(nc.Tensor([3.0]), 8, sigma=2.0)
        assert A.data[3, 0] == pytest.approx(1.0, abs=1e-12)
        assert np.argmax(A.data[:, 0]) == 3

    def test_one_sigma_value(self):
        A = al.gaussian_attention_matrix(nc.Tensor([4.0]), 8, sigma=2.0)
        assert A.data[6, 0] == pytest.approx(np.exp(-0.5), abs=1e-12)
        assert A.data[6, 0] == pytest.approx(0.6065, abs=5e-5)

    def test_monotone_decay(self):
        A = al.gaussian_attention_matrix(nc.Tensor([0.0]), 12, sigma=3.0).data[:, 0]
        assert np.all(np.diff(A) < 0)

    def test_non_positive_sigma_rejected(self):
        with pytest.raises(DomainError, match="sigma"):
            al.gaussian_attention_matrix(nc.Tensor([1.0]), 4, sigma=0.0)


class TestHeavyTail:
    def test_zero_offset_gives_bank_length(self):
        codec = al.PositionCodec.geometric(64)
        assert al.heavy_tail_profile(codec, [0.0])[0] == pytest.approx(64.0, abs=1e-12)

    def test_symmetry(self):
        codec = al.PositionCodec.geometric(32)
        d = np.linspace(0.5, 120.0, 40)
        left = al.heavy_tail_profile(codec, -d)
        right = al.heavy_tail_profile(codec, d)
        assert np.max(np.abs(left - right)) < 1e-12

    def test_heavier_than_gaussian_at_offset_100(self):
        codec = al.PositionCodec.geometric(64)
        g = abs(al.heavy_tail_profile(codec, [100.0])[0]) / 64.0
        gauss = np.exp(-(100.0**2) / (2.0 * 10.0**2))
        assert g > gauss


class TestDifferentiability:
    def test_mean_soft_attention_grad_wrt_widths(self):
        # every normalized row sums to 1, so mean(A_hat) == 1/T_p identically
        # and the true gradient is 0; the tape must agree with that exactly
        codec = al.PositionCodec.geometric(16)
        r = nc.Tensor(np.array([3.0, 5.0, 4.0]))

        def f(r):
            s = al.compute_positions(r)
            A = al.attention_matrix(
                al.encode_frame_positions(12, codec),
                al.encode_phoneme_positions(s, codec),
            )
            return nc.tensor_mean(al.normalize_attention(A))

        report = nc.grad_check(f, r, tol=1e-4)
        assert report.passed, str(report)

    def test_weighted_soft_attention_grad_wrt_widths(self):
        # non-degenerate version: project A_hat through fixed weights
        codec = al.PositionCodec.geometric(16)
        r = nc.Tensor(np.array([3.0, 5.0, 4.0]))
        M = nc.Tensor(np.cos(np.arange(36.0)).reshape(12, 3) + 0.2)

        def f(r):
            s = al.compute_positions(r)
            A = al.attention_matrix(
                al.encode_frame_positions(12, codec),
                al.encode_phoneme_positions(s, codec),
            )
            return nc.tensor_mean(nc.mul(al.normalize_attention(A), M))

        report = nc.grad_check(f, r, tol=1e-4)
        assert report.passed, str(report)

    def test_grad_flows_into_trainable_frequencies(self):
        codec = al.PositionCodec.geometric(8, trainable=True)
        r = nc.Tensor([3.0, 5.0], requires_grad=True)
        M = nc.Tensor(np.sin(np.arange(16.0)).reshape(8, 2) + 0.3)
        with nc.Tape() as tape:
            s = al.compute_positions(r)
            A = al.attention_matrix(
                al.encode_frame_positions(8, codec),
                al.encode_phoneme_positions(s, codec),
            )
            loss = nc.tensor_mean(nc.mul(al.normalize_attention(A), M))
        tape.backward(loss)
        assert codec.frequencies.grad is not None
        assert np.any(codec.frequencies.grad != 0.0)
        assert r.grad is not None and np.any(r.grad != 0.0)


class TestArgmaxLocality:
    def test_frame_at_position_attends_its_phoneme(self):
        rng = np.random.default_rng(6)
        codec = al.PositionCodec.geometric()
        for _ in range(10):
            r = rng.uniform(4.0, 10.0, int(rng.integers(2, 10)))
            s = al.compute_positions(nc.Tensor(r))
            t_a = int(np.ceil(r.sum()))
            A = al.attention_matrix(
                al.encode_frame_positions(t_a, codec),
                al.encode_phoneme_positions(s, codec),
            )
            for i, si in enumerate(s.data):
                j = int(round(si))
                if j >= t_a:
                    continue
                assert np.argmax(A.data[j]) == i


class TestExport:
    def test_csv_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((5, 3))
        path = tmp_path / "att.csv"
        al.attention_to_csv(A, path)
        back = al.load_attention_csv(path)
        assert np.array_equal(back, A)

    def test_pgm_one_white_pixel_per_row_for_hard_attention(self, tmp_path):
        codec = al.PositionCodec.geometric()
        s = al.compute_positions(nc.Tensor([4.0, 6.0, 5.0]))
        A = al.attention_matrix(
            al.encode_frame_positions(15, codec),
            al.encode_phoneme_positions(s, codec),
        )
        hard = al.hard_attention(A)
        path = tmp_path / "hard.pgm"
        al.attention_to_pgm(hard, path)
        img = al.load_pgm(path)
        assert img.shape == (15, 3)
        assert np.all((img == 255).sum(axis=1) == 1)

    def test_pgm_constant_matrix(self, tmp_path):
        path = tmp_path / "const.pgm"
        al.attention_to_pgm(np.ones((2, 2)), path)
        assert np.array_equal(al.load_pgm(path), np.zeros((2, 2), dtype=np.uint8))
