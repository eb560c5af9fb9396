"""The full acoustic model: encoder, width predictor, attention, decoders."""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np

from .. import numcore as nc
from ..alignment import (
    KERNEL_SINCOS,
    PositionCodec,
    attention_matrix,
    compute_positions,
    encode_frame_positions,
    encode_phoneme_positions,
    gaussian_attention_matrix,
    hard_attention,
    normalize_attention,
)
from ..errors import CheckpointError, UsageError
from ..numcore import Tensor
from ..numcore.checkpoint import bytes_from_floats, floats_from_bytes
from .config import ModelConfig
from .layers import Dense, DropoutStream, GatedConvUnit, Ufans, init_uniform

META_PREFIX = "__meta."
OPT_PREFIX = "__opt."


class FpetsModel:
    """Two-stage text-to-features model.

    Stage 1 trains the alignment path end to end through the soft attention
    matrix with a light convolutional decoder.  Stage 2 freezes alignment,
    switches to hard one-hot attention plus a relative-position feature, and
    trains the U-shaped decoder.  Synthesis is a single pass: no generated
    frame ever feeds back into any input.
    """

    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        c = config

        self.encoder_embed = Tensor(
            init_uniform(rng, (c.vocab_size, c.embedding_dim), c.embedding_dim),
            requires_grad=True,
            name="encoder.embed.table",
        )
        self.encoder_in = Dense(rng, c.embedding_dim, c.hidden, "encoder.inproj")
        self.encoder_convs = [
            GatedConvUnit(rng, c.hidden, c.encoder_filter, c.encoder_kernel, c.dropout, f"encoder.conv{i}")
            for i in range(c.encoder_layers)
        ]
        self.encoder_out = Dense(rng, c.hidden, c.hidden, "encoder.out")

        self.align_embed = Tensor(
            init_uniform(rng, (c.vocab_size, c.embedding_dim), c.embedding_dim),
            requires_grad=True,
            name="align.embed.table",
        )
        self.align_in = Dense(rng, c.embedding_dim, c.hidden, "align.inproj")
        self.align_ufans = Ufans(
            rng, c.hidden, c.align_filter, c.align_kernel, c.align_ufans_depth, c.dropout, "align.ufans"
        )
        self.align_head = Dense(rng, c.hidden, 1, "align.head")
        # bias so initial widths sit near the prior instead of near the floor
        prior = c.width_prior_frames - c.width_floor
        self.align_head.b.data[:] = math.log(math.expm1(prior))

        # Frequencies only enter the graph through the sine-cosine kernel; the
        # Gaussian kernel scores from positions alone, so marking them
        # trainable there would hand the optimizer a parameter that can never
        # receive a gradient.
        self.codec = PositionCodec.geometric(
            length=c.codec_length,
            f_min=c.codec_f_min,
            f_max=c.codec_f_max,
            kernel=c.codec_kernel,
            gaussian_width=c.gaussian_width,
            trainable=c.codec_trainable and c.codec_kernel == KERNEL_SINCOS,
        )

        self.dec1_convs = [
            GatedConvUnit(rng, c.hidden, c.dec_cnn_filter, c.dec_cnn_kernel, c.dropout, f"dec1.conv{i}")
            for i in range(c.dec_cnn_layers)
        ]
        self.dec1_out = Dense(rng, c.hidden, c.feature_dim, "dec1.out")

        self.dec2_in = Dense(rng, c.hidden + 1, c.hidden, "dec2.inproj")
        self.dec2_ufans = Ufans(
            rng, c.hidden, c.dec_ufans_filter, c.dec_ufans_kernel, c.dec_ufans_depth, c.dropout, "dec2.ufans"
        )
        self.dec2_out = Dense(rng, c.hidden, c.feature_dim, "dec2.out")

        self.stage = 1
        self.frozen_alignment = False
        self.drops = DropoutStream(self.seed)
        self.counters = {
            "encoder_forwards": 0,
            "align_forwards": 0,
            "decoder1_forwards": 0,
            "decoder2_forwards": 0,
        }

    # ---- parameter registry -------------------------------------------------

    def named_parameters(self) -> "OrderedDict[str, Tensor]":
        pairs = [(self.encoder_embed.name, self.encoder_embed)]
        pairs += self.encoder_in.params()
        for u in self.encoder_convs:
            pairs += u.params()
        pairs += self.encoder_out.params()
        pairs.append((self.align_embed.name, self.align_embed))
        pairs += self.align_in.params()
        pairs += self.align_ufans.params()
        pairs += self.align_head.params()
        pairs.append(("codec.freqs", self.codec.frequencies))
        for u in self.dec1_convs:
            pairs += u.params()
        pairs += self.dec1_out.params()
        pairs += self.dec2_in.params()
        pairs += self.dec2_ufans.params()
        pairs += self.dec2_out.params()
        out = OrderedDict()
        for name, p in pairs:
            if name in out:
                raise UsageError(f"duplicate parameter name {name!r}")
            out[name] = p
        return out

    def trainable_parameters(self) -> list[tuple[str, Tensor]]:
        return [(n, p) for n, p in self.named_parameters().items() if p.requires_grad]

    def stage_parameters(self, stage: int) -> list[tuple[str, Tensor]]:
        """Trainable parameters that participate in the given stage's loss."""
        if stage == 1:
            skip = ("dec2.",)
        elif stage == 2:
            skip = ("dec1.",)
        else:
            raise UsageError(f"stage must be 1 or 2, got {stage}")
        return [
            (n, p) for n, p in self.trainable_parameters() if not n.startswith(skip)
        ]

    def alignment_parameter_names(self) -> list[str]:
        return [
            n
            for n in self.named_parameters()
            if n.startswith("align.") or n == "codec.freqs"
        ]

    # ---- stage control ------------------------------------------------------

    def freeze_alignment(self) -> None:
        params = self.named_parameters()
        for name in self.alignment_parameter_names():
            params[name].requires_grad = False
        self.frozen_alignment = True

    def set_stage(self, stage: int) -> None:
        if stage not in (1, 2):
            raise UsageError(f"stage must be 1 or 2, got {stage}")
        self.stage = stage
        if stage == 2:
            self.freeze_alignment()

    # ---- forwards -----------------------------------------------------------

    def encoder_forward(self, phoneme_ids: np.ndarray, train: bool = False) -> Tensor:
        self.counters["encoder_forwards"] += 1
        drops = self.drops if train else None
        x = nc.embedding(np.asarray(phoneme_ids), self.encoder_embed)
        x = self.encoder_in(x)
        for unit in self.encoder_convs:
            x = unit(x, train, drops)
        return self.encoder_out(x)

    def predict_alignment_widths(self, phoneme_ids: np.ndarray, train: bool = False) -> Tensor:
        self.counters["align_forwards"] += 1
        drops = self.drops if train else None
        x = nc.embedding(np.asarray(phoneme_ids), self.align_embed)
        x = self.align_in(x)
        x = self.align_ufans(x, train, drops)
        h = self.align_head(x)  # (T_p, 1)
        flat = nc.reshape(h, (h.shape[0],))
        return nc.add(nc.softplus(flat), self.config.width_floor)

    def soft_attention(self, r: Tensor, t_a: int) -> Tensor:
        """Normalized soft attention (T_a x T_p) from widths r."""
        s = compute_positions(r)
        if self.codec.kernel == KERNEL_SINCOS:
            p_enc = encode_phoneme_positions(s, self.codec)
            f_enc = encode_frame_positions(t_a, self.codec)
            scores = attention_matrix(f_enc, p_enc)
        else:
            scores = gaussian_attention_matrix(s, t_a, self.codec.gaussian_width)
        return normalize_attention(scores)

    def stage1_forward(
        self, phoneme_ids: np.ndarray, t_a: int, train: bool = False
    ) -> tuple[Tensor, Tensor, Tensor]:
        """Returns (predicted features T_a x D, widths r, soft attention)."""
        if self.stage != 1:
            raise UsageError(f"stage1_forward requires stage 1, model is in stage {self.stage}")
        h = self.encoder_forward(phoneme_ids, train)
        r = self.predict_alignment_widths(phoneme_ids, train)
        soft = self.soft_attention(r, t_a)
        context = nc.matmul(soft, h)
        self.counters["decoder1_forwards"] += 1
        drops = self.drops if train else None
        x = context
        for unit in self.dec1_convs:
            x = unit(x, train, drops)
        pred = self.dec1_out(x)
        return pred, r, soft

    def inference_alignment(
        self, phoneme_ids: np.ndarray, t_a_override: int | None = None
    ) -> dict:
        """Hard alignment without gradient flow, usable from any stage.

        Returns widths r, frame count t_a (override or round(sum r) clamped
        to >= 1), the one-hot attention, positions s, and the per-phoneme
        relative-position scalars d (d_0 = s_0, d_i = s_i - s_{i-1})."""
        with nc.no_grad():
            r = self.predict_alignment_widths(phoneme_ids, train=False)
            r_vals = r.data.copy()
            t_a = int(t_a_override) if t_a_override is not None else max(1, int(round(r_vals.sum())))
            s = compute_positions(r)
            if self.codec.kernel == KERNEL_SINCOS:
                p_enc = encode_phoneme_positions(s, self.codec)
                f_enc = encode_frame_positions(t_a, self.codec)
                scores = attention_matrix(f_enc, p_enc)
            else:
                scores = gaussian_attention_matrix(s, t_a, self.codec.gaussian_width)
            a_hard = hard_attention(scores)
            s_vals = s.data.copy()
        d_vals = s_vals - np.concatenate([[0.0], s_vals[:-1]])  # d_0 = s_0
        return {
            "r": r_vals,
            "t_a": t_a,
            "hard_attention": a_hard.data,
            "positions": s_vals,
            "relative_position": d_vals,
        }

    def stage2_forward(
        self,
        phoneme_ids: np.ndarray,
        t_a_override: int | None = None,
        train: bool = False,
    ) -> tuple[Tensor, dict]:
        """Returns (predicted features T_a x D, info dict).

        Widths are predicted without gradient flow; frame count comes from
        the override (training, to match targets) or round(sum r) clamped to
        at least 1 (inference).  The decoder consumes hard attention context
        plus the per-phoneme relative-position scalar broadcast to frames.
        """
        if self.stage != 2:
            raise UsageError(f"stage2_forward requires stage 2, model is in stage {self.stage}")
        if not self.frozen_alignment:
            raise UsageError("stage 2 requires frozen alignment")
        info = self.inference_alignment(phoneme_ids, t_a_override)
        t_a = info["t_a"]
        a_hard = Tensor(info["hard_attention"])
        d_vals = info["relative_position"]
        rel = Tensor((a_hard.data @ d_vals).reshape(t_a, 1))

        h = self.encoder_forward(phoneme_ids, train)
        context = nc.matmul(a_hard, h)
        self.counters["decoder2_forwards"] += 1
        drops = self.drops if train else None
        x = nc.concat([context, rel], axis=1)
        x = self.dec2_in(x)
        x = self.dec2_ufans(x, train, drops)
        pred = self.dec2_out(x)
        return pred, info

    # ---- persistence --------------------------------------------------------

    def save(
        self,
        path,
        vocab: list[str] | None = None,
        stats: tuple[float, float] | None = None,
        opt_entries: "OrderedDict[str, np.ndarray] | None" = None,
    ) -> None:
        entries: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for name, p in self.named_parameters().items():
            entries[name] = p.data
        entries[META_PREFIX + "stage"] = np.array([float(self.stage)])
        entries[META_PREFIX + "config"] = floats_from_bytes(self.config.to_text().encode("utf-8"))
        if vocab is not None:
            entries[META_PREFIX + "vocab"] = floats_from_bytes("\n".join(vocab).encode("utf-8"))
        if stats is not None:
            entries[META_PREFIX + "stats"] = np.array([float(stats[0]), float(stats[1])])
        if opt_entries:
            for name, arr in opt_entries.items():
                entries[OPT_PREFIX + name] = arr
        nc.write_checkpoint(path, entries)

    @classmethod
    def load(cls, path) -> tuple["FpetsModel", dict]:
        entries = nc.read_checkpoint(path)
        if META_PREFIX + "config" not in entries:
            raise CheckpointError("checkpoint lacks a config entry")
        config_text = bytes_from_floats(entries[META_PREFIX + "config"]).decode("utf-8")
        config = ModelConfig.from_text(config_text)
        model = cls(config, seed=0)
        params = model.named_parameters()
        stored = {
            n: a for n, a in entries.items() if not n.startswith((META_PREFIX, OPT_PREFIX))
        }
        missing = sorted(set(params) - set(stored))
        extra = sorted(set(stored) - set(params))
        if missing or extra:
            raise CheckpointError(
                f"parameter name mismatch: missing {missing[:3]}, unexpected {extra[:3]}"
            )
        for name, p in params.items():
            arr = stored[name]
            if arr.shape != p.data.shape:
                raise CheckpointError(
                    f"parameter {name!r} has shape {arr.shape}, expected {p.data.shape}"
                )
            p.data = arr.copy()
        meta = {
            "stage": int(entries[META_PREFIX + "stage"][0]),
            "config_text": config_text,
            "vocab": None,
            "stats": None,
            "opt_entries": OrderedDict(
                (n[len(OPT_PREFIX):], a) for n, a in entries.items() if n.startswith(OPT_PREFIX)
            ),
        }
        if META_PREFIX + "vocab" in entries:
            meta["vocab"] = bytes_from_floats(entries[META_PREFIX + "vocab"]).decode("utf-8").split("\n")
        if META_PREFIX + "stats" in entries:
            lo, hi = entries[META_PREFIX + "stats"]
            meta["stats"] = (float(lo), float(hi))
        model.set_stage(meta["stage"])
        return model, meta
