"""Two-stage training: Adam steps, report stream, checkpointing, determinism."""

from __future__ import annotations

import time
from collections import OrderedDict
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..errors import TrainingDiverged, UsageError
from ..nnmodel import FpetsModel
from .corpus import Batch, Utterance
from .losses import acoustic_loss, alignment_loss, total_loss

REPORT_HEADER = "step,stage,loss_acou,loss_align,loss,ms_per_step"


class TrainReportWriter:
    """Append-only CSV stream of per-step losses and timing."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.exists() or self.path.stat().st_size == 0:
            self.path.write_text(REPORT_HEADER + "\n", encoding="utf-8")

    def write(self, step: int, stage: int, loss_acou: float, loss_align: float, loss: float, ms: float) -> None:
        row = f"{step},{stage},{float(loss_acou)!r},{float(loss_align)!r},{float(loss)!r},{ms:.3f}\n"
        with self.path.open("a", encoding="utf-8") as f:
            f.write(row)


def _sample_batch(corpus: list[Utterance], batch_size: int, rng: np.random.Generator) -> list[Utterance]:
    replace = len(corpus) < batch_size
    idx = rng.choice(len(corpus), size=batch_size, replace=replace)
    return [corpus[int(i)] for i in idx]


def _opt_entries(opt: nc.Adam) -> "OrderedDict[str, np.ndarray]":
    entries: "OrderedDict[str, np.ndarray]" = OrderedDict()
    entries["t"] = np.array([float(opt.state.t)])
    for name, m in opt.state.m.items():
        entries[f"m.{name}"] = m
    for name, v in opt.state.v.items():
        entries[f"v.{name}"] = v
    return entries


def _restore_opt(opt: nc.Adam, entries: dict) -> None:
    if "t" in entries:
        opt.state.t = int(entries["t"][0])
    for name, arr in entries.items():
        if name.startswith("m."):
            opt.state.m[name[2:]] = arr.copy()
        elif name.startswith("v."):
            opt.state.v[name[2:]] = arr.copy()


def train_stage1(
    model: FpetsModel,
    corpus: list[Utterance],
    steps: int,
    batch_size: int | None = None,
    lr: float | None = None,
    seed: int = 0,
    report: TrainReportWriter | None = None,
    ckpt_path=None,
    vocab: list[str] | None = None,
    stats: tuple[float, float] | None = None,
    resume_opt: dict | None = None,
    start_step: int = 0,
) -> dict:
    """Adam on the weighted stage-1 loss; returns a summary dict."""
    if model.stage != 1:
        raise UsageError(f"train_stage1 requires a stage-1 model, got stage {model.stage}")
    cfg = model.config
    batch_size = batch_size or cfg.batch_size
    lr = lr if lr is not None else cfg.learning_rate
    rng = np.random.default_rng(seed)
    model.drops.reset(seed)
    opt = nc.Adam(model.stage_parameters(1), lr=lr)
    if resume_opt:
        _restore_opt(opt, resume_opt)
    first_loss = last_loss = None
    for step in range(start_step + 1, start_step + steps + 1):
        t0 = time.perf_counter()
        items = _sample_batch(corpus, batch_size, rng)
        batch = Batch.from_items(items)
        acou_vals, align_vals, item_losses = [], [], []
        with nc.Tape() as tape:
            for b, u in enumerate(items):
                ids = batch.phonemes[b, : batch.t_p[b]]
                t_a = batch.t_a[b]
                target = batch.features[b, :t_a]
                mask = batch.frame_mask[b, :t_a]
                pred, r, _ = model.stage1_forward(ids, t_a, train=True)
                la = acoustic_loss(pred, target, mask)
                lal = alignment_loss(r, t_a, cfg.align_loss_gamma)
                item_losses.append(total_loss(la, lal, cfg.align_loss_weight))
                acou_vals.append(float(la.data))
                align_vals.append(float(lal.data))
            loss = nc.div(nc.add_n(item_losses), float(len(item_losses)))
            loss_val = float(loss.data)
            if not np.isfinite(loss_val):
                raise TrainingDiverged(f"stage 1 step {step}: loss is {loss_val}")
            tape.backward(loss)
        opt.step()
        opt.zero_grads()
        ms = (time.perf_counter() - t0) * 1000.0
        acou_mean = float(np.mean(acou_vals))
        align_mean = float(np.mean(align_vals))
        report_loss = acou_mean + cfg.align_loss_weight * align_mean
        if report is not None:
            report.write(step, 1, acou_mean, align_mean, report_loss, ms)
        if first_loss is None:
            first_loss = report_loss
        last_loss = report_loss
    if ckpt_path is not None:
        model.save(ckpt_path, vocab=vocab, stats=stats, opt_entries=_opt_entries(opt))
    return {"first_loss": first_loss, "last_loss": last_loss, "steps": steps}


def train_stage2(
    model: FpetsModel,
    corpus: list[Utterance],
    steps: int,
    batch_size: int | None = None,
    lr: float | None = None,
    seed: int = 0,
    report: TrainReportWriter | None = None,
    ckpt_path=None,
    vocab: list[str] | None = None,
    stats: tuple[float, float] | None = None,
    resume_opt: dict | None = None,
    start_step: int = 0,
) -> dict:
    """Adam on the acoustic loss only, alignment frozen, hard attention."""
    if model.stage != 2:
        raise UsageError(f"train_stage2 requires a stage-2 model, got stage {model.stage}")
    if not model.frozen_alignment:
        raise UsageError("train_stage2 requires frozen alignment")
    cfg = model.config
    batch_size = batch_size or cfg.batch_size
    lr = lr if lr is not None else cfg.learning_rate
    rng = np.random.default_rng(seed)
    model.drops.reset(seed)
    opt = nc.Adam(model.stage_parameters(2), lr=lr)
    if resume_opt:
        _restore_opt(opt, resume_opt)
    first_loss = last_loss = None
    for step in range(start_step + 1, start_step + steps + 1):
        t0 = time.perf_counter()
        items = _sample_batch(corpus, batch_size, rng)
        batch = Batch.from_items(items)
        acou_vals, item_losses = [], []
        with nc.Tape() as tape:
            for b, u in enumerate(items):
                ids = batch.phonemes[b, : batch.t_p[b]]
                t_a = batch.t_a[b]
                target = batch.features[b, :t_a]
                mask = batch.frame_mask[b, :t_a]
                pred, _ = model.stage2_forward(ids, t_a_override=t_a, train=True)
                la = acoustic_loss(pred, target, mask)
                item_losses.append(la)
                acou_vals.append(float(la.data))
            loss = nc.div(nc.add_n(item_losses), float(len(item_losses)))
            loss_val = float(loss.data)
            if not np.isfinite(loss_val):
                raise TrainingDiverged(f"stage 2 step {step}: loss is {loss_val}")
            tape.backward(loss)
        opt.step()
        opt.zero_grads()
        ms = (time.perf_counter() - t0) * 1000.0
        acou_mean = float(np.mean(acou_vals))
        if report is not None:
            report.write(step, 2, acou_mean, 0.0, acou_mean, ms)
        if first_loss is None:
            first_loss = acou_mean
        last_loss = acou_mean
    if ckpt_path is not None:
        model.save(ckpt_path, vocab=vocab, stats=stats, opt_entries=_opt_entries(opt))
    return {"first_loss": first_loss, "last_loss": last_loss, "steps": steps}
