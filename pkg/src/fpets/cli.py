"""Command-line entry point: prepare, train, synthesize, evaluate, bench, export."""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import audiofeat as af
from . import numcore as nc
from .alignment import attention_to_csv, attention_to_pgm
from .errors import FpetsError, UsageError
from .nnmodel import FpetsModel, ModelConfig
from .training import (
    TrainReportWriter,
    classify_frames,
    evaluate_alignment,
    evaluate_ground_truth_baseline,
    generate_synthetic_corpus,
    load_corpus_cache,
    load_manifest,
    load_vocab,
    phoneme_symbol,
    train_stage1,
    train_stage2,
    write_corpus_cache,
    write_manifest,
    write_vocab,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpets", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="extract or generate features into a cache")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--manifest", help="manifest file (id|PH1 PH2|audio path per line)")
    p.add_argument("--vocab", help="vocabulary file, one symbol per line")
    p.add_argument("--audio-root", help="base directory for audio paths")
    p.add_argument("--synthetic", type=int, help="generate N synthetic items instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphabet-size", type=int, default=12)
    p.add_argument("--duration-min", type=int, default=5)
    p.add_argument("--duration-max", type=int, default=9)
    p.add_argument("--feature-kind", choices=("linear", "mel"), default="linear")
    p.add_argument("--fft-size", type=int, default=64)
    p.add_argument("--hop", type=int, default=16)
    p.add_argument("--sample-rate", type=int, default=8000)
    p.add_argument("--n-mel", type=int, default=80)

    for name in ("train-stage1", "train-stage2"):
        p = sub.add_parser(name, help=f"run {name.replace('-', ' ')}")
        p.add_argument("--data", required=True, help="corpus cache from prepare")
        p.add_argument("--steps", type=int, required=True)
        p.add_argument("--ckpt-out", required=True)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--batch-size", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--report", help="TrainReport CSV path (default: beside checkpoint)")
        p.add_argument("--resume", help="checkpoint to continue from")
        if name == "train-stage1":
            p.add_argument("--codec-kernel", choices=("sincos", "gaussian"))
            p.add_argument("--codec-trainable", choices=("true", "false"))
            p.add_argument("--hidden", type=int)
        else:
            p.add_argument("--init", help="stage-1 checkpoint to start from")
            p.add_argument("--reinit-encoder", action="store_true",
                           help="reinitialize the encoder instead of warm-starting")

    p = sub.add_parser("synth", help="synthesize a waveform from phonemes")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--phonemes", required=True, help='space-separated symbols, e.g. "P01 P04"')
    p.add_argument("--out", required=True, help="output WAV path")
    p.add_argument("--features-out", help="optional CSV dump of predicted features")
    p.add_argument("--gl-iterations", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval-align", help="alignment quality against true durations")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--csv-out", help="write the per-phoneme table as CSV")
    p.add_argument("--baseline", action="store_true",
                   help="also report the ground-truth-durations baseline")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bench", help="latency of parallel synthesis vs a frame-looped simulator")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--phoneme-lengths", default="10,50,100,200")
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--csv-out")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("export-attention", help="write soft/hard attention CSVs and PGMs")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--phonemes", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--seed", type=int, default=0)
    return parser


# ---- command bodies ---------------------------------------------------------


def cmd_prepare(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.synthetic is None and args.manifest is None:
        raise UsageError("prepare needs --synthetic N or --manifest PATH")
    if args.synthetic is not None:
        feature_dim = args.fft_size // 2 + 1 if args.feature_kind == "linear" else args.n_mel
        corpus = generate_synthetic_corpus(
            args.synthetic,
            seed=args.seed,
            alphabet_size=args.alphabet_size,
            duration_range=(args.duration_min, args.duration_max),
            feature_dim=feature_dim,
        )
        vocab = [phoneme_symbol(v) for v in range(args.alphabet_size)]
    else:
        if args.vocab is None:
            raise UsageError("prepare --manifest also needs --vocab")
        if not Path(args.manifest).exists():
            raise UsageError(f"manifest not found: {args.manifest}")
        vocab = load_vocab(args.vocab)
        corpus = load_manifest(
            args.manifest,
            vocab,
            audio_root=args.audio_root,
            feature_kind=args.feature_kind,
            fft_size=args.fft_size,
            hop=args.hop,
            n_mel=args.n_mel,
        )
    stats = af.FeatureStats.from_frames([u.features for u in corpus])
    for u in corpus:
        u.features = af.normalize(u.features, stats)
    geometry = {
        "feature_dim": corpus[0].features.shape[1] if corpus else 0,
        "fft_size": args.fft_size,
        "hop": args.hop,
        "sample_rate": args.sample_rate,
        "kind_flag": 0 if args.feature_kind == "linear" else 1,
        "n_mel": args.n_mel,
    }
    cache_path = out / "cache.bin"
    buf = io.BytesIO()
    write_corpus_cache(buf, corpus, stats, vocab, geometry)
    payload = buf.getvalue()
    if cache_path.exists() and cache_path.read_bytes() == payload:
        print(f"prepare: cache already up to date at {cache_path} ({len(corpus)} items)")
        return 0
    cache_path.write_bytes(payload)
    write_vocab(out / "vocab.txt", vocab)
    write_manifest(out / "manifest.txt", corpus, vocab)
    print(f"prepare: wrote {len(corpus)} items to {cache_path}")
    return 0


def _config_from_args(args, vocab_size: int, geometry: dict) -> ModelConfig:
    if args.config:
        cfg = ModelConfig.from_text(Path(args.config).read_text(encoding="utf-8"))
    else:
        cfg = ModelConfig(
            vocab_size=vocab_size,
            feature_dim=geometry["feature_dim"],
            feature_kind="linear" if geometry["kind_flag"] == 0 else "mel",
            fft_size=geometry["fft_size"],
            hop=geometry["hop"],
            sample_rate=geometry["sample_rate"],
            n_mel=geometry["n_mel"],
        )
    over = {}
    if getattr(args, "hidden", None):
        over["hidden"] = args.hidden
    if getattr(args, "codec_kernel", None):
        over["codec_kernel"] = args.codec_kernel
    if getattr(args, "codec_trainable", None):
        over["codec_trainable"] = args.codec_trainable == "true"
    if args.batch_size:
        over["batch_size"] = args.batch_size
    if args.lr:
        over["learning_rate"] = args.lr
    return cfg.with_overrides(**over) if over else cfg


def cmd_train_stage1(args) -> int:
    corpus, stats, vocab, geometry = load_corpus_cache(args.data)
    report_path = args.report or str(Path(args.ckpt_out).with_suffix(".report.csv"))
    resume_opt = None
    start_step = 0
    if args.resume:
        model, meta = FpetsModel.load(args.resume)
        if meta["stage"] != 1:
            raise UsageError(f"--resume expects a stage-1 checkpoint, got stage {meta['stage']}")
        resume_opt = meta["opt_entries"]
        if "t" in resume_opt:
            start_step = int(resume_opt["t"][0])
    else:
        cfg = _config_from_args(args, len(vocab), geometry)
        model = FpetsModel(cfg, seed=args.seed)
    report = TrainReportWriter(report_path)
    res = train_stage1(
        model,
        corpus,
        steps=args.steps,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        report=report,
        ckpt_path=args.ckpt_out,
        vocab=vocab,
        stats=(stats.lo, stats.hi),
        resume_opt=resume_opt,
        start_step=start_step,
    )
    if args.steps == 0:
        print(f"train-stage1: wrote initial checkpoint to {args.ckpt_out} (0 steps)")
    else:
        print(
            f"train-stage1: {args.steps} steps, loss {res['first_loss']:.6f} -> {res['last_loss']:.6f}, "
            f"checkpoint {args.ckpt_out}"
        )
    return 0


def cmd_train_stage2(args) -> int:
    corpus, stats, vocab, geometry = load_corpus_cache(args.data)
    report_path = args.report or str(Path(args.ckpt_out).with_suffix(".report.csv"))
    resume_opt = None
    start_step = 0
    if args.resume:
        model, meta = FpetsModel.load(args.resume)
        if meta["stage"] != 2:
            raise UsageError(f"--resume expects a stage-2 checkpoint, got stage {meta['stage']}")
        resume_opt = meta["opt_entries"]
        if "t" in resume_opt:
            start_step = int(resume_opt["t"][0])
    else:
        if not args.init:
            raise UsageError("train-stage2 requires --init STAGE1_CKPT (or --resume)")
        model, meta = FpetsModel.load(args.init)
        if meta["stage"] != 1:
            raise UsageError(f"--init expects a stage-1 checkpoint, got stage {meta['stage']}")
        if args.reinit_encoder:
            fresh = FpetsModel(model.config, seed=args.seed + 1)
            fresh_params = fresh.named_parameters()
            for name, p in model.named_parameters().items():
                if name.startswith("encoder."):
                    p.data = fresh_params[name].data.copy()
        model.set_stage(2)
    report = TrainReportWriter(report_path)
    res = train_stage2(
        model,
        corpus,
        steps=args.steps,
        batch_size=args.batch_size,
        lr=args.lr,
        seed=args.seed,
        report=report,
        ckpt_path=args.ckpt_out,
        vocab=vocab,
        stats=(stats.lo, stats.hi),
        resume_opt=resume_opt,
        start_step=start_step,
    )
    if args.steps == 0:
        print(f"train-stage2: wrote initial checkpoint to {args.ckpt_out} (0 steps)")
    else:
        print(
            f"train-stage2: {args.steps} steps, loss {res['first_loss']:.6f} -> {res['last_loss']:.6f}, "
            f"checkpoint {args.ckpt_out}"
        )
    return 0


def _ids_from_symbols(text: str, vocab: list[str]) -> np.ndarray:
    index = {sym: i for i, sym in enumerate(vocab)}
    ids = []
    for tok in text.split():
        if tok not in index:
            raise UsageError(f"unknown phoneme symbol {tok!r} (vocabulary has {len(vocab)} symbols)")
        ids.append(index[tok])
    if not ids:
        raise UsageError("empty phoneme sequence")
    return np.array(ids, dtype=np.int64)


def _features_to_magnitude(feats: np.ndarray, model: FpetsModel, stats) -> np.ndarray:
    """Denormalize predicted features and return a linear magnitude spectrogram."""
    cfg = model.config
    log_frames = af.denormalize(feats, stats)
    if cfg.feature_kind == "mel":
        fb = af.mel_filterbank(cfg.n_mel, cfg.fft_size, cfg.sample_rate)
        power = np.exp(log_frames)
        return af.mel_power_to_linear_magnitude(power, fb)
    return np.exp(log_frames)


def cmd_synth(args) -> int:
    model, meta = FpetsModel.load(args.ckpt)
    if meta["stage"] != 2:
        raise UsageError(f"synth requires a stage-2 checkpoint, got stage {meta['stage']}")
    if meta["vocab"] is None or meta["stats"] is None:
        raise UsageError("checkpoint lacks vocabulary/stats metadata; re-train with current tooling")
    ids = _ids_from_symbols(args.phonemes, meta["vocab"])
    pred, info = model.stage2_forward(ids)
    feats = pred.data
    if args.features_out:
        attention_to_csv(feats, args.features_out)
    stats = af.FeatureStats(lo=meta["stats"][0], hi=meta["stats"][1])
    mag = _features_to_magnitude(feats, model, stats)
    result = af.griffin_lim(
        mag,
        model.config.fft_size,
        model.config.hop,
        model.config.sample_rate,
        iterations=args.gl_iterations,
        seed=args.seed,
    )
    af.save_wav(result.clip, args.out)
    print(
        f"synth: {len(ids)} phonemes -> {info['t_a']} frames -> {result.clip.samples.size} samples, "
        f"final convergence {result.final_convergence:.4f}, wrote {args.out}"
    )
    return 0


def cmd_eval_align(args) -> int:
    model, meta = FpetsModel.load(args.ckpt)
    corpus, stats, vocab, geometry = load_corpus_cache(args.data)
    if not any(u.true_durations is not None for u in corpus):
        raise UsageError(f"data {args.data} has no true durations; cannot evaluate alignment")
    report = evaluate_alignment(model, corpus, vocab=vocab)
    print(report.table_text())
    if args.baseline:
        base = evaluate_ground_truth_baseline(model.codec, corpus, vocab=vocab)
        print(f"ground-truth baseline average-diff: {base.average_diff:.4f}")
    if args.csv_out:
        report.write_csv(args.csv_out)
    return 0


def cmd_bench(args) -> int:
    from .training.bench import run_bench

    lengths = [int(x) for x in args.phoneme_lengths.split(",") if x.strip()]
    if not lengths:
        raise UsageError("--phoneme-lengths needs at least one integer")
    model, meta = FpetsModel.load(args.ckpt)
    if meta["stage"] != 2:
        raise UsageError(f"bench requires a stage-2 checkpoint, got stage {meta['stage']}")
    rows = run_bench(model, lengths, repeat=args.repeat, seed=args.seed, stats=meta["stats"])
    print(f"kernel threads: {nc.kernel_thread_count()}")
    header = "T_p,T_a,fpets_ms,fpets_with_vocoder_ms,simulator_ms,decoder_forwards,simulator_forwards"
    print(header)
    lines = [header]
    for row in rows:
        line = (
            f"{row['t_p']},{row['t_a']},{row['fpets_ms']:.3f},{row['fpets_vocoder_ms']:.3f},"
            f"{row['simulator_ms']:.3f},{row['decoder_forwards']},{row['simulator_forwards']}"
        )
        print(line)
        lines.append(line)
    if args.csv_out:
        Path(args.csv_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_export_attention(args) -> int:
    model, meta = FpetsModel.load(args.ckpt)
    if meta["vocab"] is None:
        raise UsageError("checkpoint lacks vocabulary metadata")
    ids = _ids_from_symbols(args.phonemes, meta["vocab"])
    info = model.inference_alignment(ids)
    with nc.no_grad():
        r = model.predict_alignment_widths(ids)
        soft = model.soft_attention(r, info["t_a"])
    prefix = args.out_prefix
    attention_to_csv(soft.data, f"{prefix}.soft.csv")
    attention_to_csv(info["hard_attention"], f"{prefix}.hard.csv")
    attention_to_pgm(soft.data, f"{prefix}.soft.pgm")
    attention_to_pgm(info["hard_attention"], f"{prefix}.hard.pgm")
    print(f"export-attention: wrote {prefix}.{{soft,hard}}.{{csv,pgm}} ({info['t_a']} frames x {len(ids)} phonemes)")
    return 0


COMMANDS = {
    "prepare": cmd_prepare,
    "train-stage1": cmd_train_stage1,
    "train-stage2": cmd_train_stage2,
    "synth": cmd_synth,
    "eval-align": cmd_eval_align,
    "bench": cmd_bench,
    "export-attention": cmd_export_attention,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FpetsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
