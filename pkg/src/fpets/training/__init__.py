"""Losses, two-stage training, synthetic corpus, alignment evaluation."""

from .corpus import (
    Batch,
    Utterance,
    classify_frames,
    generate_synthetic_corpus,
    load_corpus_cache,
    load_manifest,
    load_vocab,
    phoneme_symbol,
    synthetic_templates,
    write_corpus_cache,
    write_manifest,
    write_vocab,
)
from .evalalign import (
    AlignmentReport,
    ItemAlignment,
    evaluate_alignment,
    evaluate_ground_truth_baseline,
    widths_from_alignment_vector,
)
from .loop import REPORT_HEADER, TrainReportWriter, train_stage1, train_stage2
from .losses import acoustic_loss, alignment_loss, total_loss

__all__ = [
    "AlignmentReport",
    "Batch",
    "ItemAlignment",
    "REPORT_HEADER",
    "TrainReportWriter",
    "Utterance",
    "acoustic_loss",
    "alignment_loss",
    "classify_frames",
    "evaluate_alignment",
    "evaluate_ground_truth_baseline",
    "generate_synthetic_corpus",
    "load_corpus_cache",
    "load_manifest",
    "load_vocab",
    "phoneme_symbol",
    "synthetic_templates",
    "total_loss",
    "train_stage1",
    "train_stage2",
    "widths_from_alignment_vector",
    "write_corpus_cache",
    "write_manifest",
    "write_vocab",
]
