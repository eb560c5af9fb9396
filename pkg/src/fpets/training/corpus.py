"""Corpus handling: utterances, batches, synthetic data, manifests, caches."""

from __future__ import annotations

import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..audiofeat import FeatureStats, linear_log_spectrogram, load_wav, mel_spectrogram
from ..errors import ManifestError, VocabError
from ..numcore.checkpoint import bytes_from_floats, floats_from_bytes


@dataclass
class Utterance:
    id: str
    phoneme_ids: np.ndarray  # (T_p,) int
    features: np.ndarray  # (T_a, D) normalized
    true_durations: np.ndarray | None = None  # (T_p,) frames

    def __post_init__(self) -> None:
        self.phoneme_ids = np.asarray(self.phoneme_ids, dtype=np.int64)
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.true_durations is not None:
            self.true_durations = np.asarray(self.true_durations, dtype=np.float64)

    @property
    def t_p(self) -> int:
        return int(self.phoneme_ids.size)

    @property
    def t_a(self) -> int:
        return int(self.features.shape[0])


@dataclass
class Batch:
    """Padded arrays plus masks; masks are 1 exactly on real positions."""

    phonemes: np.ndarray  # (B, max_Tp) int64, zero padded
    phoneme_mask: np.ndarray  # (B, max_Tp) float64
    features: np.ndarray  # (B, max_Ta, D) float64, zero padded
    frame_mask: np.ndarray  # (B, max_Ta) float64
    t_p: list = field(default_factory=list)
    t_a: list = field(default_factory=list)

    @staticmethod
    def from_items(items: list[Utterance]) -> "Batch":
        if not items:
            raise ManifestError("cannot build a batch from zero items")
        max_tp = max(u.t_p for u in items)
        max_ta = max(u.t_a for u in items)
        d = items[0].features.shape[1]
        b = len(items)
        phonemes = np.zeros((b, max_tp), dtype=np.int64)
        pmask = np.zeros((b, max_tp))
        feats = np.zeros((b, max_ta, d))
        fmask = np.zeros((b, max_ta))
        for i, u in enumerate(items):
            phonemes[i, : u.t_p] = u.phoneme_ids
            pmask[i, : u.t_p] = 1.0
            feats[i, : u.t_a] = u.features
            fmask[i, : u.t_a] = 1.0
        return Batch(
            phonemes=phonemes,
            phoneme_mask=pmask,
            features=feats,
            frame_mask=fmask,
            t_p=[u.t_p for u in items],
            t_a=[u.t_a for u in items],
        )


# ---- synthetic corpus -------------------------------------------------------


def phoneme_symbol(v: int) -> str:
    return f"P{v:02d}"


def synthetic_templates(alphabet_size: int, feature_dim: int) -> np.ndarray:
    """One smooth spectral bump per pseudo-phoneme, centers spread over bins."""
    bins = np.arange(feature_dim, dtype=np.float64)
    templates = np.zeros((alphabet_size, feature_dim))
    for v in range(alphabet_size):
        center = 2.0 + (feature_dim - 5.0) * v / max(1, alphabet_size - 1)
        templates[v] = 0.05 + 0.9 * np.exp(-0.5 * ((bins - center) / 1.8) ** 2)
    return templates


def base_duration(v: int, duration_range: tuple[int, int]) -> int:
    """Characteristic duration for pseudo-phoneme v, cycling over the range."""
    lo, hi = duration_range
    m = hi - lo + 1
    mult = next(k for k in (5, 3, 2, 1) if math.gcd(k, m) == 1)
    return lo + (v * mult) % m


def generate_synthetic_corpus(
    n_items: int,
    seed: int,
    alphabet_size: int = 12,
    duration_range: tuple[int, int] = (5, 9),
    feature_dim: int = 33,
    noise: float = 0.01,
) -> list[Utterance]:
    """Deterministic pseudo-speech: per-phoneme templates held for known durations.

    Each pseudo-phoneme has a characteristic duration (derived from its id)
    jittered by one frame per occurrence, so durations are learnable from
    identity while still varying across items.
    """
    lo, hi = duration_range
    if lo < 3 or hi > 20 or lo > hi:
        raise ManifestError(f"duration range {duration_range} outside [3, 20]")
    templates = synthetic_templates(alphabet_size, feature_dim)
    rng = np.random.default_rng(seed)
    items = []
    for i in range(n_items):
        t_p = int(rng.integers(3, 9))
        ids = rng.integers(0, alphabet_size, size=t_p)
        durations = np.array(
            [
                np.clip(base_duration(int(v), duration_range) + rng.integers(-1, 2), 3, 20)
                for v in ids
            ],
            dtype=np.int64,
        )
        frames = np.concatenate(
            [np.tile(templates[v], (int(dur), 1)) for v, dur in zip(ids, durations)]
        )
        frames = frames + noise * rng.standard_normal(frames.shape)
        items.append(
            Utterance(
                id=f"syn-{i:04d}",
                phoneme_ids=ids,
                features=frames,
                true_durations=durations.astype(np.float64),
            )
        )
    return items


def classify_frames(features: np.ndarray, templates: np.ndarray) -> np.ndarray:
    """Nearest-template id per frame (L2)."""
    d2 = ((features[:, None, :] - templates[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


# ---- vocabulary and manifest ------------------------------------------------


def write_vocab(path, symbols: list[str]) -> None:
    Path(path).write_text("\n".join(symbols) + "\n", encoding="utf-8")


def load_vocab(path) -> list[str]:
    path = Path(path)
    if not path.exists():
        raise VocabError(f"vocabulary file not found: {path}")
    symbols = [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if len(set(symbols)) != len(symbols):
        raise VocabError(f"vocabulary file {path} has duplicate symbols")
    return symbols


def write_manifest(path, corpus: list[Utterance], vocab: list[str], audio_paths: dict | None = None) -> None:
    lines = []
    for u in corpus:
        tokens = " ".join(vocab[int(v)] for v in u.phoneme_ids)
        audio = (audio_paths or {}).get(u.id, "-")
        lines.append(f"{u.id}|{tokens}|{audio}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_manifest(
    path,
    vocab: list[str],
    audio_root=None,
    cache: dict | None = None,
    feature_kind: str = "linear",
    fft_size: int = 64,
    hop: int = 16,
    n_mel: int = 80,
    stats: FeatureStats | None = None,
) -> list[Utterance]:
    """Parse "id|PH1 PH2 ...|audio path" lines into utterances.

    Features come from the cache when the id is present there; otherwise the
    audio file is loaded and featurized.  A path of "-" means cache-only.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    index = {sym: i for i, sym in enumerate(vocab)}
    text = path.read_text(encoding="utf-8")
    items: list[Utterance] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 3:
            raise ManifestError(f"manifest line {lineno}: expected 'id|phonemes|path', got {raw!r}")
        utt_id, tokens, audio = (p.strip() for p in parts)
        ids = []
        for tok in tokens.split():
            if tok not in index:
                raise VocabError(f"manifest line {lineno}: unknown phoneme symbol {tok!r}")
            ids.append(index[tok])
        if not ids:
            raise ManifestError(f"manifest line {lineno}: empty phoneme sequence")
        if cache is not None and utt_id in cache:
            feats, durations = cache[utt_id]
        elif audio != "-":
            wav_path = Path(audio_root or path.parent) / audio
            if not wav_path.exists():
                raise ManifestError(f"manifest line {lineno}: missing audio file {wav_path}")
            clip = load_wav(wav_path)
            if feature_kind == "mel":
                feats = mel_spectrogram(clip, n_mel, fft_size, hop, stats=stats).frames
            else:
                feats = linear_log_spectrogram(clip, fft_size, hop, stats=stats).frames
            durations = None
        else:
            raise ManifestError(
                f"manifest line {lineno}: no cached features and no audio path for {utt_id!r}"
            )
        items.append(Utterance(id=utt_id, phoneme_ids=np.array(ids), features=feats, true_durations=durations))
    if not items:
        warnings.warn(f"manifest {path} is empty", stacklevel=2)
    return items


# ---- feature cache ----------------------------------------------------------

_GEOMETRY_KEYS = ("feature_dim", "fft_size", "hop", "sample_rate", "kind_flag", "n_mel")


def write_corpus_cache(
    path,
    corpus: list[Utterance],
    stats: FeatureStats,
    vocab: list[str],
    geometry: dict,
) -> None:
    entries: "OrderedDict[str, np.ndarray]" = OrderedDict()
    entries["__meta.vocab"] = floats_from_bytes("\n".join(vocab).encode("utf-8"))
    entries["__meta.stats"] = np.array([stats.lo, stats.hi])
    entries["__meta.geometry"] = np.array([float(geometry[k]) for k in _GEOMETRY_KEYS])
    for u in corpus:
        entries[f"item.{u.id}.ids"] = u.phoneme_ids.astype(np.float64)
        entries[f"item.{u.id}.features"] = u.features
        if u.true_durations is not None:
            entries[f"item.{u.id}.durations"] = u.true_durations
    nc.write_checkpoint(path, entries)


def load_corpus_cache(path) -> tuple[list[Utterance], FeatureStats, list[str], dict]:
    entries = nc.read_checkpoint(path)
    if "__meta.vocab" not in entries or "__meta.stats" not in entries:
        raise ManifestError(f"{path} is not a corpus cache (missing metadata entries)")
    vocab = bytes_from_floats(entries["__meta.vocab"]).decode("utf-8").split("\n")
    lo, hi = entries["__meta.stats"]
    stats = FeatureStats(lo=float(lo), hi=float(hi))
    geometry = dict(zip(_GEOMETRY_KEYS, (float(x) for x in entries["__meta.geometry"])))
    for k in ("feature_dim", "fft_size", "hop", "sample_rate", "kind_flag", "n_mel"):
        geometry[k] = int(geometry[k])
    items: dict[str, dict] = {}
    for name, arr in entries.items():
        if not name.startswith("item."):
            continue
        utt_id, _, kind = name[len("item."):].rpartition(".")
        items.setdefault(utt_id, {})[kind] = arr
    corpus = []
    for utt_id in sorted(items):
        rec = items[utt_id]
        if "ids" not in rec or "features" not in rec:
            raise ManifestError(f"cache entry for {utt_id!r} is incomplete")
        corpus.append(
            Utterance(
                id=utt_id,
                phoneme_ids=rec["ids"].astype(np.int64),
                features=rec["features"],
                true_durations=rec.get("durations"),
            )
        )
    return corpus, stats, vocab, geometry
