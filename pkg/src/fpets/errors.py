"""Exception taxonomy for the fpets package.

Every error raised on purpose derives from FpetsError so callers (and the
CLI) can tell deliberate failures from genuine bugs.
"""


class FpetsError(Exception):
    """Base class for all deliberate fpets failures."""


class UsageError(FpetsError):
    """Caller misuse: bad flags, bad invocation order, missing inputs."""


class ShapeError(FpetsError):
    """Operands with incompatible extents. Message names both shapes."""


class ConfigError(FpetsError):
    """Invalid configuration value (even kernel width, bad dropout rate, ...)."""


class DomainError(FpetsError):
    """Value outside its mathematical domain (non-positive width, sigma <= 0)."""


class DegenerateAttentionError(FpetsError):
    """An attention row summed to ~0 and cannot be normalized."""


class EmbeddingIndexError(FpetsError):
    """A phoneme id fell outside the embedding table."""


class CheckpointError(FpetsError):
    """Unreadable, corrupt, or incompatible checkpoint container."""


class ManifestError(FpetsError):
    """Malformed corpus manifest. Message carries the offending line number."""


class VocabError(FpetsError):
    """Unknown phoneme symbol."""


class AudioError(FpetsError):
    """Unsupported or corrupt audio input."""


class TrainingDiverged(FpetsError):
    """Loss became non-finite during optimization."""
