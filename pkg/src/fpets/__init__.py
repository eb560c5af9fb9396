"""fpets: fully-parallel text-to-speech acoustic model with trainable
position-encoding alignment."""

__version__ = "0.1.0"
