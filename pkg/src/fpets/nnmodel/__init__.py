"""Network assemblies: encoder, width predictor, U-shaped blocks, decoders."""

from .config import ModelConfig
from .layers import Dense, DropoutStream, GatedConvUnit, Ufans, init_uniform
from .model import FpetsModel

__all__ = [
    "Dense",
    "DropoutStream",
    "FpetsModel",
    "GatedConvUnit",
    "ModelConfig",
    "Ufans",
    "init_uniform",
]
