"""The prosody-transfer network and its submodules."""

from .config import ModelConfig
from .net import VARIANTS, ConditioningBundle, ProsodyTransferModel
from .reference import GaussianEmbedding, ReferenceEncoder

__all__ = [
    "ConditioningBundle",
    "GaussianEmbedding",
    "ModelConfig",
    "ProsodyTransferModel",
    "ReferenceEncoder",
    "VARIANTS",
]
