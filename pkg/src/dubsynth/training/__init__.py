"""Losses, the training loop, and checkpointing."""

from .checkpoint import (
    build_model,
    check_config_compatible,
    checkpoint_digest,
    load_checkpoint,
    restore_into,
    save_checkpoint,
)
from .data import MODEL_PHONEMES, PHONEME_TO_ID, SIL_ID, FeatureExtractor
from .losses import (
    LossBreakdown,
    MultiResolutionSTFTLoss,
    batch_kld,
    combine,
    kld_standard_normal,
    total_loss,
)
from .loop import TrainConfig, TrainResult, train

__all__ = [
    "FeatureExtractor",
    "LossBreakdown",
    "MODEL_PHONEMES",
    "MultiResolutionSTFTLoss",
    "PHONEME_TO_ID",
    "SIL_ID",
    "TrainConfig",
    "TrainResult",
    "batch_kld",
    "build_model",
    "check_config_compatible",
    "checkpoint_digest",
    "combine",
    "kld_standard_normal",
    "load_checkpoint",
    "restore_into",
    "save_checkpoint",
    "total_loss",
    "train",
]
