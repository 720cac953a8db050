"""Synthesis pipelines over a frozen model."""

from .batch import BatchDubResult, batch_dub
from .synthesizer import (
    MODES,
    SynthesisRequest,
    SynthesisResult,
    Synthesizer,
    compute_speaker_centroid,
)

__all__ = [
    "BatchDubResult",
    "MODES",
    "SynthesisRequest",
    "SynthesisResult",
    "Synthesizer",
    "batch_dub",
    "compute_speaker_centroid",
]
