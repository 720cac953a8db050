"""Synthetic corpus: generation, manifests, denoising, clean augmentation."""

from .augment import RecordSampler, augment_with_clean, sampling_weights
from .denoise import DENOISE_MODES, denoise, denoise_record
from .generate import ARCHETYPES, CorpusConfig, archetype_contour, generate_corpus, split_counts
from .manifest import GroundTruth, Manifest, Utterance, config_digest

__all__ = [
    "ARCHETYPES",
    "CorpusConfig",
    "DENOISE_MODES",
    "GroundTruth",
    "Manifest",
    "RecordSampler",
    "Utterance",
    "archetype_contour",
    "augment_with_clean",
    "config_digest",
    "denoise",
    "denoise_record",
    "generate_corpus",
    "sampling_weights",
    "split_counts",
]
