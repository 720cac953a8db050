"""Objective evaluation: F0 metrics, SNR reports, embedding-space analysis."""

from .compare import ComparisonReport, SystemScore, compare_systems
from .embedding import (
    EmbeddingAnalysisReport,
    collect_prosody_embeddings,
    language_clustering_score,
    project_embeddings,
)
from .f0_metrics import (
    DEFAULT_ALIGN_POINTS,
    F0Alignment,
    FlatContourError,
    InsufficientVoicingError,
    align,
    f0_mse,
    f0_pearson,
    resample_voiced,
)
from .snr_report import SnrReport, snr_report

__all__ = [
    "ComparisonReport",
    "DEFAULT_ALIGN_POINTS",
    "EmbeddingAnalysisReport",
    "F0Alignment",
    "FlatContourError",
    "InsufficientVoicingError",
    "SnrReport",
    "SystemScore",
    "align",
    "collect_prosody_embeddings",
    "compare_systems",
    "f0_mse",
    "f0_pearson",
    "language_clustering_score",
    "project_embeddings",
    "resample_voiced",
    "snr_report",
]
