"""F0 objective metrics over voiced-region-aligned contours.

Contours of different lengths are compared by resampling each signal's voiced
frames onto a fixed number of points over a normalized time axis; this choice
affects absolute MSE values and is declared in every report header."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signal.pitch import F0Contour

DEFAULT_ALIGN_POINTS = 100
MIN_VOICED_FRAMES = 5


class InsufficientVoicingError(ValueError):
    pass


class FlatContourError(ValueError):
    pass


@dataclass(frozen=True)
class F0Alignment:
    """Reference and hypothesis contours resampled to n points each."""

    reference: np.ndarray
    hypothesis: np.ndarray
    n_points: int

    def __post_init__(self):
        if self.reference.shape != (self.n_points,) or \
                self.hypothesis.shape != (self.n_points,):
            raise ValueError("aligned contours must both have n_points entries")


def resample_voiced(contour: F0Contour, n_points: int = DEFAULT_ALIGN_POINTS) -> np.ndarray:
    """Voiced-frame F0 values interpolated onto a normalized time grid."""
    values = contour.voiced_values()
    if values.size < MIN_VOICED_FRAMES:
        raise InsufficientVoicingError(
            f"contour has {values.size} voiced frames; need >= {MIN_VOICED_FRAMES}"
        )
    positions = np.flatnonzero(contour.voiced).astype(np.float64)
    axis = (positions - positions[0]) / max(positions[-1] - positions[0], 1.0)
    grid = np.linspace(0.0, 1.0, n_points)
    return np.interp(grid, axis, values)


def align(reference: F0Contour, hypothesis: F0Contour,
          n_points: int = DEFAULT_ALIGN_POINTS) -> F0Alignment:
    return F0Alignment(resample_voiced(reference, n_points),
                       resample_voiced(hypothesis, n_points), n_points)


def f0_mse(reference: F0Contour, hypothesis: F0Contour,
           n_points: int = DEFAULT_ALIGN_POINTS) -> float:
    """Mean squared F0 difference (Hz^2) over the aligned pair."""
    a = align(reference, hypothesis, n_points)
    return float(np.mean((a.reference - a.hypothesis) ** 2))


def f0_pearson(reference: F0Contour, hypothesis: F0Contour,
               n_points: int = DEFAULT_ALIGN_POINTS) -> float:
    """Pearson correlation over the aligned pair, in [-1, 1]."""
    a = align(reference, hypothesis, n_points)
    std_r, std_h = np.std(a.reference), np.std(a.hypothesis)
    if std_r < 1e-9 or std_h < 1e-9:
        raise FlatContourError("flat contour: correlation undefined at zero variance")
    r = np.corrcoef(a.reference, a.hypothesis)[0, 1]
    return float(np.clip(r, -1.0, 1.0))
