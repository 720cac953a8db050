"""Autocorrelation F0 estimation with parabolic peak interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform
from .spectrogram import FrameConfig

DEFAULT_F0_MIN_HZ = 80.0
DEFAULT_F0_MAX_HZ = 400.0
DEFAULT_VOICING_THRESHOLD = 0.45
# Small per-octave preference for shorter lags, so an exactly periodic signal
# resolves to its true period rather than a multiple of it.
OCTAVE_COST = 0.01
# Voiced frames whose F0 exceeds the local voiced median by more than this
# ratio (either direction) are demoted to unvoiced; catches the octave jumps
# an onset/offset frame can produce when its window straddles the boundary.
OCTAVE_OUTLIER_RATIO = 1.2
OUTLIER_CONTEXT_FRAMES = 3
# Max energy imbalance (window vs lagged window) still treated as stationary.
ENERGY_BALANCE_RATIO = 4.0


@dataclass(frozen=True)
class F0Contour:
    """Per-frame fundamental frequency; 0 Hz encodes unvoiced frames."""

    f0_hz: np.ndarray
    voiced: np.ndarray
    frame_shift_s: float

    def __post_init__(self):
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        voiced = np.asarray(self.voiced, dtype=bool)
        if f0.shape != voiced.shape or f0.ndim != 1:
            raise ValueError("f0_hz and voiced must be 1-D arrays of equal length")
        if np.any((f0 == 0) == voiced):
            raise ValueError("f0_hz must be 0 exactly on unvoiced frames")
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "voiced", voiced)

    def __len__(self) -> int:
        return self.f0_hz.size

    @property
    def num_voiced(self) -> int:
        return int(np.count_nonzero(self.voiced))

    def voiced_values(self) -> np.ndarray:
        return self.f0_hz[self.voiced]


def _normalized_autocorrelation(segments: np.ndarray, n: int, lag_max: int
                                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized cross-correlation r[i, tau] for tau in [0, lag_max],
    plus the window energies e0[i] and lagged-window energies e_tau[i, tau]."""
    num = segments.shape[0]
    window = segments[:, :n]
    size = 1 << int(np.ceil(np.log2(segments.shape[1] + n)))
    spec_full = np.fft.rfft(segments, n=size, axis=1)
    spec_win = np.fft.rfft(window, n=size, axis=1)
    corr = np.fft.irfft(spec_full * np.conj(spec_win), n=size, axis=1)[:, : lag_max + 1]

    csum = np.zeros((num, segments.shape[1] + 1))
    np.cumsum(segments**2, axis=1, out=csum[:, 1:])
    e0 = csum[:, n] - csum[:, 0]
    taus = np.arange(lag_max + 1)
    e_tau = csum[:, taus + n] - csum[:, taus]

    denom = np.sqrt(np.maximum(e0[:, None] * e_tau, 0.0))
    r = np.zeros_like(corr)
    valid = denom > 1e-20
    r[valid] = corr[valid] / denom[valid]
    return r, e0, e_tau


def estimate_f0(w: Waveform, f0_min: float = DEFAULT_F0_MIN_HZ,
                f0_max: float = DEFAULT_F0_MAX_HZ, cfg: FrameConfig | None = None,
                voicing_threshold: float = DEFAULT_VOICING_THRESHOLD) -> F0Contour:
    """Frame-wise F0 via normalized autocorrelation over [f0_min, f0_max]."""
    if not (0 < f0_min < f0_max < w.sample_rate_hz / 2):
        raise ValueError(
            f"invalid F0 range [{f0_min}, {f0_max}] for sample rate {w.sample_rate_hz}"
        )
    cfg = cfg or FrameConfig()
    sr = w.sample_rate_hz
    hop = cfg.hop(sr)
    num_frames = cfg.num_frames(len(w), sr)

    lag_min = max(2, int(np.floor(sr / f0_max)))
    lag_max = int(np.ceil(sr / f0_min))
    n = lag_max  # correlation window: one full period of the lowest F0
    seg_len = n + lag_max + 2  # room for r[lag_max + 1], used by interpolation

    # The correlation window (first n samples of each segment) is centered on
    # the frame; lagged copies extend to the right.
    pad_left = n // 2
    padded = np.pad(w.samples, (pad_left, seg_len + hop))
    segments = np.empty((num_frames, seg_len))
    for i in range(num_frames):
        start = i * hop
        segments[i] = padded[start : start + seg_len]
    # Gate on the raw window energy, before DC removal: the segment mean is
    # taken over the lag extension too, so an all-silence window would
    # otherwise turn into a nonzero constant.
    raw_energy = np.sum(segments[:, :n] ** 2, axis=1)
    peak_energy = float(np.max(raw_energy))
    energy_gate = raw_energy > 1e-5 * peak_energy if peak_energy > 0 \
        else np.zeros(num_frames, dtype=bool)
    segments = segments - segments.mean(axis=1, keepdims=True)

    r, e0, e_tau = _normalized_autocorrelation(segments, n, lag_max + 1)

    f0 = np.zeros(num_frames)
    voiced = np.zeros(num_frames, dtype=bool)
    taus = np.arange(lag_min, lag_max + 1)
    for i in range(num_frames):
        if not energy_gate[i]:
            continue
        row = r[i]
        seg = row[lag_min : lag_max + 1]
        is_peak = (seg > row[lag_min - 1 : lag_max]) & (seg >= row[lag_min + 1 : lag_max + 2])
        peaks = np.flatnonzero(is_peak)
        if peaks.size == 0:
            continue
        tau_p = taus[peaks]
        r0, rm, rp = seg[peaks], row[tau_p - 1], row[tau_p + 1]
        # Interpolated peak heights: with a non-integer period, the sampled
        # value at the true lag undershoots while a near-integer multiple of
        # it does not, which would otherwise hand the octave below the win.
        curv = 2.0 * r0 - rm - rp
        r_interp = np.where(curv > 1e-12, r0 + (rp - rm) ** 2 / (8.0 * np.maximum(curv, 1e-12)),
                            r0)
        scores = r_interp - OCTAVE_COST * np.log2(tau_p / lag_min)
        best = int(np.argmax(scores))
        if r_interp[best] <= voicing_threshold:
            continue
        tau = int(tau_p[best])
        # Stationarity check: periodicity evidence needs comparable energy in
        # the window and its lagged copy; onset/offset straddles fail this.
        hi_e = max(e0[i], e_tau[i, tau])
        lo_e = min(e0[i], e_tau[i, tau])
        if lo_e <= 0 or hi_e / lo_e > ENERGY_BALANCE_RATIO:
            continue
        denom = row[tau - 1] - 2.0 * row[tau] + row[tau + 1]
        delta = 0.0 if abs(denom) < 1e-12 else 0.5 * (row[tau - 1] - row[tau + 1]) / denom
        delta = float(np.clip(delta, -0.5, 0.5))
        voiced[i] = True
        f0[i] = float(np.clip(sr / (tau + delta), f0_min, f0_max))

    _suppress_octave_outliers(f0, voiced)
    return F0Contour(f0, voiced, cfg.frame_shift_s)


def _suppress_octave_outliers(f0: np.ndarray, voiced: np.ndarray) -> None:
    """Demote voiced frames that jump an octave-scale away from neighbors."""
    original = f0.copy()
    for i in np.flatnonzero(voiced):
        lo = max(0, i - OUTLIER_CONTEXT_FRAMES)
        hi = min(f0.size, i + OUTLIER_CONTEXT_FRAMES + 1)
        context = original[lo:hi][voiced[lo:hi] & (original[lo:hi] > 0)]
        reference = float(np.median(context))
        if f0[i] > reference * OCTAVE_OUTLIER_RATIO or f0[i] < reference / OCTAVE_OUTLIER_RATIO:
            voiced[i] = False
            f0[i] = 0.0
