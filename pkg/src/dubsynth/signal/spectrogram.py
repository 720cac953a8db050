"""Short-time magnitude spectrograms (linear and mel)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import Waveform

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_FRAME_LENGTH_S = 0.025
DEFAULT_FRAME_SHIFT_S = 0.010
DEFAULT_N_FFT = 1024
DEFAULT_N_MELS = 80


@dataclass(frozen=True)
class FrameConfig:
    """Short-time analysis parameters shared by spectrogram and F0 code."""

    frame_length_s: float = DEFAULT_FRAME_LENGTH_S
    frame_shift_s: float = DEFAULT_FRAME_SHIFT_S
    n_fft: int = DEFAULT_N_FFT
    n_mels: int = DEFAULT_N_MELS
    mel_fmin_hz: float = 0.0
    mel_fmax_hz: float | None = None

    def __post_init__(self):
        if self.frame_length_s < self.frame_shift_s:
            raise ValueError("frame_length_s must be >= frame_shift_s")
        if self.frame_shift_s <= 0:
            raise ValueError("frame_shift_s must be positive")

    def frame_length(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_length_s * sample_rate_hz))

    def hop(self, sample_rate_hz: int) -> int:
        return max(1, int(round(self.frame_shift_s * sample_rate_hz)))

    def num_frames(self, n_samples: int, sample_rate_hz: int) -> int:
        return 1 + (n_samples - 1) // self.hop(sample_rate_hz)


@dataclass(frozen=True)
class Spectrogram:
    """frames x bins matrix of non-negative magnitudes."""

    magnitudes: np.ndarray
    frame_shift_s: float
    frame_length_s: float
    kind: str

    def __post_init__(self):
        mags = np.asarray(self.magnitudes, dtype=np.float64)
        if mags.ndim != 2 or mags.shape[0] < 1:
            raise ValueError("magnitudes must be a frames x bins matrix with >= 1 frame")
        if not np.all(np.isfinite(mags)):
            raise ValueError("magnitudes contain non-finite entries")
        if np.any(mags < 0):
            raise ValueError("magnitudes must be non-negative")
        if self.kind not in ("linear", "mel"):
            raise ValueError(f"unknown spectrogram kind: {self.kind}")
        object.__setattr__(self, "magnitudes", mags)

    @property
    def num_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def num_bins(self) -> int:
        return self.magnitudes.shape[1]


def hz_to_mel(f: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m: np.ndarray | float) -> np.ndarray | float:
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate_hz: int,
                   fmin_hz: float = 0.0, fmax_hz: float | None = None) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft // 2 + 1)."""
    if fmax_hz is None:
        fmax_hz = sample_rate_hz / 2.0
    mel_points = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate_hz)

    fb = np.zeros((n_mels, bin_freqs.size))
    for i in range(n_mels):
        left, center, right = hz_points[i], hz_points[i + 1], hz_points[i + 2]
        up = (bin_freqs - left) / max(center - left, 1e-9)
        down = (right - bin_freqs) / max(right - center, 1e-9)
        fb[i] = np.maximum(0.0, np.minimum(up, down))
    return fb


def frame_signal(samples: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    """Centered framing: the signal is zero-padded by frame_length // 2."""
    half = frame_length // 2
    padded = np.pad(samples, (half, half))
    num_frames = 1 + (samples.size - 1) // hop
    frames = np.empty((num_frames, frame_length))
    for i in range(num_frames):
        start = i * hop
        frames[i] = padded[start : start + frame_length]
    return frames


def compute_spectrogram(w: Waveform, cfg: FrameConfig | None = None,
                        kind: str = "linear") -> Spectrogram:
    """Short-time magnitude spectrogram with centered Hann-windowed frames."""
    cfg = cfg or FrameConfig()
    frame_length = cfg.frame_length(w.sample_rate_hz)
    hop = cfg.hop(w.sample_rate_hz)
    if len(w) < frame_length:
        raise ValueError(
            f"waveform of {len(w)} samples is shorter than one frame ({frame_length} samples)"
        )
    if cfg.n_fft < frame_length:
        raise ValueError("n_fft must be >= frame length in samples")

    frames = frame_signal(w.samples, frame_length, hop)
    window = np.hanning(frame_length)
    mags = np.abs(np.fft.rfft(frames * window, n=cfg.n_fft, axis=1))

    if kind == "mel":
        fb = mel_filterbank(cfg.n_mels, cfg.n_fft, w.sample_rate_hz,
                            cfg.mel_fmin_hz, cfg.mel_fmax_hz)
        mags = mags @ fb.T
    elif kind != "linear":
        raise ValueError(f"unknown spectrogram kind: {kind}")

    return Spectrogram(mags, cfg.frame_shift_s, cfg.frame_length_s, kind)
