"""Waveform container and 16-bit PCM WAV file I/O."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

PCM16_SCALE = 32767.0


@dataclass(frozen=True)
class Waveform:
    """Mono audio: float samples (nominal range [-1, 1]) plus sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("waveform must be a non-empty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples**2)))

    def scaled(self, gain: float) -> "Waveform":
        return Waveform(self.samples * gain, self.sample_rate_hz)


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Snap float samples to the 16-bit PCM grid (stays in float)."""
    clipped = np.clip(samples, -1.0, 1.0)
    return np.round(clipped * PCM16_SCALE) / PCM16_SCALE


def write_wav(path: str | os.PathLike, w: Waveform) -> None:
    """Write a waveform as mono 16-bit PCM RIFF."""
    ints = np.round(np.clip(w.samples, -1.0, 1.0) * PCM16_SCALE).astype(np.int16)
    wavfile.write(os.fspath(path), w.sample_rate_hz, ints)


def read_wav(path: str | os.PathLike) -> Waveform:
    """Read a mono 16-bit PCM RIFF file."""
    rate, data = wavfile.read(os.fspath(path))
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got shape {data.shape}")
    if data.dtype != np.int16:
        raise ValueError(f"{path}: expected 16-bit PCM, got dtype {data.dtype}")
    return Waveform(data.astype(np.float64) / PCM16_SCALE, int(rate))


def rms_normalized(w: Waveform, target_rms: float) -> Waveform:
    """Scale to the given RMS; silence is returned unchanged."""
    current = w.rms()
    if current < 1e-12:
        return w
    return w.scaled(target_rms / current)
