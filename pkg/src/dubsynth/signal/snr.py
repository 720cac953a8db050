"""Signal-to-noise ratio between a denoised stream and its residual."""

from __future__ import annotations

import numpy as np

from .audio import Waveform

SNR_CAP_DB = 100.0
POWER_FLOOR = 1e-12


def snr_db(denoised: Waveform, residual: Waveform) -> float:
    """10 * log10(power ratio), capped at +/-100 dB for silent streams."""
    if len(denoised) != len(residual):
        raise ValueError(
            f"length mismatch: denoised has {len(denoised)} samples, "
            f"residual has {len(residual)}"
        )
    if denoised.sample_rate_hz != residual.sample_rate_hz:
        raise ValueError("sample rate mismatch between denoised and residual")
    p_signal = float(np.mean(denoised.samples**2))
    p_noise = float(np.mean(residual.samples**2))
    if p_noise < POWER_FLOOR:
        return SNR_CAP_DB
    if p_signal < POWER_FLOOR:
        return -SNR_CAP_DB
    return float(10.0 * np.log10(p_signal / p_noise))
