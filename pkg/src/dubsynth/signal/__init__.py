"""Deterministic DSP primitives: spectrograms, F0, SNR, synthetic rendering."""

from .audio import Waveform, read_wav, write_wav, quantize_pcm16, rms_normalized
from .pitch import F0Contour, estimate_f0
from .render import (
    PHONEMES,
    PHONEME_FORMANTS_HZ,
    SpeakerTimbre,
    SyntheticUtteranceSpec,
    render_synthetic_utterance,
)
from .snr import snr_db
from .spectrogram import FrameConfig, Spectrogram, compute_spectrogram, mel_filterbank

__all__ = [
    "F0Contour",
    "FrameConfig",
    "PHONEMES",
    "PHONEME_FORMANTS_HZ",
    "SpeakerTimbre",
    "Spectrogram",
    "SyntheticUtteranceSpec",
    "Waveform",
    "compute_spectrogram",
    "estimate_f0",
    "mel_filterbank",
    "quantize_pcm16",
    "read_wav",
    "render_synthetic_utterance",
    "rms_normalized",
    "snr_db",
    "write_wav",
]
