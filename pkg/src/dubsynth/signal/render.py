"""Parametric synthetic-speech rendering: harmonic source + formant shaping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import Waveform
from .spectrogram import FrameConfig

RENDER_F0_MIN_HZ = 60.0
RENDER_F0_MAX_HZ = 480.0
CLEAN_PEAK = 0.45
EDGE_FADE_S = 0.010
PARAM_SMOOTH_S = 0.006
MAX_HARMONICS = 60

# Vowel-like inventory: symbol -> (first formant Hz, second formant Hz).
# Deliberately small; just enough spectral variety to make text conditioning
# observable without any real linguistics.
PHONEME_FORMANTS_HZ = {
    "aa": (730, 1090), "ae": (660, 1720), "ah": (640, 1190), "ao": (570, 840),
    "aw": (700, 1220), "ax": (500, 1500), "eh": (530, 1840), "er": (490, 1350),
    "ey": (480, 2100), "ih": (390, 1990), "iy": (270, 2290), "oh": (500, 900),
    "ow": (450, 1000), "oy": (520, 1250), "uh": (440, 1020), "uw": (300, 870),
    "el": (420, 1300), "ar": (680, 1300), "or": (530, 950), "ur": (420, 1150),
}

PHONEMES = tuple(sorted(PHONEME_FORMANTS_HZ))


@dataclass(frozen=True)
class SpeakerTimbre:
    """Per-speaker source/filter parameters."""

    formant_scale: float = 1.0
    tilt: float = 0.8  # harmonic roll-off exponent; higher is darker

    def __post_init__(self):
        if not (0.5 <= self.formant_scale <= 1.6):
            raise ValueError("formant_scale out of supported range [0.5, 1.6]")


@dataclass(frozen=True)
class SyntheticUtteranceSpec:
    """Ground-truth recipe for one rendered utterance."""

    phonemes: tuple[str, ...]
    durations_s: tuple[float, ...]
    pitch_contour_hz: np.ndarray  # one value per speech frame
    energy_contour: np.ndarray  # one value per speech frame, in (0, 1]
    timbre: SpeakerTimbre = field(default_factory=SpeakerTimbre)
    archetype: str = "flat"
    snr_db: float = 100.0
    noise_color: str = "pink"
    noise_seed: int = 0
    silence_s: float = 0.05

    def __post_init__(self):
        if len(self.phonemes) == 0:
            raise ValueError("spec must contain at least one phoneme segment")
        if len(self.phonemes) != len(self.durations_s):
            raise ValueError("phonemes and durations_s must have equal length")
        unknown = [p for p in self.phonemes if p not in PHONEME_FORMANTS_HZ]
        if unknown:
            raise ValueError(f"unknown phonemes: {unknown}")
        if any(d <= 0 for d in self.durations_s):
            raise ValueError("durations must be positive")
        pitch = np.asarray(self.pitch_contour_hz, dtype=np.float64)
        energy = np.asarray(self.energy_contour, dtype=np.float64)
        if pitch.ndim != 1 or energy.shape != pitch.shape:
            raise ValueError("pitch and energy contours must be 1-D arrays of equal length")
        if np.any(pitch < RENDER_F0_MIN_HZ) or np.any(pitch > RENDER_F0_MAX_HZ):
            raise ValueError(
                f"pitch contour must stay within [{RENDER_F0_MIN_HZ}, {RENDER_F0_MAX_HZ}] Hz"
            )
        if np.any(energy <= 0):
            raise ValueError("energy contour must be positive")
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.noise_color not in ("white", "pink"):
            raise ValueError(f"unknown noise color: {self.noise_color}")
        object.__setattr__(self, "phonemes", tuple(self.phonemes))
        object.__setattr__(self, "durations_s", tuple(float(d) for d in self.durations_s))
        object.__setattr__(self, "pitch_contour_hz", pitch)
        object.__setattr__(self, "energy_contour", energy)

    def frames_per_phoneme(self, frame_shift_s: float) -> np.ndarray:
        frames = np.maximum(1, np.round(np.array(self.durations_s) / frame_shift_s)).astype(int)
        return frames

    @property
    def total_frames(self) -> int:
        return self.pitch_contour_hz.size


def _formant_envelope(freqs_hz: np.ndarray, f1: np.ndarray, f2: np.ndarray,
                      scale: float) -> np.ndarray:
    b1, b2 = 110.0 * scale, 170.0 * scale
    env = (1.0 * np.exp(-0.5 * ((freqs_hz - f1) / b1) ** 2)
           + 0.7 * np.exp(-0.5 * ((freqs_hz - f2) / b2) ** 2)
           + 0.06)
    return env


def _smooth(values: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return values
    kernel = np.ones(width) / width
    padded = np.pad(values, (width // 2, width - 1 - width // 2), mode="edge")
    return np.convolve(padded, kernel, mode="valid")


def _colored_noise(n: int, color: str, rng: np.random.Generator) -> np.ndarray:
    white = rng.standard_normal(n)
    if color == "white":
        return white
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    shaping = np.ones_like(freqs)
    nonzero = freqs > 0
    shaping[nonzero] = 1.0 / np.sqrt(freqs[nonzero] / freqs[nonzero][0])
    spectrum *= shaping
    pink = np.fft.irfft(spectrum, n=n)
    return pink / (np.std(pink) + 1e-12)


def render_synthetic_utterance(spec: SyntheticUtteranceSpec,
                               sample_rate_hz: int = 16000,
                               cfg: FrameConfig | None = None,
                               ) -> tuple[Waveform, Waveform]:
    """Render (clean, noise) tracks; noise power is set so that
    snr_db(clean, noise) equals spec.snr_db by construction."""
    cfg = cfg or FrameConfig()
    sr = sample_rate_hz
    hop = cfg.hop(sr)
    frames = spec.frames_per_phoneme(cfg.frame_shift_s)
    total_frames = int(frames.sum())
    if total_frames != spec.total_frames:
        raise ValueError(
            f"pitch contour has {spec.total_frames} frames but durations imply {total_frames}"
        )

    speech_len = total_frames * hop
    silence_len = int(round(spec.silence_s * sr))
    centers = (np.arange(total_frames) + 0.5) * hop
    t = np.arange(speech_len)
    f0 = np.interp(t, centers, spec.pitch_contour_hz)
    energy = np.interp(t, centers, spec.energy_contour)

    # Piecewise-constant formant tracks, smoothed to avoid segment clicks.
    seg_samples = np.repeat(np.arange(len(spec.phonemes)), frames * hop)
    f1_by_ph = np.array([PHONEME_FORMANTS_HZ[p][0] for p in spec.phonemes], dtype=np.float64)
    f2_by_ph = np.array([PHONEME_FORMANTS_HZ[p][1] for p in spec.phonemes], dtype=np.float64)
    scale = spec.timbre.formant_scale
    width = max(1, int(round(PARAM_SMOOTH_S * sr)))
    f1 = _smooth(f1_by_ph[seg_samples] * scale, width)
    f2 = _smooth(f2_by_ph[seg_samples] * scale, width)

    phase = 2.0 * np.pi * np.cumsum(f0) / sr
    nyq_limit = 0.95 * sr / 2.0
    max_k = min(MAX_HARMONICS, int(nyq_limit / float(np.min(f0))))
    speech = np.zeros(speech_len)
    for k in range(1, max_k + 1):
        fk = k * f0
        amp = _formant_envelope(fk, f1, f2, scale) * k ** (-spec.timbre.tilt)
        amp = np.where(fk < nyq_limit, amp, 0.0)
        speech += amp * np.sin(k * phase)

    fade = max(2, int(round(EDGE_FADE_S * sr)))
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade) / fade)
    envelope = np.ones(speech_len)
    envelope[:fade] = ramp
    envelope[-fade:] = ramp[::-1]
    speech *= energy * envelope

    clean = np.zeros(speech_len + 2 * silence_len)
    clean[silence_len : silence_len + speech_len] = speech
    peak = np.max(np.abs(clean))
    if peak > 0:
        clean *= CLEAN_PEAK / peak

    rng = np.random.default_rng(spec.noise_seed)
    noise = _colored_noise(clean.size, spec.noise_color, rng)
    clean_rms = np.sqrt(np.mean(clean**2))
    noise_rms = np.sqrt(np.mean(noise**2))
    target_noise_rms = clean_rms * 10.0 ** (-spec.snr_db / 20.0)
    noise *= target_noise_rms / (noise_rms + 1e-30)

    return Waveform(clean, sr), Waveform(noise, sr)
