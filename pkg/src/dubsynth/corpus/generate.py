"""Synthetic multilingual corpus generation with 85:5:10 splits."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..signal.audio import Waveform, quantize_pcm16, write_wav
from ..signal.render import PHONEMES, SpeakerTimbre, SyntheticUtteranceSpec, render_synthetic_utterance
from ..signal.spectrogram import FrameConfig
from .manifest import GroundTruth, Manifest, Utterance, config_digest

SPLIT_RATIOS = (0.85, 0.05, 0.10)

# Contour families. Each pseudo-locale favors one family but every family
# occurs in every locale, so prosody is correlated with, not determined by,
# the language label.
ARCHETYPES = ("rise", "fall", "peak", "dip", "level")


@dataclass(frozen=True)
class CorpusConfig:
    """Generator knobs; defaults give the smallest corpus where centroid
    baselines and clustering statistics are still meaningful."""

    num_languages: int = 5
    speakers_per_language: int = 2
    num_utterances: int = 300
    snr_range_db: tuple[float, float] = (15.0, 40.0)
    clean: bool = False  # render without noise and flag records is_clean
    sample_rate_hz: int = 16000
    frame_length_s: float = 0.025
    frame_shift_s: float = 0.010
    n_fft: int = 1024
    n_mels: int = 80
    phonemes_per_utterance: tuple[int, int] = (3, 7)
    phoneme_frames: tuple[int, int] = (8, 22)
    base_f0_range_hz: tuple[float, float] = (115.0, 270.0)
    archetype_dominance: float = 0.3
    noise_color: str = "pink"
    silence_s: float = 0.05
    speaker_prefix: str = "spk"
    id_prefix: str = "utt"

    def frame_config(self) -> FrameConfig:
        return FrameConfig(self.frame_length_s, self.frame_shift_s, self.n_fft, self.n_mels)

    def language_ids(self) -> list[str]:
        return [f"lng{i}" for i in range(self.num_languages)]

    def validate(self) -> None:
        if self.num_languages < 2:
            raise ValueError("config needs at least 2 languages")
        if self.speakers_per_language < 2:
            raise ValueError("config needs at least 2 speakers per language")
        n_speakers = self.num_languages * self.speakers_per_language
        if self.num_utterances < n_speakers:
            raise ValueError(
                f"{self.num_utterances} utterances cannot cover {n_speakers} speakers"
            )
        lo, hi = self.snr_range_db
        if not (lo <= hi) or not np.isfinite(lo) or not np.isfinite(hi):
            raise ValueError("snr_range_db must be a finite (low, high) pair")
        if not (0.0 < self.archetype_dominance < 1.0):
            raise ValueError("archetype_dominance must be in (0, 1)")


def split_counts(n: int) -> tuple[int, int, int]:
    """Deterministic 85:5:10 split sizes that sum to n."""
    train = int(np.floor(SPLIT_RATIOS[0] * n))
    dev = int(np.floor(SPLIT_RATIOS[1] * n))
    return train, dev, n - train - dev


def archetype_contour(archetype: str, num_frames: int, base_f0: float,
                      span: float, wobble_phase: float) -> np.ndarray:
    """Smooth contour in Hz for one utterance."""
    u = np.linspace(0.0, 1.0, num_frames)
    if archetype == "rise":
        shape = 1.0 + span * (u - 0.5)
    elif archetype == "fall":
        shape = 1.0 - span * (u - 0.5)
    elif archetype == "peak":
        shape = 1.0 + span * (np.sin(np.pi * u) - 0.5)
    elif archetype == "dip":
        shape = 1.0 - span * (np.sin(np.pi * u) - 0.5)
    elif archetype == "level":
        shape = np.ones(num_frames)
    else:
        raise ValueError(f"unknown archetype: {archetype}")
    wobble = 1.0 + 0.015 * np.sin(2.0 * np.pi * (1.5 * u + wobble_phase))
    return np.clip(base_f0 * shape * wobble, 95.0, 400.0)


@dataclass(frozen=True)
class _Speaker:
    speaker_id: str
    language_id: str
    base_f0: float
    timbre: SpeakerTimbre


def _speaker_table(cfg: CorpusConfig, rng: np.random.Generator) -> list[_Speaker]:
    n = cfg.num_languages * cfg.speakers_per_language
    # Formant scales evenly spread then shuffled: every speaker gets a
    # distinct vocal-tract size uncorrelated with its language.
    scales = np.linspace(0.82, 1.30, n)
    rng.shuffle(scales)
    speakers = []
    for i in range(n):
        lang = cfg.language_ids()[i // cfg.speakers_per_language]
        speakers.append(_Speaker(
            speaker_id=f"{cfg.speaker_prefix}{i:02d}",
            language_id=lang,
            base_f0=float(rng.uniform(*cfg.base_f0_range_hz)),
            timbre=SpeakerTimbre(formant_scale=float(scales[i]),
                                 tilt=float(rng.uniform(0.6, 1.0))),
        ))
    return speakers


def _archetype_for(language_index: int, cfg: CorpusConfig, rng: np.random.Generator) -> str:
    dominant = ARCHETYPES[language_index % len(ARCHETYPES)]
    if rng.random() < cfg.archetype_dominance:
        return dominant
    return str(rng.choice([a for a in ARCHETYPES if a != dominant]))


def generate_corpus(cfg: CorpusConfig, seed: int, out_dir: str | Path) -> Manifest:
    """Render a synthetic corpus under out_dir and write its manifest.

    Deterministic for a fixed (cfg, seed): identical manifests and audio bytes."""
    cfg.validate()
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    speakers = _speaker_table(cfg, rng)
    by_language: dict[str, list[_Speaker]] = {}
    for s in speakers:
        by_language.setdefault(s.language_id, []).append(s)

    n = cfg.num_utterances
    n_train, n_dev, _ = split_counts(n)
    order = rng.permutation(n)
    split_of = np.empty(n, dtype=object)
    split_of[order[:n_train]] = "train"
    split_of[order[n_train : n_train + n_dev]] = "dev"
    split_of[order[n_train + n_dev :]] = "test"

    frame_cfg = cfg.frame_config()
    records = []
    for k in range(n):
        lang_index = k % cfg.num_languages
        language = cfg.language_ids()[lang_index]
        speaker = by_language[language][int(rng.integers(len(by_language[language])))]

        n_ph = int(rng.integers(cfg.phonemes_per_utterance[0],
                                cfg.phonemes_per_utterance[1] + 1))
        phonemes = tuple(str(p) for p in rng.choice(PHONEMES, n_ph))
        frames = rng.integers(cfg.phoneme_frames[0], cfg.phoneme_frames[1] + 1, n_ph)
        durations = tuple(float(f) * cfg.frame_shift_s for f in frames)
        total_frames = int(frames.sum())

        archetype = _archetype_for(lang_index, cfg, rng)
        contour = archetype_contour(archetype, total_frames, speaker.base_f0,
                                    span=float(rng.uniform(0.35, 0.6)),
                                    wobble_phase=float(rng.random()))

        levels = rng.uniform(0.45, 1.0, n_ph)
        energy = np.interp(np.arange(total_frames),
                           np.cumsum(frames) - frames / 2.0, levels)

        snr = 100.0 if cfg.clean else float(rng.uniform(*cfg.snr_range_db))
        spec = SyntheticUtteranceSpec(
            phonemes=phonemes,
            durations_s=durations,
            pitch_contour_hz=contour,
            energy_contour=energy,
            timbre=speaker.timbre,
            archetype=archetype,
            snr_db=snr,
            noise_color=cfg.noise_color,
            noise_seed=int(rng.integers(2**31)),
            silence_s=cfg.silence_s,
        )
        clean, noise = render_synthetic_utterance(spec, cfg.sample_rate_hz, frame_cfg)
        q_clean = quantize_pcm16(clean.samples)
        if cfg.clean:
            q_noise = np.zeros_like(q_clean)
        else:
            q_noise = quantize_pcm16(noise.samples)
        mixed = Waveform(q_clean + q_noise, cfg.sample_rate_hz)

        utt_id = f"{cfg.id_prefix}{k:05d}"
        rel_mixed = f"audio/{utt_id}.wav"
        rel_clean = f"audio/{utt_id}.clean.wav"
        rel_noise = f"audio/{utt_id}.noise.wav"
        write_wav(out_dir / rel_mixed, mixed)
        write_wav(out_dir / rel_clean, Waveform(q_clean, cfg.sample_rate_hz))
        write_wav(out_dir / rel_noise, Waveform(q_noise, cfg.sample_rate_hz))

        records.append(Utterance(
            id=utt_id,
            audio_path=rel_mixed,
            phonemes=phonemes,
            speaker_id=speaker.speaker_id,
            language_id=language,
            is_clean=cfg.clean,
            split=str(split_of[k]),
            ground_truth=GroundTruth(rel_clean, rel_noise, spec),
        ))

    manifest = Manifest(records, config_digest(asdict(cfg)),
                        header_extra={"corpus_config": asdict(cfg), "seed": seed})
    manifest.write(out_dir / "manifest.jsonl")
    return manifest
