"""Featurization of corpus records into training batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..corpus.denoise import denoise_record
from ..corpus.manifest import Manifest, Utterance
from ..model.config import ModelConfig
from ..signal.audio import Waveform, read_wav
from ..signal.render import PHONEMES
from ..signal.spectrogram import FrameConfig, compute_spectrogram

SILENCE_SYMBOL = "sil"
MODEL_PHONEMES = PHONEMES + (SILENCE_SYMBOL,)
PHONEME_TO_ID = {p: i for i, p in enumerate(MODEL_PHONEMES)}
SIL_ID = PHONEME_TO_ID[SILENCE_SYMBOL]


def frame_config_for(config: ModelConfig) -> FrameConfig:
    return FrameConfig(
        frame_length_s=config.win_length / config.sample_rate_hz,
        frame_shift_s=config.hop / config.sample_rate_hz,
        n_fft=config.n_fft,
    )


def linear_spectrogram(w: Waveform, config: ModelConfig) -> np.ndarray:
    """[bins, T] magnitude matrix for model input."""
    spec = compute_spectrogram(w, frame_config_for(config), kind="linear")
    return spec.magnitudes.T.astype(np.float32)


def phoneme_ids(phonemes: tuple[str, ...], wrap_silence: bool = True) -> list[int]:
    unknown = [p for p in phonemes if p not in PHONEME_TO_ID]
    if unknown:
        raise ValueError(f"unknown phonemes: {unknown}")
    ids = [PHONEME_TO_ID[p] for p in phonemes]
    return [SIL_ID] + ids + [SIL_ID] if wrap_silence else ids


@dataclass
class RecordFeatures:
    record_id: str
    phoneme_ids: list[int]
    durations: list[int]  # frames per symbol, silence wrappers included
    linear_spec: np.ndarray  # [bins, T]
    waveform: np.ndarray
    prosody_ref: np.ndarray  # [bins, T_ref]
    noise_ref: np.ndarray | None
    speaker: str
    language: str


class FeatureExtractor:
    """Loads and caches per-record features for one (manifest, model) pair."""

    def __init__(self, manifest: Manifest, config: ModelConfig, variant: str,
                 denoise_mode: str = "oracle"):
        if variant not in ("vipt", "vipt-nm"):
            raise ValueError(f"unknown variant: {variant}")
        if variant == "vipt-nm" and not config.noise_modelling:
            raise ValueError("vipt-nm training needs a noise-modelling model")
        self.manifest = manifest
        self.config = config
        self.variant = variant
        self.denoise_mode = denoise_mode
        self.speakers = manifest.speakers()
        self.languages = manifest.languages()
        self.speaker_to_id = {s: i for i, s in enumerate(self.speakers)}
        self.language_to_id = {l: i for i, l in enumerate(self.languages)}
        self._cache: dict[str, RecordFeatures] = {}

    def _durations_with_silence(self, record: Utterance, total_frames: int) -> list[int]:
        gt = record.ground_truth
        if gt is None:
            raise ValueError(f"record {record.id} lacks ground-truth durations")
        hop = self.config.hop
        frame_shift_s = hop / self.config.sample_rate_hz
        speech = [int(f) for f in gt.spec.frames_per_phoneme(frame_shift_s)]
        lead = int(round(round(gt.spec.silence_s * self.config.sample_rate_hz) / hop))
        tail = total_frames - sum(speech) - lead
        if tail < 0:
            raise ValueError(
                f"record {record.id}: durations ({sum(speech)} frames + {lead} lead) "
                f"exceed the {total_frames} spectrogram frames"
            )
        return [lead] + speech + [tail]

    def extract(self, record: Utterance) -> RecordFeatures:
        if record.id in self._cache:
            return self._cache[record.id]
        w = read_wav(self.manifest.resolve(record.audio_path))
        spec = linear_spectrogram(w, self.config)
        if self.variant == "vipt":
            prosody_ref = spec
            noise_ref = None
        else:
            denoised, residual = denoise_record(record, self.manifest, self.denoise_mode)
            prosody_ref = linear_spectrogram(denoised, self.config)
            noise_ref = linear_spectrogram(residual, self.config)
        feats = RecordFeatures(
            record_id=record.id,
            phoneme_ids=phoneme_ids(record.phonemes),
            durations=self._durations_with_silence(record, spec.shape[1]),
            linear_spec=spec,
            waveform=w.samples.astype(np.float32),
            prosody_ref=prosody_ref,
            noise_ref=noise_ref,
            speaker=record.speaker_id,
            language=record.language_id,
        )
        self._cache[record.id] = feats
        return feats

    def collate(self, records: list[Utterance]) -> dict[str, torch.Tensor]:
        feats = [self.extract(r) for r in records]
        batch_size = len(feats)
        max_ph = max(len(f.phoneme_ids) for f in feats)
        max_t = max(f.linear_spec.shape[1] for f in feats)
        max_ref = max(f.prosody_ref.shape[1] for f in feats)
        max_wav = max(f.waveform.size for f in feats)
        bins = feats[0].linear_spec.shape[0]

        phonemes = torch.zeros(batch_size, max_ph, dtype=torch.long)
        phoneme_lengths = torch.zeros(batch_size, dtype=torch.long)
        durations = torch.zeros(batch_size, max_ph, dtype=torch.long)
        linear = torch.zeros(batch_size, bins, max_t)
        spec_lengths = torch.zeros(batch_size, dtype=torch.long)
        waveform = torch.zeros(batch_size, max_wav)
        prosody_ref = torch.zeros(batch_size, bins, max_ref)
        prosody_lengths = torch.zeros(batch_size, dtype=torch.long)
        speaker_ids = torch.zeros(batch_size, dtype=torch.long)
        language_ids = torch.zeros(batch_size, dtype=torch.long)

        batch = {
            "phoneme_ids": phonemes, "phoneme_lengths": phoneme_lengths,
            "durations": durations, "linear_spec": linear,
            "spec_lengths": spec_lengths, "waveform": waveform,
            "prosody_ref": prosody_ref, "prosody_ref_lengths": prosody_lengths,
            "speaker_ids": speaker_ids, "language_ids": language_ids,
            "record_ids": [f.record_id for f in feats],
        }
        if self.variant == "vipt-nm":
            max_nref = max(f.noise_ref.shape[1] for f in feats)
            batch["noise_ref"] = torch.zeros(batch_size, bins, max_nref)
            batch["noise_ref_lengths"] = torch.zeros(batch_size, dtype=torch.long)

        for i, f in enumerate(feats):
            n_ph = len(f.phoneme_ids)
            phonemes[i, :n_ph] = torch.tensor(f.phoneme_ids)
            phoneme_lengths[i] = n_ph
            durations[i, :n_ph] = torch.tensor(f.durations)
            t = f.linear_spec.shape[1]
            linear[i, :, :t] = torch.from_numpy(f.linear_spec)
            spec_lengths[i] = t
            waveform[i, : f.waveform.size] = torch.from_numpy(f.waveform)
            tr = f.prosody_ref.shape[1]
            prosody_ref[i, :, :tr] = torch.from_numpy(f.prosody_ref)
            prosody_lengths[i] = tr
            speaker_ids[i] = self.speaker_to_id[f.speaker]
            language_ids[i] = self.language_to_id[f.language]
            if self.variant == "vipt-nm":
                tn = f.noise_ref.shape[1]
                batch["noise_ref"][i, :, :tn] = torch.from_numpy(f.noise_ref)
                batch["noise_ref_lengths"][i] = tn
        return batch
