"""Synthesis pipelines: centroid baseline, prosody transfer, NM transfer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..corpus.denoise import denoise, denoise_record
from ..corpus.manifest import Manifest, Utterance
from ..model import ConditioningBundle, GaussianEmbedding, ProsodyTransferModel
from ..signal.audio import Waveform, read_wav, rms_normalized
from ..signal.snr import snr_db
from ..training.data import linear_spectrogram, phoneme_ids

MODES = ("centroid", "transfer", "nm_transfer")
OUTPUT_RMS = 10.0 ** (-23.0 / 20.0)  # -23 dBFS RMS target


@dataclass
class SynthesisRequest:
    phonemes: tuple[str, ...]
    speaker_id: str
    language_id: str
    mode: str = "transfer"
    prosody_reference: Waveform | None = None
    noise_reference: Waveform | None = None
    # Ground-truth noise tracks, when the references come from synthetic
    # records; their presence switches reference denoising to oracle mode.
    prosody_reference_noise: Waveform | None = None
    noise_reference_noise: Waveform | None = None
    deterministic: bool = True
    length_scale: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown synthesis mode: {self.mode}")
        if self.mode in ("transfer", "nm_transfer") and self.prosody_reference is None:
            raise ValueError(f"{self.mode} mode requires a prosody reference")
        if self.mode == "nm_transfer" and self.noise_reference is None:
            raise ValueError("nm_transfer mode requires a noise reference")


@dataclass
class SynthesisResult:
    waveform: Waveform
    durations: list[int]
    prosody_embedding: np.ndarray
    noise_embedding: np.ndarray | None
    output_snr_db: float

    def diagnostics(self) -> dict:
        return {
            "durations": self.durations,
            "total_frames": int(sum(self.durations)),
            "prosody_embedding": [round(float(v), 6) for v in self.prosody_embedding],
            "noise_embedding": (None if self.noise_embedding is None else
                                [round(float(v), 6) for v in self.noise_embedding]),
            "output_snr_db": round(self.output_snr_db, 3),
        }


def compute_speaker_centroid(model: ProsodyTransferModel, manifest: Manifest,
                             speaker_id: str, split: str = "train",
                             denoise_mode: str = "oracle") -> GaussianEmbedding:
    """Elementwise mean of prosody-encoder means over the speaker's denoised
    utterances. Deterministic: the returned code has sample == mean."""
    records = [r for r in manifest.split(split) if r.speaker_id == speaker_id]
    if not records:
        if speaker_id not in manifest.speakers():
            raise ValueError(f"unknown speaker: {speaker_id!r}")
        raise ValueError(f"speaker {speaker_id!r} has no utterances in split {split!r}")
    model.eval()
    means = []
    with torch.no_grad():
        for record in records:
            denoised, _ = denoise_record(record, manifest, denoise_mode)
            spec = torch.from_numpy(linear_spectrogram(denoised, model.config)).unsqueeze(0)
            lengths = torch.tensor([spec.size(2)])
            emb = model.prosody_encode(spec, lengths, deterministic=True)
            means.append(emb.mean.squeeze(0))
    centroid = torch.stack(means).mean(dim=0, keepdim=True)
    return GaussianEmbedding.point(centroid)


class Synthesizer:
    """Frozen-model synthesis; read-only and safe for concurrent calls."""

    def __init__(self, model: ProsodyTransferModel, speakers: list[str],
                 languages: list[str], reference_denoise_mode: str = "spectral_subtraction",
                 denoise_references: bool = True,
                 noise_anchor: Waveform | None = None,
                 centroids: dict[str, GaussianEmbedding] | None = None):
        self.model = model.eval()
        self.speakers = list(speakers)
        self.languages = list(languages)
        self.speaker_to_id = {s: i for i, s in enumerate(self.speakers)}
        self.language_to_id = {l: i for i, l in enumerate(self.languages)}
        self.reference_denoise_mode = reference_denoise_mode
        self.denoise_references = denoise_references
        self.noise_anchor = noise_anchor
        self.centroids = dict(centroids or {})

    # ---- embedding extraction ----------------------------------------------

    def _encode_spec(self, w: Waveform, encoder) -> GaussianEmbedding:
        spec = torch.from_numpy(linear_spectrogram(w, self.model.config)).unsqueeze(0)
        lengths = torch.tensor([spec.size(2)])
        with torch.no_grad():
            return encoder(spec, lengths, deterministic=True)

    def encode_prosody_reference(self, w: Waveform,
                                 ground_truth_noise: Waveform | None = None
                                 ) -> GaussianEmbedding:
        """References are denoised before encoding unless disabled."""
        if self.denoise_references:
            mode = ("oracle" if ground_truth_noise is not None
                    else self.reference_denoise_mode)
            w, _ = denoise(w, mode, ground_truth_noise=ground_truth_noise)
        return self._encode_spec(w, self.model.prosody_encode)

    def encode_noise_reference(self, w: Waveform,
                               ground_truth_noise: Waveform | None = None
                               ) -> GaussianEmbedding:
        """The noise code comes from the residual stream of the reference."""
        mode = ("oracle" if ground_truth_noise is not None
                else self.reference_denoise_mode)
        _, residual = denoise(w, mode, ground_truth_noise=ground_truth_noise)
        return self._encode_spec(residual, self.model.noise_encode)

    def _noise_embedding(self, req: SynthesisRequest) -> GaussianEmbedding | None:
        if not self.model.config.noise_modelling:
            return None
        if req.noise_reference is not None:
            return self.encode_noise_reference(req.noise_reference,
                                               req.noise_reference_noise)
        if self.noise_anchor is not None:
            return self.encode_noise_reference(self.noise_anchor)
        raise ValueError("noise-modelling model needs a noise reference or anchor")

    # ---- synthesis -----------------------------------------------------------

    def synthesize(self, req: SynthesisRequest,
                   prosody_override: GaussianEmbedding | None = None) -> SynthesisResult:
        if req.speaker_id not in self.speaker_to_id:
            raise ValueError(f"unknown speaker: {req.speaker_id!r}")
        if req.language_id not in self.language_to_id:
            raise ValueError(f"unknown language: {req.language_id!r}")

        if prosody_override is not None:
            prosody = prosody_override
        elif req.mode == "centroid":
            if req.speaker_id not in self.centroids:
                raise ValueError(f"no centroid available for speaker {req.speaker_id!r}")
            prosody = self.centroids[req.speaker_id]
        else:
            prosody = self.encode_prosody_reference(req.prosody_reference,
                                                    req.prosody_reference_noise)

        noise = self._noise_embedding(req)
        bundle = ConditioningBundle(
            speaker_ids=torch.tensor([self.speaker_to_id[req.speaker_id]]),
            language_ids=torch.tensor([self.language_to_id[req.language_id]]),
            prosody=prosody, noise=noise)

        ids = torch.tensor([phoneme_ids(req.phonemes)], dtype=torch.long)
        lengths = torch.tensor([ids.size(1)])
        out = self.model.infer(ids, lengths, bundle, deterministic=req.deterministic,
                               length_scale=req.length_scale)
        samples = out["waveform"].squeeze(0).squeeze(0).numpy().astype(np.float64)
        waveform = rms_normalized(Waveform(np.clip(samples, -1.0, 1.0),
                                           self.model.config.sample_rate_hz), OUTPUT_RMS)
        denoised, residual = denoise(waveform, "spectral_subtraction")
        return SynthesisResult(
            waveform=waveform,
            durations=[int(d) for d in out["durations"].squeeze(0).tolist()],
            prosody_embedding=prosody.sample.squeeze(0).numpy(),
            noise_embedding=None if noise is None else noise.sample.squeeze(0).numpy(),
            output_snr_db=snr_db(denoised, residual),
        )

    # ---- corpus-facing helpers ----------------------------------------------

    def request_from_record(self, record: Utterance, manifest: Manifest,
                            target_speaker: str, target_language: str, mode: str,
                            noise_reference: Waveform | None = None,
                            deterministic: bool = True,
                            oracle_reference_denoise: bool = True) -> SynthesisRequest:
        """Dubbing request: the record is the prosody reference; its phoneme
        sequence doubles as the target-language text (no translation step)."""
        prosody_ref = None
        prosody_ref_noise = None
        if mode in ("transfer", "nm_transfer"):
            prosody_ref = read_wav(manifest.resolve(record.audio_path))
            if oracle_reference_denoise and record.ground_truth is not None:
                prosody_ref_noise = read_wav(
                    manifest.resolve(record.ground_truth.noise_path))
        return SynthesisRequest(
            phonemes=record.phonemes,
            speaker_id=target_speaker,
            language_id=target_language,
            mode=mode,
            prosody_reference=prosody_ref,
            noise_reference=noise_reference,
            prosody_reference_noise=prosody_ref_noise,
            deterministic=deterministic,
        )
