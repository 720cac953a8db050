"""The full prosody-transfer network (base and noise-modelling variants)."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from .config import ModelConfig
from .decoder import Decoder
from .duration import DurationPredictor
from .flow import CouplingFlow
from .frame_prior import FramePriorNetwork
from .modules import length_regulate, sequence_mask
from .posterior import PosteriorEncoder
from .reference import GaussianEmbedding, ReferenceEncoder
from .text_encoder import TextEncoder

VARIANTS = ("vipt", "vipt-nm")


@dataclass
class ConditioningBundle:
    """Everything the synthesis path is conditioned on."""

    speaker_ids: torch.Tensor  # [B]
    language_ids: torch.Tensor  # [B]
    prosody: GaussianEmbedding
    noise: GaussianEmbedding | None = None


class ProsodyTransferModel(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        bins = config.linear_bins
        cond_input = config.prosody_dim + (config.noise_dim if config.noise_modelling else 0)

        self.prosody_encoder = ReferenceEncoder(bins, config.ref_channels, config.prosody_dim)
        self.noise_encoder = (
            ReferenceEncoder(bins, config.ref_channels, config.noise_dim)
            if config.noise_modelling else None)
        self.text_encoder = TextEncoder(config.num_phonemes, config.text_hidden,
                                        config.text_layers, config.text_heads,
                                        cond_input, config.conditioning_mode)
        self.duration_predictor = DurationPredictor(config.text_hidden,
                                                    config.conditioning_dim)
        self.frame_prior_network = FramePriorNetwork(config.text_hidden,
                                                     config.prior_hidden,
                                                     config.latent_dim)
        self.posterior_encoder = PosteriorEncoder(bins, config.posterior_hidden,
                                                  config.latent_dim,
                                                  config.conditioning_dim)
        self.flow = CouplingFlow(config.latent_dim, config.flow_hidden,
                                 config.conditioning_dim, config.flow_blocks)
        self.decoder = Decoder(config.latent_dim, config.decoder_channels,
                               config.upsample_rates, config.conditioning_dim)
        self.speaker_embedding = nn.Embedding(config.num_speakers, config.speaker_dim)
        self.language_embedding = nn.Embedding(config.num_languages, config.language_dim)

    # ---- conditioning -----------------------------------------------------

    def global_conditioning(self, speaker_ids: torch.Tensor,
                            language_ids: torch.Tensor) -> torch.Tensor:
        return torch.cat([self.speaker_embedding(speaker_ids),
                          self.language_embedding(language_ids)], dim=-1)

    def _reference_vector(self, bundle: ConditioningBundle) -> torch.Tensor:
        if self.config.noise_modelling:
            if bundle.noise is None:
                raise ValueError("noise-modelling variant needs a noise embedding")
            return torch.cat([bundle.prosody.sample, bundle.noise.sample], dim=-1)
        return bundle.prosody.sample

    # ---- spec-facing operations -------------------------------------------

    def prosody_encode(self, spec: torch.Tensor, lengths: torch.Tensor,
                       deterministic: bool = False) -> GaussianEmbedding:
        return self.prosody_encoder(spec, lengths, deterministic)

    def noise_encode(self, spec: torch.Tensor, lengths: torch.Tensor,
                     deterministic: bool = False) -> GaussianEmbedding:
        if self.noise_encoder is None:
            raise ValueError("model was built without the noise-modelling extension")
        return self.noise_encoder(spec, lengths, deterministic)

    def text_encode(self, phoneme_ids: torch.Tensor, lengths: torch.Tensor,
                    bundle: ConditioningBundle | None = None) -> torch.Tensor:
        conditioning = None if bundle is None else self._reference_vector(bundle)
        return self.text_encoder(phoneme_ids, lengths, conditioning)

    def predict_durations(self, hidden: torch.Tensor, mask: torch.Tensor,
                          g: torch.Tensor) -> torch.Tensor:
        return self.duration_predictor(hidden, mask, g)

    def frame_prior(self, hidden: torch.Tensor, durations: torch.Tensor
                    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Upsample by durations then refine. Returns (m_p, logs_p, frame_lengths)."""
        if hidden.size(1) != durations.size(1):
            raise ValueError(
                f"durations cover {durations.size(1)} phonemes but hidden has {hidden.size(1)}"
            )
        upsampled, frame_lengths = length_regulate(hidden, durations)
        frame_mask = sequence_mask(frame_lengths, upsampled.size(1))
        m_p, logs_p = self.frame_prior_network(upsampled, frame_mask)
        return m_p, logs_p, frame_lengths

    def posterior_encode(self, spec: torch.Tensor, lengths: torch.Tensor,
                         g: torch.Tensor, deterministic: bool = False):
        return self.posterior_encoder(spec, lengths, g, deterministic)

    def flow_forward(self, z: torch.Tensor, g: torch.Tensor,
                     mask: torch.Tensor | None = None):
        return self.flow(z, g, mask)

    def flow_inverse(self, z: torch.Tensor, g: torch.Tensor,
                     mask: torch.Tensor | None = None) -> torch.Tensor:
        return self.flow.inverse(z, g, mask)

    def decode(self, z: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
        if z.size(2) < 1:
            raise ValueError("cannot decode an empty latent sequence")
        return self.decoder(z, g)

    # ---- training path ----------------------------------------------------

    def forward_train(self, batch: dict, segment_frames: int = 24) -> dict:
        """One training forward pass over a prepared batch.

        Expects keys: phoneme_ids, phoneme_lengths, durations, linear_spec,
        spec_lengths, waveform, prosody_ref, prosody_ref_lengths and, for the
        noise-modelling variant, noise_ref, noise_ref_lengths."""
        cfg = self.config
        prosody = self.prosody_encode(batch["prosody_ref"], batch["prosody_ref_lengths"])
        noise = None
        if cfg.noise_modelling:
            if "noise_ref" not in batch:
                raise ValueError("noise-modelling variant needs a residual stream per record")
            noise = self.noise_encode(batch["noise_ref"], batch["noise_ref_lengths"])

        g = self.global_conditioning(batch["speaker_ids"], batch["language_ids"])
        bundle = ConditioningBundle(batch["speaker_ids"], batch["language_ids"],
                                    prosody, noise)
        hidden = self.text_encode(batch["phoneme_ids"], batch["phoneme_lengths"], bundle)
        phoneme_mask = sequence_mask(batch["phoneme_lengths"], hidden.size(1))

        dur_pred_log = self.predict_durations(hidden.detach(), phoneme_mask, g)
        duration_loss = DurationPredictor.loss(dur_pred_log, batch["durations"],
                                               phoneme_mask.to(hidden.dtype))

        m_p, logs_p, frame_lengths = self.frame_prior(hidden, batch["durations"])

        m_q, logs_q, z = self.posterior_encode(batch["linear_spec"],
                                               batch["spec_lengths"], g)
        frame_mask = sequence_mask(batch["spec_lengths"], z.size(2)).unsqueeze(1)
        z_p, log_det = self.flow_forward(z, g, frame_mask.to(z.dtype))

        kl = self._kl_divergence(z_p, logs_q, m_p, logs_p, log_det,
                                 frame_mask, frame_lengths)

        z_seg, y_seg = self._slice_segments(z, batch["waveform"],
                                            batch["spec_lengths"], segment_frames)
        y_hat = self.decode(z_seg, g)

        return {
            "waveform_segments": y_hat,
            "target_segments": y_seg,
            "kl": kl,
            "duration_loss": duration_loss,
            "duration_pred_log": dur_pred_log,
            "prosody": prosody,
            "noise": noise,
        }

    def _kl_divergence(self, z_p, logs_q, m_p, logs_p, log_det,
                       frame_mask, frame_lengths) -> torch.Tensor:
        """KL(posterior || frame prior) through the flow, per valid element.

        Prior stats are defined on ground-truth duration frames; posterior
        frames come from the spectrogram. Lengths can differ by the silence
        padding, so both are cropped to the shorter sequence."""
        t = min(z_p.size(2), m_p.size(2))
        z_p, logs_q = z_p[:, :, :t], logs_q[:, :, :t]
        m_p, logs_p = m_p[:, :, :t], logs_p[:, :, :t]
        mask = frame_mask[:, :, :t].to(z_p.dtype)
        prior_mask = sequence_mask(frame_lengths, t).unsqueeze(1).to(z_p.dtype)
        mask = mask * prior_mask
        kl_el = logs_p - logs_q - 0.5 + 0.5 * ((z_p - m_p) ** 2) * torch.exp(-2.0 * logs_p)
        denom = (mask.sum() * z_p.size(1)).clamp(min=1)
        return (kl_el * mask).sum() / denom - log_det.sum() / denom

    def _slice_segments(self, z: torch.Tensor, waveform: torch.Tensor,
                        lengths: torch.Tensor, segment_frames: int
                        ) -> tuple[torch.Tensor, torch.Tensor]:
        batch, _, total = z.shape
        hop = self.config.hop
        z_segments = []
        y_segments = []
        for b in range(batch):
            usable = int(lengths[b]) - segment_frames - 1
            start = int(torch.randint(0, usable + 1, (1,))) if usable > 0 else 0
            z_seg = z[b : b + 1, :, start : start + segment_frames]
            if z_seg.size(2) < segment_frames:
                z_seg = torch.nn.functional.pad(z_seg, (0, segment_frames - z_seg.size(2)))
            z_segments.append(z_seg)
            y = waveform[b : b + 1, start * hop : (start + segment_frames) * hop]
            if y.size(1) < segment_frames * hop:
                y = torch.nn.functional.pad(y, (0, segment_frames * hop - y.size(1)))
            y_segments.append(y)
        return torch.cat(z_segments, dim=0), torch.cat(y_segments, dim=0).unsqueeze(1)

    # ---- inference path ----------------------------------------------------

    @torch.no_grad()
    def infer(self, phoneme_ids: torch.Tensor, lengths: torch.Tensor,
              bundle: ConditioningBundle, deterministic: bool = True,
              length_scale: float = 1.0) -> dict:
        g = self.global_conditioning(bundle.speaker_ids, bundle.language_ids)
        hidden = self.text_encode(phoneme_ids, lengths, bundle)
        phoneme_mask = sequence_mask(lengths, hidden.size(1))
        dur_log = self.predict_durations(hidden, phoneme_mask, g)
        durations = DurationPredictor.to_frames(dur_log, phoneme_mask, length_scale)
        m_p, logs_p, frame_lengths = self.frame_prior(hidden, durations)
        if deterministic:
            z_p = m_p
        else:
            z_p = m_p + torch.randn_like(m_p) * torch.exp(logs_p)
        frame_mask = sequence_mask(frame_lengths, z_p.size(2)).unsqueeze(1).to(z_p.dtype)
        z = self.flow_inverse(z_p * frame_mask, g, frame_mask)
        waveform = self.decode(z, g)
        return {"waveform": waveform, "durations": durations,
                "frame_lengths": frame_lengths}

    # ---- reporting ----------------------------------------------------------

    def parameter_counts(self) -> dict[str, int]:
        counts = {}
        for name, module in self.named_children():
            if module is not None:
                counts[name] = sum(p.numel() for p in module.parameters())
        counts["total"] = sum(p.numel() for p in self.parameters())
        return counts
