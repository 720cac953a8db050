"""Variational reference encoders producing utterance-level Gaussian codes."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from .config import REF_ENCODER_CONV_LAYERS, REF_ENCODER_KERNEL
from .modules import ChannelLayerNorm, sequence_mask, zero_init


@dataclass
class GaussianEmbedding:
    """Diagonal-Gaussian utterance code: (mean, log variance, drawn sample)."""

    mean: torch.Tensor
    log_variance: torch.Tensor
    sample: torch.Tensor
    epsilon: torch.Tensor | None = None

    @classmethod
    def from_stats(cls, mean: torch.Tensor, log_variance: torch.Tensor,
                   deterministic: bool) -> "GaussianEmbedding":
        if deterministic:
            return cls(mean, log_variance, mean, None)
        eps = torch.randn_like(mean)
        sample = mean + torch.exp(0.5 * log_variance) * eps
        return cls(mean, log_variance, sample, eps)

    @classmethod
    def point(cls, value: torch.Tensor) -> "GaussianEmbedding":
        """Degenerate deterministic code (used for centroids)."""
        log_var = torch.full_like(value, float("-inf"))
        return cls(value, log_var, value, None)

    def detach(self) -> "GaussianEmbedding":
        return GaussianEmbedding(self.mean.detach(), self.log_variance.detach(),
                                 self.sample.detach(),
                                 None if self.epsilon is None else self.epsilon.detach())


class ReferenceEncoder(nn.Module):
    """Five conv layers (kernel 3) -> one bidirectional LSTM -> two affine
    heads parameterizing a diagonal Gaussian. One code per utterance."""

    def __init__(self, input_bins: int, channels: int, embedding_dim: int):
        super().__init__()
        self.convs = nn.ModuleList()
        self.norms = nn.ModuleList()
        ch = input_bins
        for _ in range(REF_ENCODER_CONV_LAYERS):
            self.convs.append(nn.Conv1d(ch, channels, REF_ENCODER_KERNEL, padding=1))
            self.norms.append(ChannelLayerNorm(channels))
            ch = channels
        self.lstm = nn.LSTM(channels, channels, batch_first=True, bidirectional=True)
        # Zero-initialized heads: the initial code is exactly N(0, I), so the
        # KLD term starts at 0 and conditioning starts neutral.
        self.mean_head = zero_init(nn.Linear(2 * channels, embedding_dim))
        self.log_variance_head = zero_init(nn.Linear(2 * channels, embedding_dim))

    def forward(self, spectrograms: torch.Tensor, lengths: torch.Tensor,
                deterministic: bool = False) -> GaussianEmbedding:
        """spectrograms: [B, bins, T]; lengths: [B] valid frame counts."""
        if spectrograms.size(2) < 1:
            raise ValueError("reference encoder needs at least one frame")
        mask = sequence_mask(lengths, spectrograms.size(2)).unsqueeze(1).to(spectrograms.dtype)
        x = spectrograms
        for conv, norm in zip(self.convs, self.norms):
            x = norm(torch.relu(conv(x * mask)))
        x = (x * mask).transpose(1, 2)  # [B, T, C]
        packed = nn.utils.rnn.pack_padded_sequence(
            x, lengths.cpu().clamp(min=1), batch_first=True, enforce_sorted=False)
        _, (_, cell) = self.lstm(packed)
        summary = torch.cat([cell[0], cell[1]], dim=1)  # final cell states, both directions
        mean = self.mean_head(summary)
        log_variance = self.log_variance_head(summary)
        return GaussianEmbedding.from_stats(mean, log_variance, deterministic)
